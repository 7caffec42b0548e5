// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// haca: dataset synthesis, training, evaluation, generation, gradient checks
// and the variant comparison harness.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "haca/dataset.hpp"
#include "haca/evaluation.hpp"
#include "haca/inference.hpp"
#include "haca/model_gradcheck.hpp"
#include "haca/run_config.hpp"
#include "haca/synth.hpp"
#include "haca/training.hpp"

namespace fs = std::filesystem;
using namespace haca;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration

// `--key value` and `--key=value` pairs left over after the named flags.
ConfigMap parse_overrides(const std::vector<std::string>& extras) {
  ConfigMap out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (!arg.starts_with("--") || arg.size() == 2) throw UsageError("unexpected argument '" + arg + "'");
    arg = arg.substr(2);
    std::string value;
    if (const auto eq = arg.find('='); eq != std::string::npos) {
      value = arg.substr(eq + 1);
      arg = arg.substr(0, eq);
    } else {
      if (i + 1 == extras.size()) throw UsageError("option '--" + arg + "' needs a value");
      value = extras[++i];
    }
    std::replace(arg.begin(), arg.end(), '-', '_');
    out[arg] = value;
  }
  return out;
}

struct LoadedConfig {
  RunConfig run;
  ConfigMap explicit_keys;  // keys set by the file or the command line
};

LoadedConfig load_config(const std::string& path, const ConfigMap& overrides) {
  LoadedConfig out;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream text;
    text << in.rdbuf();
    out.explicit_keys = parse_config_text(text.str(), path);
  }
  for (const auto& [k, v] : overrides) out.explicit_keys[k] = v;
  out.run.apply(out.explicit_keys);
  return out;
}

void echo_config(std::ostream& os, const std::string& command, const RunConfig& config) {
  os << "# haca " << command << " effective configuration\n" << format_config_text(config.to_map());
}

// Model keys whose explicit value differs from `reference`.
std::vector<std::string> differing_model_keys(const ConfigMap& reference, const ConfigMap& explicit_keys) {
  std::vector<std::string> out;
  const ConfigMap model_keys = to_config_map(HacaConfig{});
  for (const auto& [key, value] : explicit_keys) {
    if (!model_keys.count(key)) continue;
    auto it = reference.find(key);
    if (it != reference.end() && it->second != value) out.push_back(key + " (" + it->second + " vs " + value + ")");
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

// Fills vocab_size and the input dims from the data; rejects explicit values
// that disagree.
void bind_model_to_data(LoadedConfig& config, const Dataset& data) {
  HacaConfig& m = config.run.model;
  auto bind = [&](const std::string& key, std::size_t& field, std::size_t actual) {
    if (config.explicit_keys.count(key) && field != actual) {
      throw ConfigError(key + " = " + std::to_string(field) + " but the data has " + std::to_string(actual));
    }
    field = actual;
  };
  bind("vocab_size", m.vocab_size, data.vocab.size());
  if (data.samples.empty()) return;
  const Sample& first = data.samples.front();
  for (auto* modality : {&m.visual, &m.audio}) {
    const ModalityStream* stream = nullptr;
    for (const auto& s : first.streams)
      if (s.name == modality->name) stream = &s;
    if (stream) bind(modality->name + "_dim", modality->input_dim, stream->dim);
  }
}

Dataset load_split(const std::string& manifest, const std::string& what) {
  if (manifest.empty()) throw UsageError("no " + what + " manifest given");
  return load_dataset(manifest);
}

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) throw UsageError(dir.string() + " exists and is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw UsageError(dir.string() + " is not empty (use --force to overwrite)");
  }
  fs::create_directories(dir);
}

// Log lines go to stderr and, once opened, to the run log file.
class RunLog {
 public:
  void open(const fs::path& path, bool append) {
    file_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!file_) throw DataError(path.string() + ": cannot open log for writing");
  }
  void write(const std::string& text) {
    std::cerr << text;
    if (file_.is_open()) file_ << text << std::flush;
  }

 private:
  std::ofstream file_;
};

BeamOptions beam_options(const RunConfig& config, std::size_t beam, std::size_t nbest) {
  BeamOptions o;
  o.beam_size = beam;
  o.max_steps = config.model.max_decode_steps;
  o.length_normalize = config.decode.length_normalize;
  o.nbest = nbest;
  return o;
}

// ---------------------------------------------------------------------------
// Training shared by train and compare

struct TrainOutputs {
  fs::path metrics_csv;
  std::optional<fs::path> checkpoint;
};

std::vector<EpochMetrics> run_training(Trainer& trainer, const Dataset& train, const Dataset& val,
                                       const TrainOutputs& out, RunLog& log, bool append_metrics) {
  std::ofstream csv(out.metrics_csv, append_metrics ? std::ios::app : std::ios::trunc);
  if (!csv) throw DataError(out.metrics_csv.string() + ": cannot open for writing");
  if (!append_metrics) csv << EpochMetrics::csv_header() << '\n';
  const auto start = std::chrono::steady_clock::now();
  return trainer.train(train.samples, val.samples, [&](const EpochMetrics& m) {
    csv << m.csv_row() << '\n' << std::flush;
    if (out.checkpoint) save_checkpoint(*out.checkpoint, trainer.checkpoint());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[256];
    std::snprintf(line, sizeof line,
                  "epoch %zu  train_loss %.4f  val_loss %.4f  val_bleu4 %.4f  lr %.4g  tf_prob %.3f  %.1fs\n",
                  m.epoch, m.train_loss, m.val_loss, m.val_bleu4, m.lr, m.teacher_forcing_prob, seconds);
    log.write(line);
    return true;
  });
}

// ---------------------------------------------------------------------------
// Commands

struct SynthArgs {
  std::string out;
  SynthSpec spec;
  bool force = false;
};

int cmd_synth(const SynthArgs& args) {
  prepare_out_dir(args.out, args.force);
  SynthDataset data = synth_dataset(args.spec);
  write_synth_dataset(args.out, data);
  std::cout << "wrote " << args.out << ": train " << data.train.samples.size() << ", val "
            << data.val.samples.size() << ", test " << data.test.samples.size() << " samples, vocabulary "
            << data.vocab.size() << " tokens (" << args.spec.events << " events, " << args.spec.modifiers
            << " modifiers, " << kReservedTokens << " reserved)\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config, variant, resume, out, train, val;
  bool force = false;
  std::vector<std::string> extras;
};

int cmd_train(const TrainArgs& args) {
  ConfigMap overrides = parse_overrides(args.extras);
  if (!args.variant.empty()) overrides["variant"] = args.variant;
  if (!args.train.empty()) overrides["train_manifest"] = args.train;
  if (!args.val.empty()) overrides["val_manifest"] = args.val;
  if (!args.out.empty()) overrides["out_dir"] = args.out;
  LoadedConfig config = load_config(args.config, overrides);
  RunConfig& rc = config.run;
  if (rc.out_dir.empty()) throw UsageError("no output directory (--out or out_dir)");

  Dataset train = load_split(rc.train_manifest, "training");
  Dataset val = rc.val_manifest.empty() ? Dataset{train.vocab, {}} : load_dataset(rc.val_manifest);
  if (!(val.vocab == train.vocab)) throw DataError("training and validation vocabularies differ");

  std::optional<Checkpoint> resume;
  if (!args.resume.empty()) {
    resume = load_checkpoint(args.resume);
    const auto diff = differing_model_keys(resume->config, config.explicit_keys);
    if (!diff.empty()) throw ConfigError("checkpoint and config disagree on: " + join(diff));
    apply_config_map(rc.model, resume->config);
  }
  bind_model_to_data(config, train);
  rc.model.validate();
  rc.train.validate();

  const fs::path out_dir = rc.out_dir;
  if (resume) {
    fs::create_directories(out_dir);
  } else {
    prepare_out_dir(out_dir, args.force);
  }
  RunLog log;
  log.open(out_dir / "run.log", resume.has_value());
  std::ostringstream header;
  echo_config(header, "train", rc);
  log.write(header.str());
  {
    std::ofstream(out_dir / "config.txt") << format_config_text(rc.to_map());
  }

  Trainer trainer = resume ? Trainer(*resume, rc.train) : Trainer(rc.model, rc.train);
  const bool append = resume.has_value() && fs::exists(out_dir / "metrics.csv");
  run_training(trainer, train, val, {out_dir / "metrics.csv", out_dir / "model.ckpt"}, log, append);
  save_checkpoint(out_dir / "model.ckpt", trainer.checkpoint());

  std::ostringstream summary;
  summary << "train token accuracy " << token_accuracy(trainer.model(), train.samples) << '\n';
  if (!val.samples.empty()) {
    EvalReport r = evaluate(trainer.model(), val.samples, beam_options(rc, rc.train.val_beam_size, 1));
    summary << "validation\n" << r.text();
  }
  log.write(summary.str());
  std::cout << "checkpoint " << (out_dir / "model.ckpt").string() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string config, checkpoint, data, dump, csv;
  std::optional<std::size_t> beam;
  std::vector<std::string> extras;
};

// Loads the checkpoint and rejects explicit model keys that disagree with it.
Model load_model(const std::string& path, LoadedConfig& config) {
  if (path.empty()) throw UsageError("--checkpoint is required");
  Checkpoint ckpt = load_checkpoint(path);
  const auto diff = differing_model_keys(ckpt.config, config.explicit_keys);
  if (!diff.empty()) throw ConfigError("checkpoint and config disagree on: " + join(diff));
  apply_config_map(config.run.model, ckpt.config);
  return model_from_checkpoint(ckpt);
}

void check_vocab(const Model& model, const Dataset& data) {
  if (model.config().vocab_size != data.vocab.size()) {
    throw ConfigError("checkpoint vocab_size " + std::to_string(model.config().vocab_size) + " but the data has " +
                      std::to_string(data.vocab.size()) + " tokens");
  }
}

int cmd_eval(const EvalArgs& args) {
  LoadedConfig config = load_config(args.config, parse_overrides(args.extras));
  Model model = load_model(args.checkpoint, config);
  const std::string manifest = args.data.empty() ? config.run.test_manifest : args.data;
  Dataset data = load_split(manifest, "evaluation");
  check_vocab(model, data);
  if (data.samples.empty()) throw DataError(manifest + ": no samples to evaluate");
  const std::size_t beam = args.beam.value_or(config.run.decode.beam_size);
  const BeamOptions options = beam_options(config.run, beam, 1);
  const auto hypotheses = decode_all(model, data.samples, options);
  EvalReport report = evaluate(model, data.samples, options);
  if (!args.dump.empty()) {
    std::ofstream out(args.dump);
    for (std::size_t i = 0; i < hypotheses.size(); ++i) out << data.samples[i].id << '\t' << data.vocab.decode(hypotheses[i]) << '\n';
  }
  if (!args.csv.empty()) std::ofstream(args.csv) << EvalReport::csv_header() << '\n' << report.csv_row() << '\n';
  std::cout << "beam size            " << beam << '\n' << report.text();
  return kExitOk;
}

struct GenerateArgs {
  std::string config, checkpoint, data, out, trace;
  std::optional<std::size_t> beam;
  std::size_t nbest = 1;
  std::vector<std::string> extras;
};

int cmd_generate(const GenerateArgs& args) {
  LoadedConfig config = load_config(args.config, parse_overrides(args.extras));
  Model model = load_model(args.checkpoint, config);
  const std::string manifest = args.data.empty() ? config.run.test_manifest : args.data;
  Dataset data = load_split(manifest, "input");
  check_vocab(model, data);
  if (args.nbest == 0) throw UsageError("--nbest must be at least 1");
  const BeamOptions options = beam_options(config.run, args.beam.value_or(config.run.decode.beam_size), args.nbest);
  if (!args.trace.empty()) fs::create_directories(args.trace);

  std::ofstream file;
  if (!args.out.empty()) {
    file.open(args.out);
    if (!file) throw DataError(args.out + ": cannot open for writing");
  }
  std::ostream& os = args.out.empty() ? std::cout : file;
  for (const Sample& s : data.samples) {
    BeamResult r = beam_search(model, s, options);
    if (args.nbest == 1) {
      os << s.id << '\t' << data.vocab.decode(r.best().tokens) << '\n';
    } else {
      std::istringstream lines(format_nbest(r, data.vocab));
      for (std::string line; std::getline(lines, line);) os << s.id << '\t' << line << '\n';
    }
    if (!args.trace.empty()) {
      std::ofstream(fs::path(args.trace) / (s.id + ".csv")) << trace_attention(model, s, r.best().tokens).csv(data.vocab);
    }
  }
  return kExitOk;
}

struct GradcheckArgs {
  std::string variant = "haca";
  bool all = false;
  double tolerance = 1e-4;
  double step = 1e-5;
  std::string arithmetic = "extended";
  std::size_t vocab = 12;
  std::size_t samples = 2;
  std::size_t steps = 3;
  std::size_t visual_length = 7;
  std::size_t audio_length = 5;
  std::uint64_t seed = 1;
  double init_range = 0.5;
};

int cmd_gradcheck(const GradcheckArgs& args) {
  DifferenceArithmetic arithmetic;
  if (args.arithmetic == "extended") {
    arithmetic = DifferenceArithmetic::kExtended;
  } else if (args.arithmetic == "binary64") {
    arithmetic = DifferenceArithmetic::kBinary64;
  } else {
    throw UsageError("--arithmetic must be extended or binary64");
  }
  std::vector<ModelVariant> variants = args.all ? all_variants() : std::vector<ModelVariant>{};
  if (!args.all) {
    try {
      variants.push_back(parse_variant(args.variant));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  bool all_passed = true;
  for (ModelVariant v : variants) {
    HacaConfig c = micro_config(v, args.vocab);
    c.seed = args.seed;
    c.init_range = args.init_range;
    c.max_decode_steps = args.steps;
    Model model = Model::build(c);
    auto batch = random_batch(c, args.samples, args.visual_length, args.audio_length, args.steps, args.seed + 1000);
    const auto start = std::chrono::steady_clock::now();
    GradCheckReport report = model_gradient_check(model, batch, arithmetic, args.step, args.tolerance);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("variant %s  step %g  tolerance %g  arithmetic %s\n", std::string(variant_name(v)).c_str(), args.step,
                args.tolerance, args.arithmetic.c_str());
    for (const auto& e : report.entries) {
      std::printf("  %-40s n=%-5zu max_rel_err %.3e %s\n", e.name.c_str(), e.count,
                  static_cast<double>(e.max_rel_error), e.flagged ? "FAIL" : "ok");
    }
    std::printf("%s %s max_rel_err %.3e (%.1fs)\n", report.passed() ? "PASS" : "FAIL",
                std::string(variant_name(v)).c_str(), static_cast<double>(report.max_rel_error()), seconds);
    all_passed = all_passed && report.passed();
  }
  return all_passed ? kExitOk : kExitFailure;
}

struct CompareArgs {
  std::string config, out, train, val, variants;
  std::vector<std::uint64_t> seeds;
  bool force = false;
  std::vector<std::string> extras;
};

std::vector<ModelVariant> parse_variant_list(const std::string& text) {
  if (text.empty()) return all_variants();
  std::vector<ModelVariant> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(parse_variant(item));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

int cmd_compare(const CompareArgs& args) {
  ConfigMap overrides = parse_overrides(args.extras);
  if (!args.train.empty()) overrides["train_manifest"] = args.train;
  if (!args.val.empty()) overrides["val_manifest"] = args.val;
  if (!args.out.empty()) overrides["out_dir"] = args.out;
  LoadedConfig config = load_config(args.config, overrides);
  RunConfig& rc = config.run;
  if (rc.out_dir.empty()) throw UsageError("no output directory (--out or out_dir)");
  const auto variants = parse_variant_list(args.variants);
  const std::vector<std::uint64_t> seeds = args.seeds.empty() ? std::vector<std::uint64_t>{rc.model.seed} : args.seeds;

  Dataset train = load_split(rc.train_manifest, "training");
  Dataset val = load_split(rc.val_manifest, "validation");
  if (!(val.vocab == train.vocab)) throw DataError("training and validation vocabularies differ");
  bind_model_to_data(config, train);
  rc.train.validate();

  const fs::path out_dir = rc.out_dir;
  prepare_out_dir(out_dir, args.force);
  RunLog log;
  log.open(out_dir / "run.log", false);
  std::ostringstream header;
  echo_config(header, "compare", rc);
  header << "# variants " << args.variants << " seeds";
  for (auto s : seeds) header << ' ' << s;
  header << '\n';
  log.write(header.str());

  std::ofstream merged(out_dir / "compare.csv");
  merged << "variant,seed," << EpochMetrics::csv_header() << '\n';
  std::ofstream summary(out_dir / "summary.csv");
  summary << "variant,seed,final_val_bleu4," << EvalReport::csv_header() << '\n';
  for (std::uint64_t seed : seeds) {
    for (ModelVariant v : variants) {
      HacaConfig model = rc.model;
      model.variant = v;
      model.seed = seed;
      model.validate();
      const std::string name(variant_name(v));
      const std::string stem = seeds.size() == 1 ? name : name + ".seed" + std::to_string(seed);
      log.write("# " + stem + "\n");
      Trainer trainer(model, rc.train);
      auto history = run_training(trainer, train, val, {out_dir / (stem + ".csv"), std::nullopt}, log, false);
      for (const auto& m : history) merged << name << ',' << seed << ',' << m.csv_row() << '\n';
      EvalReport r = evaluate(trainer.model(), val.samples, beam_options(rc, rc.train.val_beam_size, 1));
      summary << name << ',' << seed << ',' << history.back().val_bleu4 << ',' << r.csv_row() << '\n';
      std::printf("%-14s seed %-4llu final val BLEU-4 %.4f  audio-word %.3f  event-word %.3f\n", name.c_str(),
                  static_cast<unsigned long long>(seed), history.back().val_bleu4, r.audio_word_accuracy,
                  r.event_word_accuracy);
      std::fflush(stdout);
    }
  }
  return kExitOk;
}

struct DescribeArgs {
  std::string config, variant;
  std::vector<std::string> extras;
};

int cmd_describe(const DescribeArgs& args) {
  ConfigMap overrides = parse_overrides(args.extras);
  if (!args.variant.empty()) overrides["variant"] = args.variant;
  LoadedConfig config = load_config(args.config, overrides);
  HacaConfig& m = config.run.model;
  if (m.vocab_size == 0) m.vocab_size = 12;
  if (m.visual.input_dim == 0) m.visual.input_dim = 8;
  if (m.audio.input_dim == 0) m.audio.input_dim = 4;
  std::cout << Model::build(m).describe();
  return kExitOk;
}

// Runs `body`, mapping exceptions onto exit codes.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    std::cerr << "haca: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "haca: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "haca: invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "haca: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HACA cross-modal captioning engine"};
  app.require_subcommand(1);
  int status = kExitOk;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic multimodal captioning dataset");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--samples", synth.spec.train_samples, "Training samples");
  s->add_option("--val-samples", synth.spec.val_samples, "Validation samples");
  s->add_option("--test-samples", synth.spec.test_samples, "Test samples");
  s->add_option("--events", synth.spec.events, "Event classes (visual)");
  s->add_option("--modifiers", synth.spec.modifiers, "Modifier classes (audio)");
  s->add_option("--visual-dim", synth.spec.visual_dim, "Visual feature dimension");
  s->add_option("--audio-dim", synth.spec.audio_dim, "Audio feature dimension");
  s->add_option("--sigma", synth.spec.sigma, "Feature noise standard deviation");
  s->add_option("--seed", synth.spec.seed, "Random seed");
  s->add_flag("--force", synth.force, "Overwrite a non-empty output directory");
  s->callback([&] { status = guarded([&] { return cmd_synth(synth); }); });

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model; extra --key value pairs override the config");
  t->add_option("--config", train.config, "key = value config file");
  t->add_option("--variant", train.variant, "att_v, cm_att_va, cm_att_vad, haca_no_align or haca");
  t->add_option("--resume", train.resume, "Continue from a checkpoint");
  t->add_option("--out", train.out, "Output directory");
  t->add_option("--train", train.train, "Training manifest");
  t->add_option("--val", train.val, "Validation manifest");
  t->add_flag("--force", train.force, "Overwrite a non-empty output directory");
  t->allow_extras();
  t->callback([&] {
    train.extras = t->remaining();
    status = guarded([&] { return cmd_train(train); });
  });

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Decode a split and report BLEU-4 and word accuracies");
  e->add_option("--config", eval.config, "key = value config file");
  e->add_option("--checkpoint", eval.checkpoint, "Model checkpoint")->required();
  e->add_option("--data", eval.data, "Manifest to evaluate (default test_manifest)");
  e->add_option("--beam", eval.beam, "Beam size (default beam_size)");
  e->add_option("--dump", eval.dump, "Write decoded captions here");
  e->add_option("--csv", eval.csv, "Write the report as CSV here");
  e->allow_extras();
  e->callback([&] {
    eval.extras = e->remaining();
    status = guarded([&] { return cmd_eval(eval); });
  });

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Caption every sample of a manifest");
  g->add_option("--config", gen.config, "key = value config file");
  g->add_option("--checkpoint", gen.checkpoint, "Model checkpoint")->required();
  g->add_option("--data", gen.data, "Input manifest (default test_manifest)");
  g->add_option("--beam", gen.beam, "Beam size (default beam_size)");
  g->add_option("--nbest", gen.nbest, "Hypotheses per sample");
  g->add_option("--out", gen.out, "Output file (default stdout)");
  g->add_option("--trace", gen.trace, "Directory for per-sample attention weight CSVs");
  g->allow_extras();
  g->callback([&] {
    gen.extras = g->remaining();
    status = guarded([&] { return cmd_generate(gen); });
  });

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Compare autodiff gradients with central differences");
  c->add_option("--variant", gc.variant, "Model variant");
  c->add_flag("--all-variants", gc.all, "Check every variant");
  c->add_option("--tolerance", gc.tolerance, "Maximum relative error");
  c->add_option("--step", gc.step, "Central-difference step");
  c->add_option("--arithmetic", gc.arithmetic, "extended or binary64 differences");
  c->add_option("--vocab", gc.vocab, "Vocabulary size");
  c->add_option("--samples", gc.samples, "Batch size");
  c->add_option("--steps", gc.steps, "Decode steps (target length)");
  c->add_option("--visual-length", gc.visual_length, "Visual frames");
  c->add_option("--audio-length", gc.audio_length, "Audio frames");
  c->add_option("--init-range", gc.init_range, "Uniform initialization range");
  c->add_option("--seed", gc.seed, "Random seed");
  c->callback([&] { status = guarded([&] { return cmd_gradcheck(gc); }); });

  CompareArgs cmp;
  auto* m = app.add_subcommand("compare", "Train several variants on the same data and seed");
  m->add_option("--config", cmp.config, "key = value config file");
  m->add_option("--variants", cmp.variants, "Comma-separated variants (default all)");
  m->add_option("--seeds", cmp.seeds, "Seeds, one run per seed and variant")->delimiter(',');
  m->add_option("--out", cmp.out, "Output directory");
  m->add_option("--train", cmp.train, "Training manifest");
  m->add_option("--val", cmp.val, "Validation manifest");
  m->add_flag("--force", cmp.force, "Overwrite a non-empty output directory");
  m->allow_extras();
  m->callback([&] {
    cmp.extras = m->remaining();
    status = guarded([&] { return cmd_compare(cmp); });
  });

  DescribeArgs desc;
  auto* d = app.add_subcommand("describe", "Print the parameter table");
  d->add_option("--config", desc.config, "key = value config file");
  d->add_option("--variant", desc.variant, "Model variant");
  d->allow_extras();
  d->callback([&] {
    desc.extras = d->remaining();
    status = guarded([&] { return cmd_describe(desc); });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  return status;
}
