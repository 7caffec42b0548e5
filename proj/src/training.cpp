// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "haca/evaluation.hpp"

namespace haca::inline HACA_PRECISION_NS {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::size_t> shape_of(const Tensor& t) { return {t.shape().begin(), t.shape().end()}; }

int argmax_generatable(const Tensor& log_probs) {
  auto lp = log_probs.values();
  int best = -1;
  for (int w = 0; w < static_cast<int>(lp.size()); ++w) {
    if (is_generatable(w) && (best < 0 || lp[w] > lp[best])) best = w;
  }
  return best;
}

}  // namespace

double cross_entropy_loss(std::span<const std::vector<double>> distributions, std::span<const int> targets) {
  if (targets.empty()) throw std::invalid_argument("cross_entropy_loss: empty target sequence");
  if (distributions.size() != targets.size()) {
    throw std::invalid_argument("cross_entropy_loss: " + std::to_string(distributions.size()) + " distributions for " +
                                std::to_string(targets.size()) + " targets");
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= distributions[t].size()) {
      throw std::out_of_range("cross_entropy_loss: target " + std::to_string(targets[t]) + " at step " +
                              std::to_string(t + 1) + " outside vocabulary of " +
                              std::to_string(distributions[t].size()));
    }
    loss -= std::log(distributions[t][static_cast<std::size_t>(targets[t])]);
  }
  return loss;
}

void clip_gradients(std::span<real> grads, real lo, real hi) {
  for (real& g : grads) g = std::clamp(g, lo, hi);
}

bool scheduled_sample(double teacher_forcing_prob, std::mt19937_64& rng) {
  if (teacher_forcing_prob >= 1.0) return true;
  if (teacher_forcing_prob <= 0.0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < teacher_forcing_prob;
}

// ---------------------------------------------------------------------------

Adadelta::Adadelta(const ParameterStore& params, double rho, double epsilon) : rho_(rho), epsilon_(epsilon) {
  for (const auto& e : params.entries()) {
    sq_grad_.emplace_back(e.tensor.size(), 0.0);
    sq_update_.emplace_back(e.tensor.size(), 0.0);
  }
}

void Adadelta::step(ParameterStore& params, double lr) {
  auto& entries = params.entries();
  if (entries.size() != sq_grad_.size()) throw std::logic_error("adadelta: parameter set changed");
  for (const auto& e : entries) {
    if (!e.tensor.has_grad()) continue;
    for (real g : e.tensor.grad()) {
      if (!std::isfinite(g)) throw TrainingError("adadelta: non-finite gradient in '" + e.name + "'");
    }
  }
  for (std::size_t p = 0; p < entries.size(); ++p) {
    Tensor& t = entries[p].tensor;
    if (!t.has_grad()) continue;
    auto g = t.mutable_grad();
    auto x = t.mutable_values();
    auto& eg = sq_grad_[p];
    auto& ed = sq_update_[p];
    for (std::size_t i = 0; i < x.size(); ++i) {
      eg[i] = rho_ * eg[i] + (1 - rho_) * g[i] * g[i];
      const real dx = -(std::sqrt(ed[i] + epsilon_) / std::sqrt(eg[i] + epsilon_)) * g[i];
      ed[i] = rho_ * ed[i] + (1 - rho_) * dx * dx;
      x[i] += lr * dx;
    }
  }
}

std::vector<NamedArray> Adadelta::export_state(const ParameterStore& params) const {
  std::vector<NamedArray> out;
  const auto& entries = params.entries();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    const auto shape = shape_of(entries[p].tensor);
    out.push_back({"sq_grad/" + entries[p].name, shape, {sq_grad_[p].begin(), sq_grad_[p].end()}});
    out.push_back({"sq_update/" + entries[p].name, shape, {sq_update_[p].begin(), sq_update_[p].end()}});
  }
  return out;
}

void Adadelta::import_state(const ParameterStore& params, std::span<const NamedArray> arrays) {
  const auto& entries = params.entries();
  if (arrays.size() != 2 * entries.size()) {
    throw CheckpointError("optimizer state has " + std::to_string(arrays.size()) + " arrays, expected " +
                          std::to_string(2 * entries.size()));
  }
  for (std::size_t p = 0; p < entries.size(); ++p) {
    const NamedArray& g = arrays[2 * p];
    const NamedArray& u = arrays[2 * p + 1];
    if (g.name != "sq_grad/" + entries[p].name || u.name != "sq_update/" + entries[p].name ||
        g.values.size() != entries[p].tensor.size() || u.values.size() != entries[p].tensor.size()) {
      throw CheckpointError("optimizer state does not match parameter '" + entries[p].name + "'");
    }
    sq_grad_[p].assign(g.values.begin(), g.values.end());
    sq_update_[p].assign(u.values.begin(), u.values.end());
  }
}

// ---------------------------------------------------------------------------

PlateauScheduler::PlateauScheduler(double lr, std::size_t patience, double factor)
    : lr_(lr), patience_(patience), factor_(factor) {
  if (patience == 0) throw std::invalid_argument("plateau: patience must be at least 1");
}

bool PlateauScheduler::observe(double score) {
  if (!has_best_ || score > best_) {
    best_ = score;
    has_best_ = true;
    bad_epochs_ = 0;
    return false;
  }
  if (++bad_epochs_ < patience_) return false;
  lr_ *= factor_;
  bad_epochs_ = 0;
  return true;
}

void PlateauScheduler::restore(double lr, double best, bool has_best, std::size_t bad_epochs) {
  lr_ = lr;
  best_ = best;
  has_best_ = has_best;
  bad_epochs_ = bad_epochs;
}

double lr_plateau(std::span<const double> history, double lr, std::size_t patience, double factor) {
  if (history.empty()) throw std::invalid_argument("lr_plateau: empty history");
  PlateauScheduler s(lr, patience, factor);
  for (double score : history) s.observe(score);
  return s.lr();
}

std::string EpochMetrics::csv_header() { return "epoch,train_loss,val_loss,val_bleu4,lr,teacher_forcing_prob"; }

std::string EpochMetrics::csv_row() const {
  return std::to_string(epoch) + "," + fmt(train_loss) + "," + fmt(val_loss) + "," + fmt(val_bleu4) + "," + fmt(lr) +
         "," + fmt(teacher_forcing_prob);
}

// ---------------------------------------------------------------------------

Checkpoint model_checkpoint(const Model& model) {
  Checkpoint c;
  c.config = to_config_map(model.config());
  for (const auto& e : model.parameters().entries()) {
    auto v = e.tensor.values();
    c.parameters.push_back({e.name, shape_of(e.tensor), {v.begin(), v.end()}});
  }
  return c;
}

void load_parameters(ParameterStore& params, std::span<const NamedArray> arrays) {
  auto& entries = params.entries();
  if (arrays.size() != entries.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(arrays.size()) + " parameters, model has " +
                          std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    if (arrays[i].name != entries[i].name) {
      throw CheckpointError("checkpoint parameter " + std::to_string(i) + " is '" + arrays[i].name +
                            "', model expects '" + entries[i].name + "'");
    }
    if (arrays[i].shape != shape_of(entries[i].tensor)) {
      throw CheckpointError("checkpoint parameter '" + arrays[i].name + "' has shape " +
                            shape_string({arrays[i].shape.begin(), arrays[i].shape.end()}) + ", model expects " +
                            shape_string(entries[i].tensor.shape()));
    }
  }
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    auto dst = entries[i].tensor.mutable_values();
    std::copy(arrays[i].values.begin(), arrays[i].values.end(), dst.begin());
  }
}

Model model_from_checkpoint(const Checkpoint& checkpoint) {
  HacaConfig config;
  const auto unknown = apply_config_map(config, checkpoint.config);
  if (!unknown.empty()) throw CheckpointError("checkpoint config has unknown key '" + unknown.front() + "'");
  Model model = Model::build(config);
  load_parameters(model.parameters(), checkpoint.parameters);
  return model;
}

// ---------------------------------------------------------------------------

Trainer::Trainer(const HacaConfig& model_config, const TrainConfig& config)
    : config_(config),
      rng_(model_config.seed),
      model_(Model::build(model_config, rng_)),
      optimizer_(model_.parameters(), config.adadelta_rho, config.adadelta_epsilon),
      scheduler_(config.learning_rate, config.plateau_patience, config.plateau_factor) {
  config_.validate();
}

Trainer::Trainer(const Checkpoint& checkpoint, const TrainConfig& config)
    : config_(config),
      model_(model_from_checkpoint(checkpoint)),
      optimizer_(model_.parameters(), config.adadelta_rho, config.adadelta_epsilon),
      scheduler_(config.learning_rate, config.plateau_patience, config.plateau_factor) {
  config_.validate();
  optimizer_.import_state(model_.parameters(), checkpoint.optimizer);
  std::istringstream rng_text(checkpoint.rng_state);
  rng_text >> rng_;
  if (!rng_text) throw CheckpointError("checkpoint: unreadable generator state");
  try {
    const auto& s = checkpoint.train_state;
    epoch_ = parse_size("epoch", s.at("epoch"));
    scheduler_.restore(parse_real("lr", s.at("lr")), parse_real("best_score", s.at("best_score")),
                       parse_bool("has_best", s.at("has_best")), parse_size("bad_epochs", s.at("bad_epochs")));
  } catch (const std::out_of_range&) {
    throw CheckpointError("checkpoint: incomplete train_state section");
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c = model_checkpoint(model_);
  c.optimizer = optimizer_.export_state(model_.parameters());
  std::ostringstream rng_text;
  rng_text << rng_;
  c.rng_state = rng_text.str();
  c.train_state["epoch"] = std::to_string(epoch_);
  c.train_state["lr"] = fmt(scheduler_.lr());
  c.train_state["best_score"] = fmt(scheduler_.best());
  c.train_state["has_best"] = scheduler_.has_best() ? "true" : "false";
  c.train_state["bad_epochs"] = std::to_string(scheduler_.bad_epochs());
  return c;
}

double Trainer::train_batch(std::span<const Sample* const> batch, double teacher_forcing_prob) {
  std::size_t tokens = 0;
  for (const Sample* s : batch) {
    if (s->references.empty()) throw TrainingError("sample '" + s->id + "' has no reference caption");
    tokens += s->references.front().size();
  }
  ForwardOptions options;
  options.dropout = {model_.config().dropout, &rng_};
  if (teacher_forcing_prob < 1.0) {
    options.input_policy = [this, teacher_forcing_prob](std::size_t, int gold_prev, const Tensor& prev_log_probs) {
      return scheduled_sample(teacher_forcing_prob, rng_) ? gold_prev : argmax_generatable(prev_log_probs);
    };
  }
  model_.parameters().zero_grad();
  const real scale = real(1) / static_cast<real>(tokens);
  double total = 0.0;
  for (const Sample* s : batch) {
    ComputationRecord record;
    RecordScope scope(record);
    Tensor nll = sequence_nll(model_, *s, s->references.front(), options);
    if (!std::isfinite(nll.item())) throw TrainingError("non-finite loss on sample '" + s->id + "'");
    total += nll.item();
    record.backward(ops::scale(nll, scale));
  }
  for (auto& e : model_.parameters().entries()) {
    if (e.tensor.has_grad()) clip_gradients(e.tensor.mutable_grad(), -config_.clip, config_.clip);
  }
  optimizer_.step(model_.parameters(), scheduler_.lr());
  return total / static_cast<double>(tokens);
}

EpochMetrics Trainer::run_epoch(std::span<const Sample> train, std::span<const Sample> val) {
  if (train.empty()) throw TrainingError("training set is empty");
  EpochMetrics m;
  m.epoch = ++epoch_;
  m.lr = scheduler_.lr();
  m.teacher_forcing_prob = config_.schedule.at(epoch_, config_.max_epochs);

  last_order_.resize(train.size());
  std::iota(last_order_.begin(), last_order_.end(), std::size_t{0});
  if (config_.shuffle) std::shuffle(last_order_.begin(), last_order_.end(), rng_);

  double nll = 0.0;
  std::size_t tokens = 0;
  std::vector<const Sample*> batch;
  for (std::size_t start = 0, index = 1; start < train.size(); start += config_.batch_size, ++index) {
    batch.clear();
    std::size_t batch_tokens = 0;
    for (std::size_t i = start; i < std::min(train.size(), start + config_.batch_size); ++i) {
      batch.push_back(&train[last_order_[i]]);
      batch_tokens += batch.back()->references.empty() ? 0 : batch.back()->references.front().size();
    }
    try {
      nll += train_batch(batch, m.teacher_forcing_prob) * static_cast<double>(batch_tokens);
    } catch (const TrainingError& e) {
      throw TrainingError("epoch " + std::to_string(epoch_) + ", batch " + std::to_string(index) + " (first sample '" +
                          batch.front()->id + "'): " + e.what());
    }
    tokens += batch_tokens;
  }
  m.train_loss = nll / static_cast<double>(tokens);

  if (val.empty()) {
    m.val_loss = m.val_bleu4 = std::nan("");
  } else {
    m.val_loss = teacher_forced_stats(model_, val).mean_loss();
    BeamOptions beam;
    beam.beam_size = config_.val_beam_size;
    beam.max_steps = model_.config().max_decode_steps;
    m.val_bleu4 = bleu4(decode_all(model_, val, beam), reference_lists(val)).bleu;
    scheduler_.observe(m.val_bleu4);
  }
  return m;
}

std::vector<EpochMetrics> Trainer::train(std::span<const Sample> train, std::span<const Sample> val,
                                         const std::function<bool(const EpochMetrics&)>& on_epoch) {
  std::vector<EpochMetrics> history;
  while (epoch_ < config_.max_epochs) {
    history.push_back(run_epoch(train, val));
    if (on_epoch && !on_epoch(history.back())) break;
  }
  return history;
}

}  // namespace haca
