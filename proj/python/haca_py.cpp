// Copyright 2026 The haca Authors. Apache 2.0 License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

#include "haca/dataset.hpp"
#include "haca/evaluation.hpp"
#include "haca/inference.hpp"
#include "haca/model_gradcheck.hpp"
#include "haca/run_config.hpp"
#include "haca/synth.hpp"
#include "haca/training.hpp"

namespace py = pybind11;
using namespace haca;

namespace {

std::string to_config_value(const py::handle& value) {
  if (py::isinstance<py::bool_>(value)) return value.cast<bool>() ? "true" : "false";
  if (py::isinstance<py::float_>(value)) return format_real(value.cast<double>());
  return py::str(value).cast<std::string>();
}

ConfigMap to_config_map(const py::dict& values) {
  ConfigMap out;
  for (const auto& [k, v] : values) out[k.cast<std::string>()] = to_config_value(v);
  return out;
}

RunConfig run_config(const py::dict& values) {
  RunConfig c;
  c.apply(to_config_map(values));
  return c;
}

HacaConfig model_config(const py::dict& values) {
  HacaConfig c = run_config(values).model;
  c.validate();
  return c;
}

py::array_t<double> stream_array(const ModalityStream& s) {
  py::array_t<double> a({s.length, s.dim});
  std::copy(s.values.begin(), s.values.end(), a.mutable_data());
  return a;
}

ModalityStream stream_from(const std::string& name, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("stream '" + name + "' must be a 2-d array (frames x dim)");
  const auto length = static_cast<std::size_t>(a.shape(0));
  const auto dim = static_cast<std::size_t>(a.shape(1));
  return ModalityStream(name, length, dim, std::vector<double>(a.data(), a.data() + length * dim));
}

py::dict metrics_dict(const EpochMetrics& m) {
  py::dict d;
  d["epoch"] = m.epoch;
  d["train_loss"] = m.train_loss;
  d["val_loss"] = m.val_loss;
  d["val_bleu4"] = m.val_bleu4;
  d["lr"] = m.lr;
  d["teacher_forcing_prob"] = m.teacher_forcing_prob;
  return d;
}

py::dict bleu_dict(const BleuReport& r) {
  py::dict d;
  d["bleu"] = r.bleu;
  d["precisions"] = std::vector<double>(r.precisions.begin(), r.precisions.end());
  d["brevity_penalty"] = r.brevity_penalty;
  d["hypothesis_length"] = r.hypothesis_length;
  d["reference_length"] = r.reference_length;
  return d;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["samples"] = r.samples;
  d["bleu4"] = r.bleu.bleu;
  d["bleu"] = bleu_dict(r.bleu);
  d["token_accuracy"] = r.token_accuracy;
  d["audio_word_accuracy"] = r.audio_word_accuracy;
  d["event_word_accuracy"] = r.event_word_accuracy;
  return d;
}

BeamOptions beam_options(std::size_t beam_size, std::size_t max_steps, std::size_t nbest, bool length_normalize) {
  BeamOptions o;
  o.beam_size = beam_size;
  o.max_steps = max_steps;
  o.nbest = nbest;
  o.length_normalize = length_normalize;
  return o;
}

}  // namespace

PYBIND11_MODULE(_haca, m) {
  m.doc() = "Hierarchically aligned cross-modal attention captioning engine";

  m.attr("PAD") = kPad;
  m.attr("BOS") = kBos;
  m.attr("EOS") = kEos;
  m.attr("UNK") = kUnk;
  m.attr("VARIANTS") = [] {
    std::vector<std::string> names;
    for (auto v : all_variants()) names.emplace_back(variant_name(v));
    return names;
  }();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_IOError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def(
      "config", [](const py::dict& overrides) { return run_config(overrides).to_map(); }, py::arg("overrides") = py::dict(),
      "Every run setting with `overrides` applied; unknown keys raise ConfigError.");
  m.def(
      "micro_config",
      [](const std::string& variant, std::size_t vocab_size, std::size_t visual_dim, std::size_t audio_dim) {
        return haca::to_config_map(micro_config(parse_variant(variant), vocab_size, visual_dim, audio_dim));
      },
      py::arg("variant"), py::arg("vocab_size"), py::arg("visual_dim") = 8, py::arg("audio_dim") = 4);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def("add", &Vocabulary::add)
      .def("find", &Vocabulary::find)
      .def("token", &Vocabulary::token)
      .def("encode", &Vocabulary::encode, py::arg("caption"), py::arg("allow_unknown") = false)
      .def("decode", [](const Vocabulary& v, const std::vector<int>& ids) { return v.decode(ids); })
      .def("__len__", &Vocabulary::size)
      .def("save", &Vocabulary::save)
      .def_static("load", &Vocabulary::load);

  py::class_<Sample>(m, "Sample")
      .def(py::init([](std::string id, const py::dict& streams, std::vector<std::vector<int>> references) {
             Sample s;
             s.id = std::move(id);
             for (const auto& [name, array] : streams) {
               s.streams.push_back(stream_from(name.cast<std::string>(),
                                               array.cast<py::array_t<double, py::array::c_style | py::array::forcecast>>()));
             }
             s.references = std::move(references);
             return s;
           }),
           py::arg("id"), py::arg("streams"), py::arg("references") = std::vector<std::vector<int>>{})
      .def_readwrite("id", &Sample::id)
      .def_readwrite("references", &Sample::references)
      .def_property_readonly("modalities",
                             [](const Sample& s) {
                               std::vector<std::string> names;
                               for (const auto& st : s.streams) names.push_back(st.name);
                               return names;
                             })
      .def("stream", [](const Sample& s, const std::string& name) { return stream_array(s.stream(name)); })
      .def("__repr__", [](const Sample& s) { return "<haca.Sample '" + s.id + "'>"; });

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("train_samples", &SynthSpec::train_samples)
      .def_readwrite("val_samples", &SynthSpec::val_samples)
      .def_readwrite("test_samples", &SynthSpec::test_samples)
      .def_readwrite("events", &SynthSpec::events)
      .def_readwrite("modifiers", &SynthSpec::modifiers)
      .def_readwrite("visual_dim", &SynthSpec::visual_dim)
      .def_readwrite("audio_dim", &SynthSpec::audio_dim)
      .def_readwrite("sigma", &SynthSpec::sigma)
      .def_readwrite("min_events", &SynthSpec::min_events)
      .def_readwrite("max_events", &SynthSpec::max_events)
      .def_readwrite("seed", &SynthSpec::seed);

  py::class_<SynthDataset>(m, "SynthDataset")
      .def_readonly("vocab", &SynthDataset::vocab)
      .def_property_readonly("train", [](const SynthDataset& d) { return d.train.samples; })
      .def_property_readonly("val", [](const SynthDataset& d) { return d.val.samples; })
      .def_property_readonly("test", [](const SynthDataset& d) { return d.test.samples; })
      .def("write", [](const SynthDataset& d, const std::filesystem::path& dir) { write_synth_dataset(dir, d); });
  m.def("synth_dataset", &synth_dataset, py::arg("spec") = SynthSpec{});

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("vocab", &Dataset::vocab)
      .def_readonly("samples", &Dataset::samples);
  m.def("load_dataset", &load_dataset, py::arg("manifest"));

  py::class_<Model, std::unique_ptr<Model>>(m, "Model")
      .def(py::init([](const py::dict& config) { return std::make_unique<Model>(Model::build(model_config(config))); }),
           py::arg("config"))
      .def_static(
          "load", [](const std::filesystem::path& path) { return std::make_unique<Model>(model_from_checkpoint(load_checkpoint(path))); })
      .def("save", [](const Model& model, const std::filesystem::path& path) { save_checkpoint(path, model_checkpoint(model)); })
      .def_property_readonly("config", [](const Model& model) { return haca::to_config_map(model.config()); })
      .def_property_readonly("parameter_count", [](const Model& model) { return model.parameters().scalar_count(); })
      .def("parameter_names",
           [](const Model& model) {
             std::vector<std::string> names;
             for (const auto& e : model.parameters().entries()) names.push_back(e.name);
             return names;
           })
      .def("parameter",
           [](const Model& model, const std::string& name) {
             const Tensor& t = model.parameters().find(name);
             std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
             py::array_t<double> a(shape);
             auto v = t.values();
             std::copy(v.begin(), v.end(), a.mutable_data());
             return a;
           })
      .def("describe", &Model::describe)
      .def("loss", [](const Model& model, const std::vector<Sample>& batch) {
        NoRecordScope unrecorded;
        return batch_loss(model, batch).item();
      })
      .def("greedy", &greedy_decode, py::arg("sample"), py::arg("max_steps") = 16)
      .def(
          "beam_search",
          [](const Model& model, const Sample& sample, std::size_t beam_size, std::size_t max_steps, std::size_t nbest,
             bool length_normalize) {
            BeamResult r = beam_search(model, sample, beam_options(beam_size, max_steps, nbest, length_normalize));
            py::list out;
            for (const auto& h : r.hypotheses) out.append(py::make_tuple(h.tokens, h.score, h.finished));
            return out;
          },
          py::arg("sample"), py::arg("beam_size") = 5, py::arg("max_steps") = 16, py::arg("nbest") = 1,
          py::arg("length_normalize") = false)
      .def(
          "log_prob",
          [](const Model& model, const Sample& sample, const std::vector<int>& tokens) {
            return sequence_log_prob(model, sample, tokens);
          },
          py::arg("sample"), py::arg("tokens"))
      .def(
          "trace",
          [](const Model& model, const Sample& sample, const std::vector<int>& tokens) {
            return trace_attention(model, sample, tokens).steps;
          },
          py::arg("sample"), py::arg("tokens"))
      .def(
          "token_accuracy", [](const Model& model, const std::vector<Sample>& samples) { return token_accuracy(model, samples); })
      .def(
          "evaluate",
          [](const Model& model, const std::vector<Sample>& samples, std::size_t beam_size, std::size_t max_steps) {
            return report_dict(evaluate(model, samples, beam_options(beam_size, max_steps, 1, false)));
          },
          py::arg("samples"), py::arg("beam_size") = 5, py::arg("max_steps") = 16);

  py::class_<Trainer, std::unique_ptr<Trainer>>(m, "Trainer")
      .def(py::init([](const py::dict& config) {
             RunConfig rc = run_config(config);
             rc.model.validate();
             return std::make_unique<Trainer>(rc.model, rc.train);
           }),
           py::arg("config"))
      .def_static(
          "resume",
          [](const std::filesystem::path& path, const py::dict& config) {
            return std::make_unique<Trainer>(load_checkpoint(path), run_config(config).train);
          },
          py::arg("checkpoint"), py::arg("config") = py::dict())
      .def(
          "run_epoch",
          [](Trainer& t, const std::vector<Sample>& train, const std::vector<Sample>& val) {
            return metrics_dict(t.run_epoch(train, val));
          },
          py::arg("train"), py::arg("val") = std::vector<Sample>{})
      .def(
          "train",
          [](Trainer& t, const std::vector<Sample>& train, const std::vector<Sample>& val) {
            py::list out;
            for (const auto& e : t.train(train, val)) out.append(metrics_dict(e));
            return out;
          },
          py::arg("train"), py::arg("val") = std::vector<Sample>{})
      .def_property_readonly("model", py::overload_cast<>(&Trainer::model), py::return_value_policy::reference_internal)
      .def_property_readonly("epoch", &Trainer::epoch)
      .def_property_readonly("lr", &Trainer::lr)
      .def("save", [](const Trainer& t, const std::filesystem::path& path) { save_checkpoint(path, t.checkpoint()); });

  m.def(
      "bleu4",
      [](const std::vector<std::string>& hypotheses, const std::vector<std::vector<std::string>>& references) {
        return bleu_dict(bleu4(hypotheses, references));
      },
      py::arg("hypotheses"), py::arg("references"), "Corpus BLEU-4 over whitespace-tokenized strings.");

  m.def(
      "gradcheck",
      [](const std::string& variant, const std::string& arithmetic, double step, double tolerance, std::size_t vocab_size,
         std::uint64_t seed) {
        HacaConfig c = micro_config(parse_variant(variant), vocab_size);
        c.seed = seed;
        c.init_range = 0.5;
        c.max_decode_steps = 3;
        Model model = Model::build(c);
        auto batch = random_batch(c, 2, 7, 5, 3, seed + 1000);
        DifferenceArithmetic a = arithmetic == "binary64" ? DifferenceArithmetic::kBinary64 : DifferenceArithmetic::kExtended;
        if (arithmetic != "binary64" && arithmetic != "extended") {
          throw std::invalid_argument("arithmetic must be 'extended' or 'binary64'");
        }
        GradCheckReport r = model_gradient_check(model, batch, a, step, tolerance);
        py::dict errors;
        for (const auto& e : r.entries) errors[py::str(e.name)] = static_cast<double>(e.max_rel_error);
        py::dict d;
        d["passed"] = r.passed();
        d["max_rel_error"] = static_cast<double>(r.max_rel_error());
        d["errors"] = errors;
        return d;
      },
      py::arg("variant") = "haca", py::arg("arithmetic") = "extended", py::arg("step") = 1e-5,
      py::arg("tolerance") = 1e-4, py::arg("vocab_size") = 12, py::arg("seed") = 1);
}
