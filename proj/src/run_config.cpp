// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace haca {

namespace {

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename Owner>
Field size_field(std::string key, Owner RunConfig::*owner, std::size_t Owner::*member) {
  return {key, [=](const RunConfig& c) { return std::to_string(c.*owner.*member); },
          [=](RunConfig& c, std::string_view v) { c.*owner.*member = parse_size(key, v); }};
}

template <typename Owner>
Field real_field(std::string key, Owner RunConfig::*owner, double Owner::*member) {
  return {key, [=](const RunConfig& c) { return format_real(c.*owner.*member); },
          [=](RunConfig& c, std::string_view v) { c.*owner.*member = parse_real(key, v); }};
}

template <typename Owner>
Field bool_field(std::string key, Owner RunConfig::*owner, bool Owner::*member) {
  return {key, [=](const RunConfig& c) { return std::string(c.*owner.*member ? "true" : "false"); },
          [=](RunConfig& c, std::string_view v) { c.*owner.*member = parse_bool(key, v); }};
}

Field path_field(std::string key, std::string RunConfig::*member) {
  return {key, [=](const RunConfig& c) { return c.*member; },
          [=](RunConfig& c, std::string_view v) { c.*member = std::string(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using T = TrainConfig;
    std::vector<Field> f;
    f.push_back(size_field("batch_size", &RunConfig::train, &T::batch_size));
    f.push_back(size_field("max_epochs", &RunConfig::train, &T::max_epochs));
    f.push_back(real_field("learning_rate", &RunConfig::train, &T::learning_rate));
    f.push_back(real_field("plateau_factor", &RunConfig::train, &T::plateau_factor));
    f.push_back(size_field("plateau_patience", &RunConfig::train, &T::plateau_patience));
    f.push_back(real_field("clip", &RunConfig::train, &T::clip));
    f.push_back({"ss_start", [](const RunConfig& c) { return format_real(c.train.schedule.start); },
                 [](RunConfig& c, std::string_view v) { c.train.schedule.start = parse_real("ss_start", v); }});
    f.push_back({"ss_end", [](const RunConfig& c) { return format_real(c.train.schedule.end); },
                 [](RunConfig& c, std::string_view v) { c.train.schedule.end = parse_real("ss_end", v); }});
    f.push_back({"ss_decay_epochs", [](const RunConfig& c) { return std::to_string(c.train.schedule.decay_epochs); },
                 [](RunConfig& c, std::string_view v) {
                   c.train.schedule.decay_epochs = parse_size("ss_decay_epochs", v);
                 }});
    f.push_back(real_field("adadelta_rho", &RunConfig::train, &T::adadelta_rho));
    f.push_back(real_field("adadelta_epsilon", &RunConfig::train, &T::adadelta_epsilon));
    f.push_back(bool_field("shuffle", &RunConfig::train, &T::shuffle));
    f.push_back(size_field("val_beam_size", &RunConfig::train, &T::val_beam_size));
    f.push_back(size_field("beam_size", &RunConfig::decode, &DecodeConfig::beam_size));
    f.push_back(bool_field("length_normalize", &RunConfig::decode, &DecodeConfig::length_normalize));
    f.push_back(path_field("train_manifest", &RunConfig::train_manifest));
    f.push_back(path_field("val_manifest", &RunConfig::val_manifest));
    f.push_back(path_field("test_manifest", &RunConfig::test_manifest));
    f.push_back(path_field("out_dir", &RunConfig::out_dir));
    return f;
  }();
  return table;
}

}  // namespace

double SamplingSchedule::at(std::size_t epoch, std::size_t max_epochs) const {
  if (epoch <= 1) return start;
  const std::size_t span = decay_epochs ? decay_epochs : max_epochs;
  if (span <= 1) return end;
  const double frac = std::min(1.0, static_cast<double>(epoch - 1) / static_cast<double>(span - 1));
  return start + (end - start) * frac;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("train config: " + m); };
  if (batch_size == 0) fail("batch_size must be positive");
  if (max_epochs == 0) fail("max_epochs must be positive");
  if (!(learning_rate > 0)) fail("learning_rate must be positive");
  if (!(plateau_factor > 0 && plateau_factor <= 1)) fail("plateau_factor must lie in (0, 1]");
  if (plateau_patience == 0) fail("plateau_patience must be at least 1");
  if (!(clip > 0)) fail("clip must be positive");
  for (double p : {schedule.start, schedule.end}) {
    if (!(p >= 0 && p <= 1)) fail("teacher-forcing probabilities must lie in [0, 1]");
  }
  if (!(adadelta_rho > 0 && adadelta_rho < 1)) fail("adadelta_rho must lie in (0, 1)");
  if (!(adadelta_epsilon > 0)) fail("adadelta_epsilon must be positive");
  if (val_beam_size == 0) fail("val_beam_size must be positive");
}

ConfigMap RunConfig::to_map() const {
  ConfigMap out = to_config_map(model);
  for (const auto& f : fields()) out[f.key] = f.get(*this);
  return out;
}

void RunConfig::apply(const ConfigMap& values) {
  std::vector<std::string> unknown;
  for (const auto& key : apply_config_map(model, values)) {
    bool found = false;
    for (const auto& f : fields()) {
      if (f.key == key) {
        f.set(*this, values.at(key));
        found = true;
        break;
      }
    }
    if (!found) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config key(s): " + list);
  }
}

RunConfig load_run_config(const std::filesystem::path& path, const ConfigMap& overrides) {
  RunConfig config;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::stringstream text;
    text << in.rdbuf();
    config.apply(parse_config_text(text.str(), path.string()));
  }
  config.apply(overrides);
  return config;
}

}  // namespace haca
