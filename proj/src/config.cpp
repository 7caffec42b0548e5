// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

namespace haca {

namespace {

struct VariantInfo {
  ModelVariant variant;
  std::string_view name;
};

constexpr VariantInfo kVariants[] = {
    {ModelVariant::kAttV, "att_v"},
    {ModelVariant::kCmAttVa, "cm_att_va"},
    {ModelVariant::kCmAttVad, "cm_att_vad"},
    {ModelVariant::kHacaNoAlign, "haca_no_align"},
    {ModelVariant::kHaca, "haca"},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Field {
  std::string key;
  std::function<std::string(const HacaConfig&)> get;
  std::function<void(HacaConfig&, std::string_view)> set;
};

template <typename T>
Field size_field(std::string key, T HacaConfig::*member) {
  return {key, [member](const HacaConfig& c) { return std::to_string(c.*member); },
          [member, key](HacaConfig& c, std::string_view v) { c.*member = parse_size(key, v); }};
}

Field modality_field(std::string key, ModalityConfig HacaConfig::*modality, std::size_t ModalityConfig::*member) {
  return {key, [=](const HacaConfig& c) { return std::to_string((c.*modality).*member); },
          [=](HacaConfig& c, std::string_view v) { (c.*modality).*member = parse_size(key, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    for (auto [prefix, modality] : {std::pair{"visual", &HacaConfig::visual}, std::pair{"audio", &HacaConfig::audio}}) {
      const std::string p = prefix;
      f.push_back(modality_field(p + "_dim", modality, &ModalityConfig::input_dim));
      f.push_back(modality_field(p + "_low_hidden", modality, &ModalityConfig::low_hidden));
      f.push_back(modality_field(p + "_high_hidden", modality, &ModalityConfig::high_hidden));
      f.push_back(modality_field(p + "_chunk", modality, &ModalityConfig::chunk));
      f.push_back(modality_field(p + "_max_length", modality, &ModalityConfig::max_length));
    }
    f.push_back(size_field("global_hidden", &HacaConfig::global_hidden));
    f.push_back(size_field("local_hidden", &HacaConfig::local_hidden));
    f.push_back(size_field("embed_dim", &HacaConfig::embed_dim));
    f.push_back(size_field("attention_dim", &HacaConfig::attention_dim));
    f.push_back(size_field("max_decode_steps", &HacaConfig::max_decode_steps));
    f.push_back(size_field("vocab_size", &HacaConfig::vocab_size));
    f.push_back({"variant", [](const HacaConfig& c) { return std::string(variant_name(c.variant)); },
                 [](HacaConfig& c, std::string_view v) {
                   try {
                     c.variant = parse_variant(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError(e.what());
                   }
                 }});
    f.push_back({"init_range", [](const HacaConfig& c) { return format_real(c.init_range); },
                 [](HacaConfig& c, std::string_view v) { c.init_range = parse_real("init_range", v); }});
    f.push_back({"dropout", [](const HacaConfig& c) { return format_real(c.dropout); },
                 [](HacaConfig& c, std::string_view v) { c.dropout = parse_real("dropout", v); }});
    f.push_back({"seed", [](const HacaConfig& c) { return std::to_string(c.seed); },
                 [](HacaConfig& c, std::string_view v) { c.seed = parse_size("seed", v); }});
    return f;
  }();
  return table;
}

}  // namespace

std::string_view variant_name(ModelVariant variant) {
  for (const auto& v : kVariants)
    if (v.variant == variant) return v.name;
  throw std::invalid_argument("unknown model variant");
}

ModelVariant parse_variant(std::string_view name) {
  for (const auto& v : kVariants)
    if (v.name == name) return v.variant;
  throw std::invalid_argument("unknown model variant '" + std::string(name) +
                              "' (expected att_v, cm_att_va, cm_att_vad, haca_no_align or haca)");
}

const std::vector<ModelVariant>& all_variants() {
  static const std::vector<ModelVariant> variants = {ModelVariant::kAttV, ModelVariant::kCmAttVa,
                                                     ModelVariant::kCmAttVad, ModelVariant::kHacaNoAlign,
                                                     ModelVariant::kHaca};
  return variants;
}

bool variant_is_hierarchical(ModelVariant variant) {
  return variant == ModelVariant::kHaca || variant == ModelVariant::kHacaNoAlign;
}

std::size_t variant_modalities(ModelVariant variant) { return variant == ModelVariant::kAttV ? 1 : 2; }

void HacaConfig::validate() const {
  auto positive = [](std::size_t v, const std::string& what) {
    if (v == 0) throw std::invalid_argument("config: " + what + " must be positive");
  };
  if (vocab_size <= static_cast<std::size_t>(kReservedTokens)) {
    throw std::invalid_argument("config: vocab_size must exceed the " + std::to_string(kReservedTokens) +
                                " reserved tokens");
  }
  positive(embed_dim, "embed_dim");
  positive(local_hidden, "local_hidden");
  positive(max_decode_steps, "max_decode_steps");
  for (const auto& m : modalities()) {
    positive(m.input_dim, m.name + "_dim");
    positive(m.low_hidden, m.name + "_low_hidden");
    if (variant_is_hierarchical(variant)) {
      positive(m.high_hidden, m.name + "_high_hidden");
      positive(m.chunk, m.name + "_chunk");
    }
  }
  if (variant == ModelVariant::kHaca) positive(global_hidden, "global_hidden");
  if (!(init_range > 0.0)) throw std::invalid_argument("config: init_range must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("config: dropout must lie in [0, 1)");
}

std::vector<ModalityConfig> HacaConfig::modalities() const {
  if (variant_modalities(variant) == 1) return {visual};
  return {visual, audio};
}

HacaConfig micro_config(ModelVariant variant, std::size_t vocab_size, std::size_t visual_dim, std::size_t audio_dim) {
  HacaConfig c;
  c.visual = {"visual", visual_dim, 8, 8, 3, 50};
  c.audio = {"audio", audio_dim, 4, 4, 2, 20};
  c.global_hidden = 8;
  c.local_hidden = 16;
  c.embed_dim = 8;
  c.vocab_size = vocab_size;
  c.variant = variant;
  return c;
}

ConfigMap to_config_map(const HacaConfig& config) {
  ConfigMap out;
  for (const auto& f : fields()) out[f.key] = f.get(config);
  return out;
}

std::vector<std::string> apply_config_map(HacaConfig& config, const ConfigMap& values) {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : values) {
    bool found = false;
    for (const auto& f : fields()) {
      if (f.key == key) {
        f.set(config, value);
        found = true;
        break;
      }
    }
    if (!found) unknown.push_back(key);
  }
  return unknown;
}

ConfigMap parse_config_text(std::string_view text, std::string_view origin) {
  ConfigMap out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return out;
}

std::string format_config_text(const ConfigMap& values) {
  std::ostringstream os;
  for (const auto& [key, value] : values) os << key << " = " << value << '\n';
  return os.str();
}

std::size_t parse_size(std::string_view key, std::string_view value) {
  const std::string v(trim(value));
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" + std::string(value) + "'");
  }
  errno = 0;
  const unsigned long long parsed = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError("'" + std::string(key) + "' is out of range: " + v);
  return static_cast<std::size_t>(parsed);
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string v(trim(value));
  char* end = nullptr;
  errno = 0;
  const double parsed = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(parsed)) {
    throw ConfigError("'" + std::string(key) + "' expects a finite number, got '" + std::string(value) + "'");
  }
  return parsed;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string_view v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + std::string(key) + "' expects true or false, got '" + std::string(value) + "'");
}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  // Prefer the shortest representation that round-trips.
  for (int precision = 1; precision < 17; ++precision) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", precision, value);
    if (std::strtod(shorter, nullptr) == value) return shorter;
  }
  return buf;
}

}  // namespace haca
