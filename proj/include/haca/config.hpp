// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// Precision-independent configuration: model variants, reserved token ids,
// the architectural hyperparameters and their flat key = value form.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace haca {

enum class ModelVariant { kAttV, kCmAttVa, kCmAttVad, kHacaNoAlign, kHaca };

std::string_view variant_name(ModelVariant variant);
ModelVariant parse_variant(std::string_view name);
const std::vector<ModelVariant>& all_variants();
// Variants whose encoders run the high-level pass.
bool variant_is_hierarchical(ModelVariant variant);
// Number of modalities the variant encodes (visual first).
std::size_t variant_modalities(ModelVariant variant);

// Reserved token ids.
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kReservedTokens = 4;

struct ModalityConfig {
  std::string name;
  std::size_t input_dim = 0;
  std::size_t low_hidden = 0;  // per direction
  std::size_t high_hidden = 0;
  std::size_t chunk = 1;
  std::size_t max_length = 0;  // 0 = unbounded

  bool operator==(const ModalityConfig&) const = default;
};

// Every architectural hyperparameter. Defaults are the full-size settings;
// desk-scale runs override the dims.
struct HacaConfig {
  ModalityConfig visual{"visual", 0, 512, 256, 10, 50};
  ModalityConfig audio{"audio", 0, 128, 64, 4, 20};
  std::size_t global_hidden = 256;
  std::size_t local_hidden = 1024;
  std::size_t embed_dim = 512;
  std::size_t attention_dim = 0;  // 0 -> the querying recurrence's hidden dim
  std::size_t max_decode_steps = 16;
  std::size_t vocab_size = 0;
  ModelVariant variant = ModelVariant::kHaca;
  double init_range = 0.08;
  double dropout = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
  std::vector<ModalityConfig> modalities() const;  // those the variant encodes
  bool operator==(const HacaConfig&) const = default;
};

// Small dims for desk-scale runs and gradient checks: visual low/high 8/8
// with chunk 3, audio 4/4 with chunk 2, decoders 8 (global) and 16 (local),
// embedding 8.
HacaConfig micro_config(ModelVariant variant, std::size_t vocab_size, std::size_t visual_dim = 8,
                        std::size_t audio_dim = 4);

// Ordered key -> value text.
using ConfigMap = std::map<std::string, std::string>;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ConfigMap to_config_map(const HacaConfig& config);
// Sets every key of `values` that names a HacaConfig field and returns the
// keys it did not recognize. Malformed values raise ConfigError.
std::vector<std::string> apply_config_map(HacaConfig& config, const ConfigMap& values);

// `key = value` lines; `#` starts a comment. Duplicate keys and lines
// without `=` raise ConfigError naming the line.
ConfigMap parse_config_text(std::string_view text, std::string_view origin = "config");
std::string format_config_text(const ConfigMap& values);

// Strict scalar parsers shared by config readers.
std::size_t parse_size(std::string_view key, std::string_view value);
double parse_real(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);
std::string format_real(double value);

}  // namespace haca
