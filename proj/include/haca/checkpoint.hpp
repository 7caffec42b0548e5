// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "haca/config.hpp"
#include "haca/dataset.hpp"

namespace haca {

class CheckpointError : public DataError {
 public:
  using DataError::DataError;
};

struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  bool operator==(const NamedArray&) const = default;
};

// Layout: "HACA", version byte, u32 section count, sections, u64 FNV-1a
// checksum of all preceding bytes. A section is a u32-length name and a
// u64-length payload. Integers and doubles are little-endian.
struct Checkpoint {
  static constexpr std::uint8_t kVersion = 1;

  ConfigMap config;       // model configuration
  ConfigMap train_state;  // epoch counter, learning rate, schedule state
  std::string rng_state;
  std::vector<NamedArray> parameters;
  std::vector<NamedArray> optimizer;

  bool operator==(const Checkpoint&) const = default;
};

// Writes to a temporary sibling and renames it over `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace haca
