// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <filesystem>
#include <string>

#include "haca/config.hpp"

namespace haca {

// Teacher-forcing probability, decayed linearly from `start` (first epoch)
// to `end` (epoch `decay_epochs`, or the last epoch when 0) and held after.
struct SamplingSchedule {
  double start = 1.0;
  double end = 0.75;
  std::size_t decay_epochs = 0;

  double at(std::size_t epoch, std::size_t max_epochs) const;  // epoch is 1-based
  bool operator==(const SamplingSchedule&) const = default;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t max_epochs = 50;
  double learning_rate = 1.0;
  double plateau_factor = 0.5;
  std::size_t plateau_patience = 4;
  double clip = 10.0;  // gradients clamped to [-clip, clip]
  SamplingSchedule schedule;
  double adadelta_rho = 0.95;
  double adadelta_epsilon = 1e-6;
  bool shuffle = true;
  std::size_t val_beam_size = 1;  // decoding width for validation BLEU

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct DecodeConfig {
  std::size_t beam_size = 5;
  bool length_normalize = false;
  bool operator==(const DecodeConfig&) const = default;
};

// Everything one command needs: model, training and decoding settings plus
// data and output paths.
struct RunConfig {
  HacaConfig model;
  TrainConfig train;
  DecodeConfig decode;
  std::string train_manifest;
  std::string val_manifest;
  std::string test_manifest;
  std::string out_dir;

  // Every key; unknown keys raise ConfigError.
  ConfigMap to_map() const;
  void apply(const ConfigMap& values);
  bool operator==(const RunConfig&) const = default;
};

// Reads `key = value` text from `path` (empty path -> defaults) and applies
// `overrides` on top.
RunConfig load_run_config(const std::filesystem::path& path, const ConfigMap& overrides = {});

}  // namespace haca
