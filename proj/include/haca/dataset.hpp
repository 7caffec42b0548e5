// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "haca/sample.hpp"
#include "haca/vocabulary.hpp"

namespace haca {

// Malformed or missing data; messages name the file and line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feature file: "n d" header, then n rows of d values.
ModalityStream read_features(const std::filesystem::path& path, const std::string& modality);
void write_features(const std::filesystem::path& path, const ModalityStream& stream);

// Caption file: one whitespace-tokenized caption per line.
std::vector<std::vector<int>> read_captions(const std::filesystem::path& path, const Vocabulary& vocab);
void write_captions(const std::filesystem::path& path, const std::vector<std::vector<int>>& captions,
                    const Vocabulary& vocab);

struct Dataset {
  Vocabulary vocab;
  std::vector<Sample> samples;
};

// Manifest lines:
//   vocab <path>
//   sample <id> captions=<path> <modality>=<path> ...
// Paths are relative to the manifest's directory; '#' starts a comment.
Dataset load_dataset(const std::filesystem::path& manifest);

// Writes features and captions under `dir` and a manifest named
// `manifest_name` that refers to `vocab_file`.
void save_dataset(const std::filesystem::path& dir, const std::string& manifest_name, const Dataset& dataset,
                  const std::string& vocab_file = "vocab.txt");

}  // namespace haca
