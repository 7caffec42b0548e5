// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace haca {

// A named temporal feature sequence: `length` frames of `dim` values each,
// stored row-major.
struct ModalityStream {
  std::string name;
  std::size_t length = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  ModalityStream() = default;
  ModalityStream(std::string name, std::size_t length, std::size_t dim, std::vector<double> values);

  bool operator==(const ModalityStream&) const = default;
};

// Reference captions are token-id sequences terminated by EOS.
struct Sample {
  std::string id;
  std::vector<ModalityStream> streams;
  std::vector<std::vector<int>> references;

  const ModalityStream& stream(const std::string& name) const;
  const ModalityStream* find_stream(const std::string& name) const;
  bool operator==(const Sample&) const = default;
};

}  // namespace haca
