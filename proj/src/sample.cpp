// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/sample.hpp"

#include <stdexcept>

namespace haca {

ModalityStream::ModalityStream(std::string name_, std::size_t length_, std::size_t dim_, std::vector<double> values_)
    : name(std::move(name_)), length(length_), dim(dim_), values(std::move(values_)) {
  if (length == 0) throw std::invalid_argument("modality '" + name + "': empty feature sequence");
  if (dim == 0) throw std::invalid_argument("modality '" + name + "': zero feature dim");
  if (values.size() != length * dim) {
    throw std::invalid_argument("modality '" + name + "': " + std::to_string(values.size()) + " values for " +
                                std::to_string(length) + " x " + std::to_string(dim) + " frames");
  }
}

const ModalityStream* Sample::find_stream(const std::string& name) const {
  for (const auto& s : streams)
    if (s.name == name) return &s;
  return nullptr;
}

const ModalityStream& Sample::stream(const std::string& name) const {
  if (const auto* s = find_stream(name)) return *s;
  throw std::out_of_range("sample '" + id + "' has no '" + name + "' stream");
}

}  // namespace haca
