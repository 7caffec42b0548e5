// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/parameters.hpp"

#include <algorithm>
#include <stdexcept>

namespace haca::inline HACA_PRECISION_NS {

Tensor ParameterStore::add(std::string name, Tensor tensor) {
  if (contains(name)) throw std::invalid_argument("parameter '" + name + "' registered twice");
  if (!tensor.requires_grad()) throw std::invalid_argument("parameter '" + name + "' is not differentiable");
  entries_.push_back({std::move(name), tensor});
  return tensor;
}

const Tensor& ParameterStore::find(const std::string& name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.name == name; });
  if (it == entries_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->tensor;
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.name == name; });
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

void ParameterStore::fill(real value) {
  for (auto& e : entries_) {
    auto v = e.tensor.mutable_values();
    std::fill(v.begin(), v.end(), value);
  }
}

Tensor ParameterFactory::uniform(const std::string& name, Shape shape) {
  std::uniform_real_distribution<double> dist(-range_, range_);
  std::vector<real> values(shape_size(shape));
  for (real& v : values) v = dist(rng_);
  return store_.add(name, Tensor::parameter(std::move(shape), std::move(values)));
}

}  // namespace haca
