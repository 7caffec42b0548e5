// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "haca/gradcheck.hpp"
#include "haca/tensor.hpp"

namespace haca::inline HACA_PRECISION_NS {

// Named, ordered collection of trainable tensors. Names are hierarchical
// dotted paths and unique within a store.
class ParameterStore {
 public:
  Tensor add(std::string name, Tensor tensor);
  const std::vector<NamedTensor>& entries() const { return entries_; }
  std::vector<NamedTensor>& entries() { return entries_; }
  const Tensor& find(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t scalar_count() const;
  void zero_grad();
  void fill(real value);

 private:
  std::vector<NamedTensor> entries_;
};

// Draws initial values uniformly from [-range, range], in creation order.
class ParameterFactory {
 public:
  ParameterFactory(ParameterStore& store, std::mt19937_64& rng, double range)
      : store_(store), rng_(rng), range_(range) {}

  Tensor uniform(const std::string& name, Shape shape);

 private:
  ParameterStore& store_;
  std::mt19937_64& rng_;
  double range_;
};

}  // namespace haca
