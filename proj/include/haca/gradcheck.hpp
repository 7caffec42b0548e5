// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "haca/tensor.hpp"

namespace haca::inline HACA_PRECISION_NS {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct GradCheckEntry {
  std::string name;
  std::size_t count = 0;
  std::size_t flagged = 0;  // entries above tolerance
  real max_rel_error = 0.0;
  std::size_t worst_index = 0;
  real worst_autodiff = 0.0;
  real worst_numeric = 0.0;
};

struct GradCheckReport {
  real step = 0.0;
  real tolerance = 0.0;
  std::vector<GradCheckEntry> entries;

  bool passed() const;
  real max_rel_error() const;
};

// |a - n| / max(1e-8, |a| + |n|)
real gradient_relative_error(real autodiff, real numeric);

// Per-entry comparison of one parameter's gradients.
GradCheckEntry compare_gradients(std::string name, std::span<const real> autodiff, std::span<const real> numeric,
                                 real tolerance);

// Compares reverse-mode gradients of `loss_fn` against central differences
// for every entry of every parameter. `loss_fn` must be deterministic; two
// unrecorded evaluations that differ raise std::runtime_error.
GradCheckReport finite_difference_check(const std::function<Tensor()>& loss_fn,
                                        const std::vector<NamedTensor>& params, real step = 1e-5,
                                        real tolerance = 1e-4);

}  // namespace haca
