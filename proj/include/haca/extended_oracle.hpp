// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// Central differences of the model loss evaluated by the engine compiled over
// long double. Binary64 central differences cannot resolve gradient entries
// below roughly ulp(loss) / (2 * step); the extended evaluation lowers that
// floor by three orders of magnitude while leaving the step unchanged.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "haca/config.hpp"
#include "haca/sample.hpp"

namespace haca::oracle {

struct ParameterValues {
  std::string name;
  std::vector<double> values;
};

// Builds the model described by `config`, loads `point` by parameter name
// and returns d batch_loss / d theta for every entry of every parameter, in
// the order of `point`. Raises std::runtime_error when two evaluations at
// the same point differ or a name is unknown.
std::vector<std::vector<double>> extended_central_differences(const HacaConfig& config,
                                                              std::span<const ParameterValues> point,
                                                              std::span<const Sample> batch, double step);

}  // namespace haca::oracle
