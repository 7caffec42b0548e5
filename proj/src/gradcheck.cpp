// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace haca::inline HACA_PRECISION_NS {

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.flagged == 0; });
}

real GradCheckReport::max_rel_error() const {
  real worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

real gradient_relative_error(real autodiff, real numeric) {
  return std::abs(autodiff - numeric) / std::max<real>(1e-8, std::abs(autodiff) + std::abs(numeric));
}

GradCheckEntry compare_gradients(std::string name, std::span<const real> autodiff, std::span<const real> numeric,
                                 real tolerance) {
  if (autodiff.size() != numeric.size()) {
    throw std::invalid_argument("compare_gradients: '" + name + "' has " + std::to_string(autodiff.size()) +
                                " autodiff and " + std::to_string(numeric.size()) + " numeric entries");
  }
  GradCheckEntry entry;
  entry.name = std::move(name);
  entry.count = autodiff.size();
  for (std::size_t i = 0; i < autodiff.size(); ++i) {
    const real err = gradient_relative_error(autodiff[i], numeric[i]);
    if (err > tolerance) ++entry.flagged;
    if (err > entry.max_rel_error || i == 0) {
      entry.max_rel_error = err;
      entry.worst_index = i;
      entry.worst_autodiff = autodiff[i];
      entry.worst_numeric = numeric[i];
    }
  }
  return entry;
}

GradCheckReport finite_difference_check(const std::function<Tensor()>& loss_fn,
                                        const std::vector<NamedTensor>& params, real step,
                                        real tolerance) {
  if (step <= 0.0) throw std::invalid_argument("finite_difference_check: step must be positive");

  auto evaluate = [&] {
    NoRecordScope unrecorded;
    return loss_fn().item();
  };
  const real first = evaluate();
  const real second = evaluate();
  if (first != second) {
    throw std::runtime_error("finite_difference_check: loss function is not deterministic");
  }

  for (auto p : params) p.tensor.zero_grad();
  {
    ComputationRecord record;
    RecordScope scope(record);
    Tensor loss = loss_fn();
    // A loss that does not depend on any parameter has zero gradient.
    if (loss.requires_grad()) record.backward(loss);
  }

  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;
  for (auto param : params) {
    const std::vector<real> analytic = param.tensor.grad();
    std::vector<real> numeric(analytic.size());
    auto values = param.tensor.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const real saved = values[i];
      values[i] = saved + step;
      const real plus = evaluate();
      values[i] = saved - step;
      const real minus = evaluate();
      values[i] = saved;
      numeric[i] = (plus - minus) / (2 * step);
    }
    report.entries.push_back(compare_gradients(param.name, analytic, numeric, tolerance));
  }
  return report;
}

}  // namespace haca
