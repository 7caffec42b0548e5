// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/extended_oracle.hpp"

#include <stdexcept>

#include "haca/model.hpp"

#ifndef HACA_EXTENDED_PRECISION
#error "extended_oracle.cpp belongs to the extended-precision engine build"
#endif

namespace haca::oracle {

std::vector<std::vector<double>> extended_central_differences(const HacaConfig& config,
                                                              std::span<const ParameterValues> point,
                                                              std::span<const Sample> batch, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("extended_central_differences: step must be positive");
  Model model = Model::build(config);
  ParameterStore& store = model.parameters();
  if (point.size() != store.entries().size()) {
    throw std::runtime_error("extended_central_differences: expected " + std::to_string(store.entries().size()) +
                             " parameters, got " + std::to_string(point.size()));
  }
  std::vector<Tensor> targets;
  for (const auto& p : point) {
    Tensor t = store.find(p.name);
    if (t.size() != p.values.size()) {
      throw std::runtime_error("extended_central_differences: size mismatch for '" + p.name + "'");
    }
    auto dst = t.mutable_values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = p.values[i];
    targets.push_back(t);
  }

  auto evaluate = [&] {
    NoRecordScope unrecorded;
    return batch_loss(model, batch).item();
  };
  if (evaluate() != evaluate()) throw std::runtime_error("extended_central_differences: loss is not deterministic");

  const real h = step;
  std::vector<std::vector<double>> out;
  out.reserve(targets.size());
  for (Tensor& t : targets) {
    auto values = t.mutable_values();
    std::vector<double> numeric(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const real saved = values[i];
      values[i] = saved + h;
      const real plus = evaluate();
      values[i] = saved - h;
      const real minus = evaluate();
      values[i] = saved;
      numeric[i] = static_cast<double>((plus - minus) / (2 * h));
    }
    out.push_back(std::move(numeric));
  }
  return out;
}

}  // namespace haca::oracle
