// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/model_gradcheck.hpp"

#include <random>
#include <stdexcept>

#include "haca/extended_oracle.hpp"

namespace haca::inline HACA_PRECISION_NS {

GradCheckReport model_gradient_check(Model& model, std::span<const Sample> batch, DifferenceArithmetic arithmetic,
                                     double step, double tolerance) {
  auto& params = model.parameters();
  auto loss = [&] { return batch_loss(model, batch); };
  if (arithmetic == DifferenceArithmetic::kBinary64) {
    return finite_difference_check(loss, params.entries(), step, tolerance);
  }

  params.zero_grad();
  {
    ComputationRecord record;
    RecordScope scope(record);
    record.backward(loss());
  }
  std::vector<oracle::ParameterValues> point;
  for (const auto& e : params.entries()) {
    point.push_back({e.name, std::vector<double>(e.tensor.values().begin(), e.tensor.values().end())});
  }
  const auto numeric = oracle::extended_central_differences(model.config(), point, batch, step);
  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const std::vector<real> analytic = params.entries()[i].tensor.grad();
    const std::vector<real> fd(numeric[i].begin(), numeric[i].end());
    report.entries.push_back(compare_gradients(point[i].name, analytic, fd, tolerance));
  }
  return report;
}

std::vector<Sample> random_batch(const HacaConfig& config, std::size_t count, std::size_t visual_length,
                                 std::size_t audio_length, std::size_t target_length, std::uint64_t seed) {
  if (config.vocab_size <= static_cast<std::size_t>(kReservedTokens)) {
    throw std::invalid_argument("random_batch: vocabulary has no non-reserved tokens");
  }
  if (target_length == 0) throw std::invalid_argument("random_batch: target length must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> frame(-1.0, 1.0);
  std::uniform_int_distribution<int> word(kReservedTokens, static_cast<int>(config.vocab_size) - 1);
  auto stream = [&](const ModalityConfig& m, std::size_t n) {
    std::vector<double> v(n * m.input_dim);
    for (double& x : v) x = frame(rng);
    return ModalityStream(m.name, n, m.input_dim, std::move(v));
  };
  std::vector<Sample> out;
  for (std::size_t i = 0; i < count; ++i) {
    Sample s;
    s.id = "random-" + std::to_string(i);
    s.streams.push_back(stream(config.visual, visual_length));
    s.streams.push_back(stream(config.audio, audio_length));
    std::vector<int> caption;
    for (std::size_t t = 0; t + 1 < target_length; ++t) caption.push_back(word(rng));
    caption.push_back(kEos);
    s.references.push_back(std::move(caption));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace haca
