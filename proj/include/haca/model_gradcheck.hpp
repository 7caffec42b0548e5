// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// End-to-end gradient check of a model's batch loss.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "haca/gradcheck.hpp"
#include "haca/model.hpp"

namespace haca::inline HACA_PRECISION_NS {

// Arithmetic used for the central differences. Autodiff gradients always
// come from the binary64 engine.
enum class DifferenceArithmetic { kBinary64, kExtended };

GradCheckReport model_gradient_check(Model& model, std::span<const Sample> batch, DifferenceArithmetic arithmetic,
                                     double step = 1e-5, double tolerance = 1e-4);

// `count` samples with uniform [-1, 1] frames and random EOS-terminated
// targets of `target_length` tokens drawn from the non-reserved ids.
std::vector<Sample> random_batch(const HacaConfig& config, std::size_t count, std::size_t visual_length,
                                 std::size_t audio_length, std::size_t target_length, std::uint64_t seed);

}  // namespace haca
