// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <span>
#include <vector>

#include "haca/inference.hpp"
#include "haca/metrics.hpp"

namespace haca::inline HACA_PRECISION_NS {

struct TeacherForcedStats {
  double nll = 0.0;  // summed over tokens
  std::size_t tokens = 0;
  std::size_t correct = 0;  // argmax over EOS and words equals the target

  double mean_loss() const { return nll / static_cast<double>(tokens); }
  double accuracy() const { return static_cast<double>(correct) / static_cast<double>(tokens); }
};

// Unrecorded teacher-forced pass over each sample's first reference.
TeacherForcedStats teacher_forced_stats(const Model& model, std::span<const Sample> samples);

// Fraction of correctly predicted next tokens; throws on an empty set.
double token_accuracy(const Model& model, std::span<const Sample> samples);

// Decoded surface sequences; beam_size 1 uses greedy decoding.
std::vector<TokenSequence> decode_all(const Model& model, std::span<const Sample> samples, const BeamOptions& options);

// Reference lists with EOS removed.
std::vector<std::vector<TokenSequence>> reference_lists(std::span<const Sample> samples);

// BLEU-4 against every reference; word accuracies against the first one,
// position 0 for the audio word and the remaining positions for events.
EvalReport evaluate(const Model& model, std::span<const Sample> samples, const BeamOptions& options);

}  // namespace haca
