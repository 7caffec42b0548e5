// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/evaluation.hpp"

#include <limits>

namespace haca::inline HACA_PRECISION_NS {

TeacherForcedStats teacher_forced_stats(const Model& model, std::span<const Sample> samples) {
  NoRecordScope unrecorded;
  TeacherForcedStats stats;
  for (const auto& s : samples) {
    if (s.references.empty()) throw std::invalid_argument("sample '" + s.id + "' has no reference caption");
    const auto& target = s.references.front();
    auto steps = forward_teacher_forced(model, s, target);
    for (std::size_t t = 0; t < target.size(); ++t) {
      auto lp = steps[t].values();
      stats.nll -= lp[static_cast<std::size_t>(target[t])];
      int best = -1;
      for (int w = 0; w < static_cast<int>(lp.size()); ++w) {
        if (is_generatable(w) && (best < 0 || lp[w] > lp[best])) best = w;
      }
      stats.correct += best == target[t];
      ++stats.tokens;
    }
  }
  return stats;
}

double token_accuracy(const Model& model, std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("token_accuracy: empty sample set");
  return teacher_forced_stats(model, samples).accuracy();
}

std::vector<TokenSequence> decode_all(const Model& model, std::span<const Sample> samples,
                                      const BeamOptions& options) {
  std::vector<TokenSequence> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(options.beam_size == 1 && !options.length_normalize
                      ? greedy_decode(model, s, options.max_steps)
                      : beam_search(model, s, options).best().surface());
  }
  return out;
}

std::vector<std::vector<TokenSequence>> reference_lists(std::span<const Sample> samples) {
  std::vector<std::vector<TokenSequence>> refs;
  refs.reserve(samples.size());
  for (const auto& s : samples) {
    refs.emplace_back();
    for (const auto& r : s.references) refs.back().push_back(strip_eos(r));
  }
  return refs;
}

EvalReport evaluate(const Model& model, std::span<const Sample> samples, const BeamOptions& options) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty sample set");
  EvalReport report;
  report.samples = samples.size();
  const auto hyps = decode_all(model, samples, options);
  const auto refs = reference_lists(samples);
  report.bleu = bleu4(hyps, refs);
  std::vector<TokenSequence> first;
  for (const auto& r : refs) first.push_back(r.front());
  report.audio_word_accuracy = position_accuracy(hyps, first, 0);
  bool has_events = false;
  for (const auto& r : first) has_events = has_events || r.size() > 1;
  report.event_word_accuracy = has_events ? span_accuracy(hyps, first, 1, std::numeric_limits<std::size_t>::max())
                                          : std::numeric_limits<double>::quiet_NaN();
  report.token_accuracy = token_accuracy(model, samples);
  return report;
}

}  // namespace haca
