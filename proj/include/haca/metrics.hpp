// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace haca {

using TokenSequence = std::vector<int>;

struct BleuReport {
  double bleu = 0.0;
  std::array<double, 4> precisions{};
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;  // sum of closest reference lengths
};

// Corpus BLEU-4: clipped n-gram counts summed over the corpus, brevity
// penalty against the closest reference length (shorter wins ties), no
// smoothing. Sequences must not contain EOS.
BleuReport bleu4(std::span<const TokenSequence> hypotheses, std::span<const std::vector<TokenSequence>> references);

// Whitespace-tokenized text convenience overload.
BleuReport bleu4(std::span<const std::string> hypotheses, std::span<const std::vector<std::string>> references);

// Drops everything from the first EOS on.
TokenSequence strip_eos(std::span<const int> ids);

// Fraction of (hypothesis, reference) pairs with equal tokens at `position`
// among references long enough to have one. Hypotheses shorter than the
// position count as wrong.
double position_accuracy(std::span<const TokenSequence> hypotheses, std::span<const TokenSequence> references,
                         std::size_t position);

// Matches at positions [first, last) over all reference positions in range.
double span_accuracy(std::span<const TokenSequence> hypotheses, std::span<const TokenSequence> references,
                     std::size_t first, std::size_t last);

struct EvalReport {
  BleuReport bleu;
  double token_accuracy = 0.0;       // teacher-forced next-token accuracy
  double audio_word_accuracy = 0.0;  // generated word at the modifier position
  double event_word_accuracy = 0.0;  // generated words after the modifier
  std::size_t samples = 0;

  static std::string csv_header();
  std::string csv_row() const;
  std::string text() const;
};

}  // namespace haca
