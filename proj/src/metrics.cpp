// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "haca/config.hpp"

namespace haca {

namespace {

using NgramCounts = std::map<std::vector<int>, std::size_t>;

NgramCounts count_ngrams(const TokenSequence& s, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[std::vector<int>(s.begin() + i, s.begin() + i + n)];
  return counts;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

BleuReport bleu4(std::span<const TokenSequence> hypotheses, std::span<const std::vector<TokenSequence>> references) {
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument("bleu4: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                                std::to_string(references.size()) + " reference lists");
  }
  BleuReport r;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& hyp = hypotheses[i];
    const auto& refs = references[i];
    if (refs.empty()) throw std::invalid_argument("bleu4: sample " + std::to_string(i) + " has no references");
    r.hypothesis_length += hyp.size();
    std::size_t closest = refs[0].size();
    for (const auto& ref : refs) {
      const auto d = [&](std::size_t len) { return len > hyp.size() ? len - hyp.size() : hyp.size() - len; };
      if (d(ref.size()) < d(closest) || (d(ref.size()) == d(closest) && ref.size() < closest)) closest = ref.size();
    }
    r.reference_length += closest;
    for (std::size_t n = 1; n <= 4; ++n) {
      const NgramCounts hyp_counts = count_ngrams(hyp, n);
      NgramCounts max_ref;
      for (const auto& ref : refs)
        for (const auto& [gram, c] : count_ngrams(ref, n)) max_ref[gram] = std::max(max_ref[gram], c);
      for (const auto& [gram, c] : hyp_counts) {
        auto it = max_ref.find(gram);
        r.matches[n - 1] += std::min(c, it == max_ref.end() ? std::size_t{0} : it->second);
      }
      r.totals[n - 1] += hyp.size() >= n ? hyp.size() - n + 1 : 0;
    }
  }
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    r.precisions[n] = r.totals[n] ? static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]) : 0.0;
    if (r.precisions[n] == 0.0) zero = true;
    else log_sum += std::log(r.precisions[n]);
  }
  if (r.hypothesis_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hypothesis_length >= r.reference_length) {
    r.brevity_penalty = 1.0;
  } else {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.reference_length) / r.hypothesis_length);
  }
  r.bleu = zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

BleuReport bleu4(std::span<const std::string> hypotheses, std::span<const std::vector<std::string>> references) {
  std::unordered_map<std::string, int> ids;
  auto tokenize = [&](const std::string& text) {
    TokenSequence out;
    std::istringstream in(text);
    std::string w;
    while (in >> w) out.push_back(ids.emplace(w, static_cast<int>(ids.size())).first->second);
    return out;
  };
  std::vector<TokenSequence> hyps;
  for (const auto& h : hypotheses) hyps.push_back(tokenize(h));
  std::vector<std::vector<TokenSequence>> refs;
  for (const auto& list : references) {
    refs.emplace_back();
    for (const auto& r : list) refs.back().push_back(tokenize(r));
  }
  return bleu4(hyps, refs);
}

TokenSequence strip_eos(std::span<const int> ids) {
  auto end = std::find(ids.begin(), ids.end(), kEos);
  return TokenSequence(ids.begin(), end);
}

double span_accuracy(std::span<const TokenSequence> hypotheses, std::span<const TokenSequence> references,
                     std::size_t first, std::size_t last) {
  if (hypotheses.size() != references.size()) throw std::invalid_argument("accuracy: count mismatch");
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    for (std::size_t p = first; p < std::min(last, references[i].size()); ++p) {
      ++total;
      if (p < hypotheses[i].size() && hypotheses[i][p] == references[i][p]) ++correct;
    }
  }
  if (total == 0) throw std::invalid_argument("accuracy: no reference positions in range");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double position_accuracy(std::span<const TokenSequence> hypotheses, std::span<const TokenSequence> references,
                         std::size_t position) {
  return span_accuracy(hypotheses, references, position, position + 1);
}

std::string EvalReport::csv_header() {
  return "samples,bleu4,p1,p2,p3,p4,brevity_penalty,token_accuracy,audio_word_accuracy,event_word_accuracy";
}

std::string EvalReport::csv_row() const {
  std::string row = std::to_string(samples) + "," + fmt(bleu.bleu);
  for (double p : bleu.precisions) row += "," + fmt(p);
  row += "," + fmt(bleu.brevity_penalty) + "," + fmt(token_accuracy) + "," + fmt(audio_word_accuracy) + "," +
         fmt(event_word_accuracy);
  return row;
}

std::string EvalReport::text() const {
  std::ostringstream out;
  out << "samples              " << samples << '\n'
      << "BLEU-4               " << fmt(bleu.bleu) << '\n'
      << "precisions 1..4      " << fmt(bleu.precisions[0]) << ' ' << fmt(bleu.precisions[1]) << ' '
      << fmt(bleu.precisions[2]) << ' ' << fmt(bleu.precisions[3]) << '\n'
      << "brevity penalty      " << fmt(bleu.brevity_penalty) << '\n'
      << "token accuracy       " << fmt(token_accuracy) << '\n'
      << "audio-word accuracy  " << fmt(audio_word_accuracy) << '\n'
      << "event-word accuracy  " << fmt(event_word_accuracy) << '\n';
  return out.str();
}

}  // namespace haca
