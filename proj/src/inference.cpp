// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/inference.hpp"

#include <cstdio>
#include <sstream>

#include "haca/metrics.hpp"

namespace haca::inline HACA_PRECISION_NS {

std::vector<int> Hypothesis::surface() const { return strip_eos(tokens); }

const Hypothesis& BeamResult::best() const {
  if (hypotheses.empty()) throw std::logic_error("beam result is empty");
  return hypotheses.front();
}

bool better_hypothesis(const Hypothesis& a, const Hypothesis& b, bool length_normalize) {
  const double sa = length_normalize && !a.tokens.empty() ? a.score / a.tokens.size() : a.score;
  const double sb = length_normalize && !b.tokens.empty() ? b.score / b.tokens.size() : b.score;
  if (sa != sb) return sa > sb;
  if (a.tokens != b.tokens) return std::lexicographical_compare(a.tokens.begin(), a.tokens.end(), b.tokens.begin(),
                                                                b.tokens.end());
  return false;
}

ModelStepper::ModelStepper(const Model& model, const Sample& sample) : model_(model) {
  NoRecordScope unrecorded;
  context_ = model.prepare(sample);
}

ModelStepper::ModelStepper(const Model& model, DecodingContext context)
    : model_(model), context_(std::move(context)) {}

std::pair<DecoderState, std::vector<double>> ModelStepper::advance(const DecoderState& state, int word) const {
  NoRecordScope unrecorded;
  StepOutput out = model_.step(context_, state, word);
  auto lp = out.log_probs.values();
  return {std::move(out.state), std::vector<double>(lp.begin(), lp.end())};
}

std::vector<int> greedy_decode(const Model& model, const Sample& sample, std::size_t max_steps) {
  return greedy_search(ModelStepper(model, sample), max_steps).surface();
}

BeamResult beam_search(const Model& model, const Sample& sample, const BeamOptions& options) {
  return beam_search(ModelStepper(model, sample), options);
}

double sequence_log_prob(const Model& model, const Sample& sample, std::span<const int> tokens) {
  ModelStepper stepper(model, sample);
  DecoderState state = stepper.initial();
  int prev = kBos;
  double total = 0.0;
  for (int w : tokens) {
    auto [next, log_probs] = stepper.advance(state, prev);
    if (w < 0 || static_cast<std::size_t>(w) >= log_probs.size()) {
      throw std::out_of_range("sequence_log_prob: token " + std::to_string(w) + " outside the vocabulary");
    }
    total += log_probs[static_cast<std::size_t>(w)];
    state = std::move(next);
    prev = w;
  }
  return total;
}

AttentionTrace trace_attention(const Model& model, const Sample& sample, std::span<const int> tokens) {
  AttentionTrace trace;
  ModelStepper stepper(model, sample);
  DecoderState state = stepper.initial();
  int prev = kBos;
  for (int w : tokens) {
    auto& row = trace.steps.emplace_back();
    {
      AttentionTraceScope scope([&](std::string_view site, std::span<const real> weights) {
        const std::string key(site);
        if (std::find(trace.sites.begin(), trace.sites.end(), key) == trace.sites.end()) trace.sites.push_back(key);
        row[key].assign(weights.begin(), weights.end());
      });
      state = stepper.advance(state, prev).first;
    }
    trace.tokens.push_back(w);
    prev = w;
  }
  return trace;
}

std::string AttentionTrace::csv(const Vocabulary& vocab) const {
  std::vector<std::size_t> width(sites.size(), 0);
  for (const auto& row : steps) {
    for (std::size_t s = 0; s < sites.size(); ++s) {
      if (auto it = row.find(sites[s]); it != row.end()) width[s] = std::max(width[s], it->second.size());
    }
  }
  std::ostringstream os;
  os << "step,token";
  for (std::size_t s = 0; s < sites.size(); ++s)
    for (std::size_t k = 0; k < width[s]; ++k) os << ',' << sites[s] << '[' << k << ']';
  os << '\n';
  char buf[32];
  for (std::size_t t = 0; t < steps.size(); ++t) {
    os << t + 1 << ',' << vocab.token(tokens[t]);
    for (std::size_t s = 0; s < sites.size(); ++s) {
      auto it = steps[t].find(sites[s]);
      for (std::size_t k = 0; k < width[s]; ++k) {
        os << ',';
        if (it != steps[t].end() && k < it->second.size()) {
          std::snprintf(buf, sizeof buf, "%.6g", it->second[k]);
          os << buf;
        }
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string format_nbest(const BeamResult& result, const Vocabulary& vocab) {
  std::string out;
  for (const auto& h : result.hypotheses) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", h.score);
    out += score;
    out += '\t';
    out += vocab.decode(h.tokens);
    out += '\n';
  }
  return out;
}

}  // namespace haca
