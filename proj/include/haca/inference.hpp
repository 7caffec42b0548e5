// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <algorithm>
#include <concepts>
#include <map>
#include <string>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "haca/model.hpp"
#include "haca/vocabulary.hpp"

namespace haca::inline HACA_PRECISION_NS {

struct Hypothesis {
  std::vector<int> tokens;  // emitted ids, EOS last when finished
  double score = 0.0;       // cumulative log-probability
  bool finished = false;

  std::vector<int> surface() const;  // tokens without EOS
  bool operator==(const Hypothesis&) const = default;
};

struct BeamOptions {
  std::size_t beam_size = 5;
  std::size_t max_steps = 16;
  bool length_normalize = false;  // rank by score / length
  std::size_t nbest = 1;
};

struct BeamResult {
  std::vector<Hypothesis> hypotheses;  // best first
  const Hypothesis& best() const;
};

// A decoder seen as a state machine: `advance(state, word)` feeds `word` and
// returns the new state and the log-distribution over the next token.
template <typename S>
concept Stepper = requires(const S& s, const typename S::State& state, int word) {
  { s.initial() } -> std::convertible_to<typename S::State>;
  { s.advance(state, word) } -> std::same_as<std::pair<typename S::State, std::vector<double>>>;
};

// Higher score first; ties go to the lexicographically smaller sequence,
// then the shorter one.
bool better_hypothesis(const Hypothesis& a, const Hypothesis& b, bool length_normalize = false);

// Argmax over EOS and word ids per step, lowest id on ties; stops after EOS
// or `max_steps` tokens.
template <Stepper S>
Hypothesis greedy_search(const S& stepper, std::size_t max_steps) {
  Hypothesis h;
  typename S::State state = stepper.initial();
  int prev = kBos;
  for (std::size_t t = 0; t < max_steps; ++t) {
    auto [next, log_probs] = stepper.advance(state, prev);
    int best = -1;
    for (int w = 0; w < static_cast<int>(log_probs.size()); ++w) {
      if (is_generatable(w) && (best < 0 || log_probs[w] > log_probs[best])) best = w;
    }
    if (best < 0) throw std::invalid_argument("greedy_search: vocabulary has no generatable token");
    h.tokens.push_back(best);
    h.score += log_probs[best];
    if (best == kEos) {
      h.finished = true;
      break;
    }
    state = std::move(next);
    prev = best;
  }
  return h;
}

// Each live hypothesis expands over EOS and every word. Candidates are taken
// best first: EOS candidates move to the finished set, the rest fill up to
// `beam_size` live slots. The search ends at `max_steps` or once no live
// hypothesis can beat the best finished one. Finished hypotheses rank ahead
// of live ones.
template <Stepper S>
BeamResult beam_search(const S& stepper, const BeamOptions& options) {
  if (options.beam_size == 0) throw std::invalid_argument("beam_search: beam_size must be at least 1");
  struct Live {
    Hypothesis hyp;
    typename S::State state;
  };
  struct Candidate {
    std::size_t parent;
    int word;
    double score;
  };
  std::vector<Live> live;
  live.push_back({Hypothesis{}, stepper.initial()});
  std::vector<Hypothesis> finished;
  auto best_finished = [&]() -> const Hypothesis* {
    const Hypothesis* best = nullptr;
    for (const auto& f : finished)
      if (!best || better_hypothesis(f, *best, options.length_normalize)) best = &f;
    return best;
  };

  for (std::size_t t = 0; t < options.max_steps && !live.empty(); ++t) {
    std::vector<typename S::State> states;
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const int prev = live[i].hyp.tokens.empty() ? kBos : live[i].hyp.tokens.back();
      auto [next, log_probs] = stepper.advance(live[i].state, prev);
      states.push_back(std::move(next));
      for (int w = 0; w < static_cast<int>(log_probs.size()); ++w) {
        if (is_generatable(w)) candidates.push_back({i, w, live[i].hyp.score + log_probs[w]});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      const auto& ta = live[a.parent].hyp.tokens;
      const auto& tb = live[b.parent].hyp.tokens;
      if (ta != tb) return ta < tb;
      return a.word < b.word;
    });
    std::vector<Live> next_live;
    for (const auto& c : candidates) {
      if (next_live.size() == options.beam_size) break;
      Hypothesis h = live[c.parent].hyp;
      h.tokens.push_back(c.word);
      h.score = c.score;
      if (c.word == kEos) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        next_live.push_back({std::move(h), states[c.parent]});
      }
    }
    live = std::move(next_live);
    const Hypothesis* done = best_finished();
    if (done && !options.length_normalize && (live.empty() || live.front().hyp.score <= done->score)) break;
  }

  auto rank = [&](std::vector<Hypothesis>& v) {
    std::sort(v.begin(), v.end(),
              [&](const Hypothesis& a, const Hypothesis& b) { return better_hypothesis(a, b, options.length_normalize); });
  };
  BeamResult result;
  rank(finished);
  std::vector<Hypothesis> unfinished;
  for (auto& l : live) unfinished.push_back(std::move(l.hyp));
  rank(unfinished);
  for (auto* pool : {&finished, &unfinished}) {
    for (auto& h : *pool) {
      if (result.hypotheses.size() == std::max<std::size_t>(options.nbest, 1)) break;
      result.hypotheses.push_back(std::move(h));
    }
  }
  return result;
}

// Adapts a model and one sample's encoded inputs. Runs unrecorded.
class ModelStepper {
 public:
  using State = DecoderState;
  ModelStepper(const Model& model, const Sample& sample);
  ModelStepper(const Model& model, DecodingContext context);

  State initial() const { return model_.initial_state(); }
  std::pair<State, std::vector<double>> advance(const State& state, int word) const;
  const DecodingContext& context() const { return context_; }

 private:
  const Model& model_;
  DecodingContext context_;
};

// Surface tokens (no BOS/EOS).
std::vector<int> greedy_decode(const Model& model, const Sample& sample, std::size_t max_steps);
BeamResult beam_search(const Model& model, const Sample& sample, const BeamOptions& options);

// Sum of per-step log-probabilities of `tokens` fed in order after BOS.
double sequence_log_prob(const Model& model, const Sample& sample, std::span<const int> tokens);

// Attention weights recorded while feeding `tokens`, one row per step.
struct AttentionTrace {
  std::vector<std::string> sites;  // first-seen order
  std::vector<int> tokens;
  std::vector<std::map<std::string, std::vector<double>>> steps;

  // Header "step,token,<site>[k],..."; one column per weight index seen at
  // any step, empty where a step has fewer weights.
  std::string csv(const Vocabulary& vocab) const;
};

AttentionTrace trace_attention(const Model& model, const Sample& sample, std::span<const int> tokens);

// One line per hypothesis: "score<TAB>tok tok ...".
std::string format_nbest(const BeamResult& result, const Vocabulary& vocab);

}  // namespace haca
