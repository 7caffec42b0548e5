// Copyright 2026 The haca Authors. Apache 2.0 License.

#include <cmath>
#include <random>

#include "doctest.h"
#include "haca/model_gradcheck.hpp"

using namespace haca;

namespace {

HacaConfig tiny_config(ModelVariant variant, std::size_t vocab = 7) {
  HacaConfig c;
  c.visual = {"visual", 3, 3, 3, 3, 50};
  c.audio = {"audio", 2, 2, 2, 2, 20};
  c.global_hidden = 3;
  c.local_hidden = 4;
  c.embed_dim = 3;
  c.vocab_size = vocab;
  c.variant = variant;
  c.init_range = 0.5;
  c.seed = 5;
  return c;
}

double total(const Tensor& probs) {
  double s = 0.0;
  for (double p : probs.values()) s += p;
  return s;
}

Tensor probs_of(const StepOutput& out) { return ops::softmax(out.logits); }

void perturb(std::vector<double>& values, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3, 3);
  for (double& v : values) v = u(rng);
}

}  // namespace

TEST_CASE("decoder self-attention edge cases and oracle") {
  std::mt19937_64 rng(3);
  ParameterStore store;
  ParameterFactory factory(store, rng, 0.7);
  auto p = SoftAttentionParams::create(factory, "self", 3, 3, 4);
  Tensor query = Tensor::row({0.2, -0.4, 0.6});

  Tensor empty = decoder_self_attention({}, query, p, 3);
  CHECK(empty.shape() == Shape{1, 3});
  for (double v : empty.values()) CHECK(v == 0.0);

  std::vector<Tensor> one{Tensor::row({0.5, -1.0, 2.0})};
  Tensor single = decoder_self_attention(one, query, p, 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(single.at(0, j) == one[0].at(0, j));

  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Tensor> history;
  for (int k = 0; k < 3; ++k) history.push_back(Tensor::row({u(rng), u(rng), u(rng)}));
  // score_k = v . tanh(W_f h_k + W_q q), softmax, weighted sum.
  auto Wf = p.feature_proj.values(), Wq = p.query_proj.values(), v = p.score.values();
  std::vector<double> scores;
  for (const auto& h : history) {
    double s = 0.0;
    for (std::size_t r = 0; r < 4; ++r) {
      double pre = 0.0;
      for (std::size_t j = 0; j < 3; ++j) pre += Wf[r * 3 + j] * h.at(0, j) + Wq[r * 3 + j] * query.at(0, j);
      s += v[r] * std::tanh(pre);
    }
    scores.push_back(s);
  }
  double z = 0.0;
  for (double s : scores) z += std::exp(s);
  Tensor ctx = decoder_self_attention(history, query, p, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    double expected = 0.0;
    for (std::size_t k = 0; k < 3; ++k) expected += std::exp(scores[k]) / z * history[k].at(0, j);
    CHECK(ctx.at(0, j) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("project_vocab") {
  SUBCASE("zero projection is uniform") {
    Tensor p = project_vocab(Tensor::row({0.3, -0.2}), Tensor::zeros({5, 2}));
    for (double v : p.values()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("single-word vocabulary") {
    Tensor p = project_vocab(Tensor::row({0.3, -0.2}), Tensor::constant({1, 2}, {0.7, 0.1}));
    CHECK(p.item() == 1.0);
  }
  SUBCASE("explicit matmul and softmax") {
    const std::vector<double> W = {0.1, -0.3, 0.5, 0.2, -0.7, 0.4};
    const std::vector<double> o = {0.9, -0.6};
    Tensor p = project_vocab(Tensor::row(o), Tensor::constant({3, 2}, W));
    double logits[3], z = 0.0;
    for (int i = 0; i < 3; ++i) z += std::exp(logits[i] = W[2 * i] * o[0] + W[2 * i + 1] * o[1]);
    for (int i = 0; i < 3; ++i) CHECK(p.at(0, i) == doctest::Approx(std::exp(logits[i]) / z).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(project_vocab(Tensor::row({1, 2, 3}), Tensor::zeros({4, 2})), ShapeError);
  }
}

TEST_CASE("zero parameters give zero decoder outputs and a uniform distribution") {
  HacaConfig c = tiny_config(ModelVariant::kHaca);
  Model m = Model::build(c);
  m.parameters().fill(0.0);
  auto batch = random_batch(c, 1, 5, 4, 3, 9);
  DecodingContext ctx = m.prepare(batch[0]);
  DecoderState s = m.initial_state();
  Tensor og = global_step(s, ctx, kBos, m.decoder());
  for (double v : og.values()) CHECK(v == 0.0);
  Tensor ol = local_step(s, ctx, kBos, og, m.decoder());
  for (double v : ol.values()) CHECK(v == 0.0);
  StepOutput out = m.step(ctx, m.initial_state(), kBos);
  Tensor probs = probs_of(out);
  for (double p : probs.values()) CHECK(p == doctest::Approx(1.0 / 7).epsilon(1e-15));
}

TEST_CASE("first step: empty histories, BOS input, zero self-attention context") {
  HacaConfig c = tiny_config(ModelVariant::kHaca);
  Model m = Model::build(c);
  DecoderState s = m.initial_state();
  CHECK(s.global_history.empty());
  CHECK(s.local_history.empty());
  CHECK(s.prev_word == kBos);
  auto batch = random_batch(c, 1, 5, 4, 3, 9);
  DecodingContext ctx = m.prepare(batch[0]);
  StepOutput out = m.step(ctx, s, kBos);
  CHECK(out.state.global_history.size() == 1);
  CHECK(out.state.local_history.size() == 1);
  CHECK(std::abs(total(probs_of(out)) - 1.0) <= 1e-12);
}

TEST_CASE("one HACA step equals the composition of its sub-operations") {
  HacaConfig c = tiny_config(ModelVariant::kHaca);
  Model m = Model::build(c);
  auto batch = random_batch(c, 1, 7, 5, 3, 21);
  auto enc = m.encode(batch[0]);
  const DecoderParams& d = m.decoder();

  const int words[] = {kBos};
  Tensor emb = ops::gather_rows(d.embedding, words);
  // Global decoder over the high-level sequences, query h_0 = 0.
  Tensor hg = Tensor::zeros({1, 3});
  std::vector<Tensor> gctx{soft_attention(hg, enc[0].high, d.global->source_attention[0]).context,
                           soft_attention(hg, enc[1].high, d.global->source_attention[1]).context,
                           Tensor::zeros({1, 3})};
  Tensor fg = cross_modal_fuse(gctx, hg, *d.global->fusion).context;
  LstmStep g = lstm_step(ops::concat({fg, emb}), hg, hg, d.global->lstm);
  // Local decoder over the low-level sequences plus the global output.
  Tensor hl = Tensor::zeros({1, 4});
  std::vector<Tensor> lctx{soft_attention(hl, enc[0].low, d.local.source_attention[0]).context,
                           soft_attention(hl, enc[1].low, d.local.source_attention[1]).context,
                           Tensor::zeros({1, 4})};
  Tensor fl = cross_modal_fuse(lctx, hl, *d.local.fusion).context;
  LstmStep l = lstm_step(ops::concat({fl, emb, g.output}), hl, hl, d.local.lstm);
  Tensor expected = project_vocab(l.output, d.projection);

  StepOutput out = m.step(m.prepare(batch[0]), m.initial_state(), kBos);
  Tensor probs = probs_of(out);
  for (std::size_t i = 0; i < 7; ++i) CHECK(probs.at(0, i) == doctest::Approx(expected.at(0, i)).epsilon(1e-13));
  for (std::size_t j = 0; j < 3; ++j) CHECK(out.state.global_hidden.at(0, j) == doctest::Approx(g.hidden.at(0, j)));
}

TEST_CASE("two-step unroll matches sub-operation composition for the local decoder") {
  HacaConfig c = tiny_config(ModelVariant::kCmAttVad);
  Model m = Model::build(c);
  auto batch = random_batch(c, 1, 6, 4, 3, 22);
  auto enc = m.encode(batch[0]);
  const auto& d = m.decoder();
  auto step = [&](const Tensor& h, const Tensor& cell, std::span<const Tensor> history, int word) {
    const int ids[] = {word};
    std::vector<Tensor> ctx{soft_attention(h, enc[0].low, d.local.source_attention[0]).context,
                            soft_attention(h, enc[1].low, d.local.source_attention[1]).context,
                            decoder_self_attention(history, h, *d.local.self_attention, 4)};
    Tensor f = cross_modal_fuse(ctx, h, *d.local.fusion).context;
    return lstm_step(ops::concat({f, ops::gather_rows(d.embedding, ids)}), h, cell, d.local.lstm);
  };
  Tensor z = Tensor::zeros({1, 4});
  LstmStep s1 = step(z, z, {}, kBos);
  std::vector<Tensor> hist{s1.hidden};
  LstmStep s2 = step(s1.hidden, s1.cell, hist, 5);
  Tensor expected = project_vocab(s2.output, d.projection);

  DecodingContext ctx = m.prepare(batch[0]);
  StepOutput o1 = m.step(ctx, m.initial_state(), kBos);
  StepOutput o2 = m.step(ctx, o1.state, 5);
  Tensor probs = probs_of(o2);
  for (std::size_t i = 0; i < 7; ++i) CHECK(probs.at(0, i) == doctest::Approx(expected.at(0, i)).epsilon(1e-13));
}

TEST_CASE("variant wiring") {
  std::mt19937_64 rng(77);

  SUBCASE("att_v ignores the audio stream") {
    HacaConfig c = tiny_config(ModelVariant::kAttV);
    Model m = Model::build(c);
    auto batch = random_batch(c, 1, 6, 4, 4, 5);
    Sample other = batch[0];
    perturb(other.streams[1].values, rng);
    auto a = forward_teacher_forced(m, batch[0], batch[0].references[0]);
    auto b = forward_teacher_forced(m, other, batch[0].references[0]);
    for (std::size_t t = 0; t < a.size(); ++t)
      for (std::size_t i = 0; i < 7; ++i) CHECK(a[t].at(0, i) == b[t].at(0, i));
  }

  SUBCASE("cm_att_va ignores decoder history; cm_att_vad does not") {
    for (ModelVariant v : {ModelVariant::kCmAttVa, ModelVariant::kCmAttVad}) {
      HacaConfig c = tiny_config(v);
      Model m = Model::build(c);
      auto batch = random_batch(c, 1, 6, 4, 4, 5);
      DecodingContext ctx = m.prepare(batch[0]);
      StepOutput s1 = m.step(ctx, m.initial_state(), kBos);
      DecoderState injected = s1.state;
      for (auto& h : injected.local_history) {
        std::vector<double> noise(h.size());
        perturb(noise, rng);
        h = Tensor::constant(h.shape(), noise);
      }
      Tensor a = m.step(ctx, s1.state, 4).logits;
      Tensor b = m.step(ctx, injected, 4).logits;
      bool identical = true;
      for (std::size_t i = 0; i < 7; ++i) identical = identical && a.at(0, i) == b.at(0, i);
      CHECK(identical == (v == ModelVariant::kCmAttVa));
    }
  }

  SUBCASE("haca_no_align: one decoder fusing high, low and decoder contexts") {
    HacaConfig c = tiny_config(ModelVariant::kHacaNoAlign);
    Model m = Model::build(c);
    CHECK_FALSE(m.decoder().global.has_value());
    const auto& layout = m.decoder().local.layout;
    REQUIRE(layout.sources.size() == 4);
    int high = 0, low = 0;
    for (const auto& s : layout.sources) (s.high ? high : low)++;
    CHECK(high == 2);
    CHECK(low == 2);
    CHECK(layout.self_attention);
    CHECK(m.decoder().local.fusion->arity() == 5);

    // Perturbing either level of the encoded sequences changes the output.
    auto batch = random_batch(c, 1, 6, 4, 3, 5);
    auto enc = m.encode(batch[0]);
    Tensor base = m.step(prepare_decoding(m.decoder(), enc), m.initial_state(), kBos).logits;
    for (bool use_high : {true, false}) {
      auto changed = enc;
      Tensor& target = use_high ? changed[1].high : changed[1].low;
      std::vector<double> noise(target.size());
      perturb(noise, rng);
      target = Tensor::constant(target.shape(), noise);
      Tensor out = m.step(prepare_decoding(m.decoder(), changed), m.initial_state(), kBos).logits;
      bool differs = false;
      for (std::size_t i = 0; i < 7; ++i) differs = differs || out.at(0, i) != base.at(0, i);
      CHECK(differs);
    }
  }

  SUBCASE("haca: global decoder reads only high-level, local only low-level sequences") {
    HacaConfig c = tiny_config(ModelVariant::kHaca);
    Model m = Model::build(c);
    for (const auto& s : m.decoder().global->layout.sources) CHECK(s.high);
    for (const auto& s : m.decoder().local.layout.sources) CHECK_FALSE(s.high);
    CHECK(m.decoder().local.layout.takes_global_output);
  }
}

TEST_CASE("distributions sum to one and histories grow one per step") {
  for (ModelVariant v : all_variants()) {
    HacaConfig c = tiny_config(v);
    Model m = Model::build(c);
    auto batch = random_batch(c, 1, 9, 6, 6, 31);
    DecodingContext ctx = m.prepare(batch[0]);
    DecoderState s = m.initial_state();
    const auto& targets = batch[0].references[0];
    int prev = kBos;
    for (std::size_t t = 1; t <= targets.size(); ++t) {
      StepOutput out = m.step(ctx, s, prev);
      CHECK(std::abs(total(probs_of(out)) - 1.0) <= 1e-12);
      double lp_total = 0.0;
      for (double lp : out.log_probs.values()) lp_total += std::exp(lp);
      CHECK(std::abs(lp_total - 1.0) <= 1e-12);
      s = out.state;
      CHECK(s.local_history.size() == t);
      CHECK(s.global_history.size() == (v == ModelVariant::kHaca ? t : 0));
      CHECK(s.step == t);
      prev = targets[t - 1];
    }
  }
}

TEST_CASE("causality: future targets never reach earlier distributions") {
  std::mt19937_64 rng(8);
  for (ModelVariant v : all_variants()) {
    HacaConfig c = tiny_config(v);
    Model m = Model::build(c);
    auto batch = random_batch(c, 1, 7, 5, 6, 41);
    std::vector<int> gold = batch[0].references[0];
    auto base = forward_teacher_forced(m, batch[0], gold);
    std::uniform_int_distribution<int> word(4, 6);
    for (std::size_t t = 1; t <= gold.size(); ++t) {
      std::vector<int> changed = gold;
      for (std::size_t k = t - 1; k < changed.size(); ++k) changed[k] = word(rng);
      auto other = forward_teacher_forced(m, batch[0], changed);
      for (std::size_t k = 0; k < t; ++k)
        for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(base[k].at(0, i) - other[k].at(0, i)) <= 1e-12);
    }
  }
}

TEST_CASE("unknown word id is rejected") {
  HacaConfig c = tiny_config(ModelVariant::kHaca);
  Model m = Model::build(c);
  auto batch = random_batch(c, 1, 4, 4, 3, 1);
  DecodingContext ctx = m.prepare(batch[0]);
  CHECK_THROWS(m.step(ctx, m.initial_state(), 7));
  CHECK_THROWS(m.step(ctx, m.initial_state(), -1));
}

TEST_CASE("three decode steps pass the gradient check for every variant") {
  for (ModelVariant v : all_variants()) {
    HacaConfig c = tiny_config(v);
    Model m = Model::build(c);
    auto batch = random_batch(c, 2, 5, 3, 3, 51);
    GradCheckReport r = model_gradient_check(m, batch, DifferenceArithmetic::kExtended);
    for (const auto& e : r.entries) {
      INFO(variant_name(v) << " " << e.name << " " << e.max_rel_error);
      CHECK(e.flagged == 0);
    }
  }
}
