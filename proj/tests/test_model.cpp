// Copyright 2026 The haca Authors. Apache 2.0 License.

#include <cmath>
#include <set>

#include "doctest.h"
#include "haca/model_gradcheck.hpp"

using namespace haca;

namespace {

std::size_t lstm(std::size_t in, std::size_t h) { return 4 * h * in + 4 * h * h + 4 * h; }
std::size_t att(std::size_t f, std::size_t q, std::size_t a) { return a * f + a * q + a; }

}  // namespace

TEST_CASE("micro HACA parameter count matches the closed form") {
  Model m = Model::build(micro_config(ModelVariant::kHaca, 12));
  const std::size_t visual = 2 * lstm(8, 8) + att(16, 8, 8) + lstm(16, 8);
  const std::size_t audio = 2 * lstm(4, 4) + att(8, 4, 4) + lstm(8, 4);
  const std::size_t embedding = 12 * 8;
  const std::size_t global = att(8, 8, 8) + att(4, 8, 8) + att(8, 8, 8) + (8 * (8 + 4 + 8) + 8 + att(8, 8, 8)) +
                             lstm(8 + 8, 8);
  const std::size_t local = att(16, 16, 16) + att(8, 16, 16) + att(16, 16, 16) +
                            (16 * (16 + 8 + 16) + 16 + att(16, 16, 16)) + lstm(16 + 8 + 8, 16);
  const std::size_t projection = 12 * 16;
  CHECK(m.parameters().scalar_count() == visual + audio + embedding + global + local + projection);
}

TEST_CASE("att_v micro parameter count matches the closed form") {
  Model m = Model::build(micro_config(ModelVariant::kAttV, 12));
  const std::size_t expected = 2 * lstm(8, 8) + 12 * 8 + att(16, 16, 16) + lstm(16 + 8, 16) + 12 * 16;
  CHECK(m.parameters().scalar_count() == expected);
}

TEST_CASE("parameter counts grow with the variants") {
  auto count = [](ModelVariant v) { return Model::build(micro_config(v, 12)).parameters().scalar_count(); };
  CHECK(count(ModelVariant::kAttV) < count(ModelVariant::kCmAttVa));
  CHECK(count(ModelVariant::kCmAttVa) < count(ModelVariant::kCmAttVad));
  CHECK(count(ModelVariant::kCmAttVa) < count(ModelVariant::kHaca));
}

TEST_CASE("full-size initialization range") {
  HacaConfig c;
  c.visual.input_dim = 64;
  c.audio.input_dim = 32;
  c.vocab_size = 50;
  Model m = Model::build(c);
  std::size_t forget = 0;
  for (const auto& [name, tensor] : m.parameters().entries()) {
    const bool lstm_bias = name.ends_with("lstm.b") || name.ends_with(".fwd.b") ||
                           name.ends_with(".bwd.b") || name.ends_with(".high.b");
    const std::size_t h = tensor.size() / 4;
    auto v = tensor.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (lstm_bias && i >= h && i < 2 * h) {
        CHECK(v[i] == 1.0);
        ++forget;
      } else if (std::abs(v[i]) > 0.08) {
        FAIL_CHECK(name << "[" << i << "] = " << v[i]);
      }
    }
  }
  // Forget-gate slots: visual 512*2 + 256, audio 128*2 + 64, global 256, local 1024.
  CHECK(forget == 1024 + 256 + 256 + 64 + 256 + 1024);
}

TEST_CASE("same seed reproduces parameters; names are seed independent") {
  HacaConfig c = micro_config(ModelVariant::kHaca, 12);
  Model a = Model::build(c), b = Model::build(c);
  c.seed = 99;
  Model other = Model::build(c);
  const auto& ea = a.parameters().entries();
  const auto& eb = b.parameters().entries();
  const auto& eo = other.parameters().entries();
  REQUIRE(ea.size() == eb.size());
  REQUIRE(ea.size() == eo.size());
  bool any_different = false;
  std::set<std::string> names;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    CHECK(ea[i].name == eb[i].name);
    CHECK(ea[i].name == eo[i].name);
    CHECK(ea[i].tensor.shape() == eo[i].tensor.shape());
    auto va = ea[i].tensor.values(), vb = eb[i].tensor.values(), vo = eo[i].tensor.values();
    CHECK(std::equal(va.begin(), va.end(), vb.begin()));
    any_different = any_different || !std::equal(va.begin(), va.end(), vo.begin());
    names.insert(ea[i].name);
  }
  CHECK(any_different);
  CHECK(names.size() == ea.size());
}

TEST_CASE("high-level steps equal the chunk counts") {
  HacaConfig c = micro_config(ModelVariant::kHaca, 12);
  Model m = Model::build(c);
  auto batch = random_batch(c, 1, 11, 7, 4, 3);
  encoder_counters() = {};
  forward_teacher_forced(m, batch[0], batch[0].references[0]);
  CHECK(encoder_counters().high_steps == 4 + 4);
  CHECK(encoder_counters().low_steps == 11 + 7);

  Model flat = Model::build(micro_config(ModelVariant::kCmAttVa, 12));
  encoder_counters() = {};
  forward_teacher_forced(flat, batch[0], batch[0].references[0]);
  CHECK(encoder_counters().high_steps == 0);
}

TEST_CASE("single-token target and repeated evaluation") {
  HacaConfig c = micro_config(ModelVariant::kHaca, 12);
  Model m = Model::build(c);
  auto batch = random_batch(c, 1, 5, 4, 1, 4);
  REQUIRE(batch[0].references[0] == std::vector<int>{kEos});
  auto a = forward_teacher_forced(m, batch[0], batch[0].references[0]);
  auto b = forward_teacher_forced(m, batch[0], batch[0].references[0]);
  REQUIRE(a.size() == 1);
  for (std::size_t i = 0; i < 12; ++i) CHECK(a[0].at(0, i) == b[0].at(0, i));
}

TEST_CASE("zero parameters give a loss of log |V| per token") {
  for (ModelVariant v : all_variants()) {
    HacaConfig c = micro_config(v, 12);
    Model m = Model::build(c);
    m.parameters().fill(0.0);
    auto batch = random_batch(c, 3, 6, 4, 5, 8);
    CHECK(batch_loss(m, batch).item() == doctest::Approx(std::log(12.0)).epsilon(1e-12));
  }
}

TEST_CASE("batch loss is the token-weighted mean of sequence losses") {
  HacaConfig c = micro_config(ModelVariant::kCmAttVad, 12);
  Model m = Model::build(c);
  auto batch = random_batch(c, 2, 6, 4, 3, 8);
  batch[1].references[0] = {5, 6, 7, 8, kEos};
  const double s0 = sequence_nll(m, batch[0], batch[0].references[0]).item();
  const double s1 = sequence_nll(m, batch[1], batch[1].references[0]).item();
  CHECK(batch_loss(m, batch).item() == doctest::Approx((s0 + s1) / 8).epsilon(1e-14));
}

TEST_CASE("input validation") {
  HacaConfig c = micro_config(ModelVariant::kHaca, 12);
  Model m = Model::build(c);
  auto batch = random_batch(c, 1, 5, 4, 3, 4);
  Sample s = batch[0];
  s.streams[0] = ModalityStream("visual", 51, 8, std::vector<double>(51 * 8, 0.1));
  CHECK_THROWS_AS(m.encode(s), std::invalid_argument);
  CHECK_THROWS_AS(sequence_nll(m, batch[0], std::vector<int>{4, 12, kEos}), std::out_of_range);
  CHECK_THROWS_AS(sequence_nll(m, batch[0], std::vector<int>{}), std::invalid_argument);
  Sample no_audio = batch[0];
  no_audio.streams.pop_back();
  CHECK_THROWS(m.encode(no_audio));
  HacaConfig bad = c;
  bad.vocab_size = 3;
  CHECK_THROWS(Model::build(bad));
}

TEST_CASE("describe lists every parameter and the total") {
  Model m = Model::build(micro_config(ModelVariant::kHaca, 12));
  const std::string text = m.describe();
  for (const auto& e : m.parameters().entries()) CHECK(text.find(e.name) != std::string::npos);
  CHECK(text.find(std::to_string(m.parameters().scalar_count())) != std::string::npos);
}
