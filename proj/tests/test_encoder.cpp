// Copyright 2026 The haca Authors. Apache 2.0 License.

#include <cmath>
#include <random>

#include "doctest.h"
#include "haca/encoder.hpp"
#include "haca/gradcheck.hpp"

using namespace haca;

namespace {

struct Fixture {
  explicit Fixture(double range = 0.3) : factory(store, rng, range) {}
  std::mt19937_64 rng{11};
  ParameterStore store;
  ParameterFactory factory;
};

HierEncoderConfig small_config(std::size_t chunk) {
  HierEncoderConfig c;
  c.modality = "visual";
  c.input_dim = 3;
  c.low_hidden = 2;
  c.high_hidden = 3;
  c.chunk = chunk;
  return c;
}

ModalityStream random_stream(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n * d);
  for (double& x : v) x = u(rng);
  return ModalityStream("visual", n, d, v);
}

}  // namespace

TEST_CASE("chunk arithmetic against direct enumeration") {
  auto r = chunk_ranges(7, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == std::pair<std::size_t, std::size_t>{0, 3});
  CHECK(r[1] == std::pair<std::size_t, std::size_t>{3, 6});
  CHECK(r[2] == std::pair<std::size_t, std::size_t>{6, 7});
  CHECK(chunk_count(10, 10) == 1);
  CHECK(chunk_count(1, 10) == 1);
  CHECK(chunk_count(50, 1) == 50);
  CHECK_THROWS(chunk_count(5, 0));
}

TEST_CASE("single chunk when n equals s") {
  Fixture fx;
  auto cfg = small_config(5);
  auto p = HierEncoderParams::create(fx.factory, "encoder.visual", cfg);
  EncodedModality e = encode(random_stream(5, 3, fx.rng), cfg, p);
  CHECK(e.high.rows() == 1);
  REQUIRE(e.chunk_weights.size() == 1);
  CHECK(e.chunk_weights[0].size() == 5);
  CHECK(e.low.shape() == Shape{5, 4});
}

TEST_CASE("high length and chunk support for every n in [1,50] and s in [1,10]") {
  Fixture fx;
  for (std::size_t s = 1; s <= 10; ++s) {
    auto cfg = small_config(s);
    ParameterStore store;
    ParameterFactory factory(store, fx.rng, 0.3);
    auto p = HierEncoderParams::create(factory, "encoder.visual", cfg);
    for (std::size_t n = 1; n <= 50; ++n) {
      EncodedModality e = encode(random_stream(n, 3, fx.rng), cfg, p);
      const std::size_t expected_chunks = n / s + (n % s ? 1 : 0);
      REQUIRE(e.high.rows() == expected_chunks);
      REQUIRE(e.chunk_ranges.size() == expected_chunks);
      for (std::size_t j = 0; j < expected_chunks; ++j) {
        const std::size_t begin = s * j, end = std::min(s * (j + 1), n);
        CHECK(e.chunk_ranges[j].first == begin);
        CHECK(e.chunk_ranges[j].second == end);
        CHECK(e.chunk_weights[j].size() == end - begin);
        double total = 0.0;
        for (double w : e.chunk_weights[j]) total += w;
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("stride one degenerates to a stacked recurrent encoder") {
  Fixture fx;
  auto cfg = small_config(1);
  auto p = HierEncoderParams::create(fx.factory, "encoder.visual", cfg);
  ModalityStream stream = random_stream(9, 3, fx.rng);
  EncodedModality e = encode(stream, cfg, p);
  Tensor low = bilstm_run(to_tensor(stream), p.low_fwd, p.low_bwd);
  Tensor high = lstm_run(low, p.high);
  REQUIRE(e.high.shape() == high.shape());
  for (std::size_t i = 0; i < high.size(); ++i) CHECK(std::abs(e.high.values()[i] - high.values()[i]) <= 1e-12);
  for (const auto& w : e.chunk_weights) CHECK(w == std::vector<double>{1.0});
}

TEST_CASE("flat encoder skips the high-level pass") {
  Fixture fx;
  auto cfg = small_config(2);
  cfg.hierarchical = false;
  auto p = HierEncoderParams::create(fx.factory, "encoder.visual", cfg);
  CHECK_FALSE(fx.store.contains("encoder.visual.high.W"));
  EncodedModality e = encode(random_stream(6, 3, fx.rng), cfg, p);
  CHECK_FALSE(e.high.defined());
  CHECK(e.low.shape() == Shape{6, 4});
}

TEST_CASE("errors on empty input and dim mismatch") {
  Fixture fx;
  auto cfg = small_config(2);
  auto p = HierEncoderParams::create(fx.factory, "encoder.visual", cfg);
  CHECK_THROWS_AS(encode(ModalityStream("visual", 0, 3, {}), cfg, p), std::invalid_argument);
  CHECK_THROWS_AS(encode(random_stream(4, 5, fx.rng), cfg, p), ShapeError);
}

TEST_CASE("gradient reaches the first frame") {
  Fixture fx;
  auto cfg = small_config(3);
  auto p = HierEncoderParams::create(fx.factory, "encoder.visual", cfg);
  ModalityStream stream = random_stream(10, 3, fx.rng);
  Tensor frames = Tensor::parameter({10, 3}, stream.values);
  ComputationRecord rec;
  {
    RecordScope scope(rec);
    EncodedModality e = encode(frames, cfg, p);
    // Loss reads only the last high-level output.
    backward(ops::sum(ops::slice_rows(e.high, 3, 4)));
  }
  double norm = 0.0;
  for (std::size_t j = 0; j < 3; ++j) norm += std::abs(frames.grad()[j]);
  CHECK(norm > 1e-10);
}

TEST_CASE("encoder passes the gradient check with a partial final chunk") {
  Fixture fx(0.8);
  auto cfg = small_config(3);
  auto p = HierEncoderParams::create(fx.factory, "encoder.visual", cfg);
  ModalityStream stream = random_stream(7, 3, fx.rng);
  Tensor frames = Tensor::parameter({7, 3}, stream.values);
  auto params = fx.store.entries();
  params.push_back({"frames", frames});
  auto report = finite_difference_check(
      [&] {
        EncodedModality e = encode(frames, cfg, p);
        return ops::add(ops::sum(ops::tanh(e.high)), ops::sum(e.low));
      },
      params);
  for (const auto& e : report.entries) {
    INFO(e.name << " " << e.max_rel_error << " ad=" << e.worst_autodiff << " fd=" << e.worst_numeric);
    CHECK(e.flagged == 0);
  }
}

TEST_CASE("step counters") {
  Fixture fx;
  auto cfg = small_config(4);
  auto p = HierEncoderParams::create(fx.factory, "encoder.visual", cfg);
  encoder_counters() = {};
  encode(random_stream(9, 3, fx.rng), cfg, p);
  CHECK(encoder_counters().high_steps == 3);
  CHECK(encoder_counters().low_steps == 9);
}
