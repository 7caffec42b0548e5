// Copyright 2026 The haca Authors. Apache 2.0 License.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "haca/model_gradcheck.hpp"
#include "haca/synth.hpp"
#include "haca/training.hpp"

using namespace haca;

namespace {

SynthDataset small_synth(std::size_t train, std::uint64_t seed = 3) {
  SynthSpec spec;
  spec.train_samples = train;
  spec.val_samples = 4;
  spec.test_samples = 0;
  spec.seed = seed;
  return synth_dataset(spec);
}

std::vector<std::vector<real>> snapshot(const Model& m) {
  std::vector<std::vector<real>> out;
  for (const auto& e : m.parameters().entries()) {
    auto v = e.tensor.values();
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

ParameterStore scalar_store(real x) {
  ParameterStore store;
  store.add("x", Tensor::parameter({1}, {x}));
  return store;
}

}  // namespace

TEST_CASE("cross-entropy hand values") {
  std::vector<std::vector<double>> p{{0.2, 0.5, 0.3}, {0.6, 0.3, 0.1}};
  // Zero-based ids 1 and 1 select 0.5 and 0.3.
  CHECK(cross_entropy_loss(p, std::vector<int>{1, 1}) == doctest::Approx(1.897).epsilon(1e-3 / 1.897));
  CHECK(cross_entropy_loss(p, std::vector<int>{1, 1}) == -(std::log(0.5) + std::log(0.3)));
  CHECK(cross_entropy_loss(p, std::vector<int>{2, 0}) == doctest::Approx(-(std::log(0.3) + std::log(0.6))));

  std::vector<std::vector<double>> uniform(5, std::vector<double>(7, 1.0 / 7));
  CHECK(cross_entropy_loss(uniform, std::vector<int>{0, 3, 6, 2, 1}) / 5 == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  std::vector<std::vector<double>> one_hot{{0, 1, 0}, {1, 0, 0}};
  CHECK(cross_entropy_loss(one_hot, std::vector<int>{1, 0}) == 0.0);

  CHECK_THROWS_AS(cross_entropy_loss(p, std::vector<int>{1, 3}), std::out_of_range);
  CHECK_THROWS_AS(cross_entropy_loss(p, std::vector<int>{1}), std::invalid_argument);
  CHECK_THROWS_AS(cross_entropy_loss({}, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("gradient clipping") {
  std::vector<real> g{15, -15, 3, -10, 10, 0};
  clip_gradients(g, -10, 10);
  CHECK(g == std::vector<real>{10, -10, 3, -10, 10, 0});
  const auto once = g;
  clip_gradients(g, -10, 10);
  CHECK(g == once);
}

TEST_CASE("adadelta first step matches the closed form") {
  const double rho = 0.95, eps = 1e-6, lr = 0.7, g = 2.5;
  ParameterStore store = scalar_store(1.0);
  Adadelta opt(store, rho, eps);
  store.entries()[0].tensor.mutable_grad()[0] = g;
  opt.step(store, lr);
  const double dx = -lr * (std::sqrt(eps) / std::sqrt((1 - rho) * g * g + eps)) * g;
  CHECK(store.find("x").item() == doctest::Approx(1.0 + dx).epsilon(1e-15));
  CHECK(opt.squared_gradients()[0][0] == doctest::Approx((1 - rho) * g * g).epsilon(1e-15));
}

TEST_CASE("adadelta with zero gradient leaves parameters and decays accumulators") {
  ParameterStore store = scalar_store(0.3);
  Adadelta opt(store, 0.95, 1e-6);
  store.entries()[0].tensor.mutable_grad()[0] = 1.0;
  opt.step(store, 1.0);
  const real x = store.find("x").item();
  const real eg = opt.squared_gradients()[0][0];
  const real ed = opt.squared_updates()[0][0];
  store.zero_grad();
  opt.step(store, 1.0);
  CHECK(store.find("x").item() == x);
  CHECK(opt.squared_gradients()[0][0] == doctest::Approx(0.95 * eg).epsilon(1e-15));
  CHECK(opt.squared_updates()[0][0] == doctest::Approx(0.95 * ed).epsilon(1e-15));
}

TEST_CASE("adadelta on a scalar quadratic is non-increasing after step 5") {
  ParameterStore store = scalar_store(3.0);
  Adadelta opt(store, 0.95, 1e-6);
  auto loss = [&] {
    const real x = store.find("x").item();
    return 0.5 * x * x;
  };
  std::vector<real> history{loss()};
  for (int step = 1; step <= 200; ++step) {
    store.entries()[0].tensor.mutable_grad()[0] = store.find("x").item();
    opt.step(store, 1.0);
    history.push_back(loss());
  }
  for (std::size_t k = 6; k < history.size(); ++k) CHECK(history[k] <= history[k - 1]);
  CHECK(history.back() < history.front());
}

TEST_CASE("adadelta rejects a non-finite gradient before changing anything") {
  ParameterStore store;
  store.add("a", Tensor::parameter({2}, {1.0, 2.0}));
  store.add("b", Tensor::parameter({1}, {3.0}));
  Adadelta opt(store, 0.95, 1e-6);
  store.entries()[0].tensor.mutable_grad()[0] = 1.0;
  store.entries()[1].tensor.mutable_grad()[0] = std::numeric_limits<real>::quiet_NaN();
  CHECK_THROWS_WITH_AS(opt.step(store, 1.0), doctest::Contains("'b'"), TrainingError);
  CHECK(store.find("a").values()[0] == 1.0);
  CHECK(opt.squared_gradients()[0][0] == 0.0);
}

TEST_CASE("plateau rule") {
  CHECK(lr_plateau(std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, 1.0) == 1.0);
  CHECK(lr_plateau(std::vector<double>{0.3, 0.3, 0.3, 0.3, 0.3}, 1.0) == 0.5);
  std::vector<double> every_third;
  for (int i = 0; i < 30; ++i) every_third.push_back(i / 3 * 0.1);
  CHECK(lr_plateau(every_third, 1.0) == 1.0);
  std::vector<double> flat(9, 0.2);
  CHECK(lr_plateau(flat, 1.0) == 0.25);
  CHECK_THROWS(lr_plateau(std::vector<double>{}, 1.0));

  PlateauScheduler s(2.0, 2, 0.1);
  CHECK_FALSE(s.observe(0.5));
  CHECK_FALSE(s.observe(0.5));
  CHECK(s.observe(0.4));
  CHECK(s.lr() == doctest::Approx(0.2));
  CHECK(s.bad_epochs() == 0);
}

TEST_CASE("scheduled sampling decisions") {
  std::mt19937_64 rng(11);
  const auto before = rng;
  for (int i = 0; i < 100; ++i) CHECK(scheduled_sample(1.0, rng));
  for (int i = 0; i < 100; ++i) CHECK_FALSE(scheduled_sample(0.0, rng));
  CHECK(rng == before);
  int gold = 0;
  for (int i = 0; i < 10000; ++i) gold += scheduled_sample(0.5, rng) ? 1 : 0;
  CHECK(gold >= 4800);
  CHECK(gold <= 5200);
}

TEST_CASE("teacher forcing through the input policy equals the plain path bitwise") {
  HacaConfig c = micro_config(ModelVariant::kHaca, 12);
  Model m = Model::build(c);
  auto batch = random_batch(c, 2, 7, 5, 4, 21);
  ForwardOptions gold;
  gold.input_policy = [](std::size_t, int gold_prev, const Tensor&) { return gold_prev; };
  CHECK(batch_loss(m, batch).item() == batch_loss(m, batch, gold).item());

  std::size_t calls = 0;
  ForwardOptions self_fed;
  self_fed.input_policy = [&](std::size_t t, int, const Tensor& lp) {
    CHECK(t >= 2);
    ++calls;
    auto v = lp.values();
    return static_cast<int>(std::max_element(v.begin() + kEos, v.end()) - v.begin());
  };
  sequence_nll(m, batch[0], batch[0].references[0], self_fed);
  CHECK(calls == batch[0].references[0].size() - 1);
}

TEST_CASE("seeded training is bitwise reproducible") {
  SynthDataset d = small_synth(12);
  HacaConfig c = micro_config(ModelVariant::kHaca, d.vocab.size(), 8, 4);
  c.dropout = 0.3;
  TrainConfig t;
  t.batch_size = 4;
  t.max_epochs = 3;
  t.learning_rate = 5.0;
  Trainer a(c, t), b(c, t);
  auto ha = a.train(d.train.samples, d.val.samples);
  auto hb = b.train(d.train.samples, d.val.samples);
  REQUIRE(ha.size() == 3);
  for (std::size_t i = 0; i < ha.size(); ++i) CHECK(ha[i].csv_row() == hb[i].csv_row());
  CHECK(snapshot(a.model()) == snapshot(b.model()));
  CHECK(ha[2].teacher_forcing_prob == 0.75);
}

TEST_CASE("shuffling flag controls the batch order") {
  SynthDataset d = small_synth(16);
  HacaConfig c = micro_config(ModelVariant::kAttV, d.vocab.size(), 8, 4);
  TrainConfig t;
  t.batch_size = 8;
  t.max_epochs = 1;
  t.shuffle = false;
  Trainer fixed(c, t);
  fixed.run_epoch(d.train.samples, {});
  std::vector<std::size_t> identity(16);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  CHECK(fixed.last_order() == identity);
  t.shuffle = true;
  Trainer shuffled(c, t);
  shuffled.run_epoch(d.train.samples, {});
  CHECK(shuffled.last_order() != identity);
  auto sorted = shuffled.last_order();
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == identity);
}

TEST_CASE("resuming from a checkpoint continues the exact trajectory") {
  SynthDataset d = small_synth(10);
  HacaConfig c = micro_config(ModelVariant::kCmAttVad, d.vocab.size(), 8, 4);
  c.dropout = 0.2;
  TrainConfig t;
  t.batch_size = 3;
  t.max_epochs = 4;
  t.learning_rate = 3.0;
  t.plateau_patience = 1;

  Trainer straight(c, t);
  auto full = straight.train(d.train.samples, d.val.samples);

  Trainer first(c, t);
  first.train(d.train.samples, d.val.samples, [](const EpochMetrics& m) { return m.epoch < 2; });
  CHECK(first.epoch() == 2);
  Checkpoint saved = decode_checkpoint(encode_checkpoint(first.checkpoint()));
  Trainer resumed(saved, t);
  CHECK(resumed.epoch() == 2);
  auto rest = resumed.train(d.train.samples, d.val.samples);
  REQUIRE(rest.size() == 2);
  CHECK(rest[0].epoch == 3);
  CHECK(rest[0].csv_row() == full[2].csv_row());
  CHECK(rest[1].csv_row() == full[3].csv_row());
  CHECK(snapshot(resumed.model()) == snapshot(straight.model()));
  CHECK(resumed.lr() == straight.lr());
}

TEST_CASE("micro-batch loss decreases over 20 updates for most seeds") {
  int passed = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    HacaConfig c = micro_config(ModelVariant::kHaca, 12);
    c.seed = seed;
    auto batch = random_batch(c, 4, 6, 5, 4, 100 + seed);
    TrainConfig t;
    Trainer trainer(c, t);
    std::vector<const Sample*> ptrs;
    for (const auto& s : batch) ptrs.push_back(&s);
    const double before = batch_loss(trainer.model(), batch).item();
    for (int i = 0; i < 20; ++i) trainer.train_batch(ptrs, 1.0);
    const double after = batch_loss(trainer.model(), batch).item();
    passed += after < before ? 1 : 0;
  }
  CHECK(passed >= 4);
}

TEST_CASE("metrics row layout and empty validation") {
  SynthDataset d = small_synth(4);
  HacaConfig c = micro_config(ModelVariant::kAttV, d.vocab.size(), 8, 4);
  TrainConfig t;
  t.max_epochs = 1;
  Trainer trainer(c, t);
  EpochMetrics m = trainer.run_epoch(d.train.samples, {});
  CHECK(EpochMetrics::csv_header() == "epoch,train_loss,val_loss,val_bleu4,lr,teacher_forcing_prob");
  CHECK(std::isnan(m.val_loss));
  CHECK(m.train_loss > 0.0);
  CHECK(m.csv_row().starts_with("1,"));
  CHECK_THROWS_AS(trainer.run_epoch({}, {}), TrainingError);
}
