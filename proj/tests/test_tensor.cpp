// Copyright 2026 The haca Authors. Apache 2.0 License.

#include <cmath>
#include <random>

#include "doctest.h"
#include "haca/gradcheck.hpp"
#include "haca/tensor.hpp"

using namespace haca;

namespace {

Tensor random_param(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = u(rng);
  return Tensor::parameter(std::move(shape), std::move(v));
}

void check_primitive(const std::function<Tensor()>& f, std::vector<NamedTensor> params) {
  auto report = finite_difference_check(f, params, 1e-5, 1e-4);
  for (const auto& e : report.entries) {
    INFO(e.name << " rel err " << e.max_rel_error << " ad " << e.worst_autodiff << " fd " << e.worst_numeric);
    CHECK(e.flagged == 0);
  }
}

}  // namespace

TEST_CASE("matmul identity and hand-evaluated product") {
  Tensor eye = Tensor::constant({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor a = Tensor::constant({3, 2}, {1.5, -2, 3, 4, 0.25, 7});
  Tensor out = ops::matmul(eye, a);
  CHECK(std::vector<double>(out.values().begin(), out.values().end()) ==
        std::vector<double>(a.values().begin(), a.values().end()));

  // [1 2; 3 4] [5; 6] = [1*5 + 2*6; 3*5 + 4*6]
  Tensor p = ops::matmul(Tensor::constant({2, 2}, {1, 2, 3, 4}), Tensor::constant({2, 1}, {5, 6}));
  CHECK(p.shape() == Shape{2, 1});
  CHECK(p.at(0, 0) == 17.0);
  CHECK(p.at(1, 0) == 39.0);
}

TEST_CASE("softmax of zeros is uniform and rows sum to one") {
  Tensor s = ops::softmax(Tensor::row({0, 0, 0}));
  for (double v : s.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(4 * 7);
    for (double& x : v) x = u(rng);
    Tensor y = ops::softmax(Tensor::constant({4, 7}, v));
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < 7; ++c) {
        CHECK(y.at(r, c) >= 0.0);
        total += y.at(r, c);
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("shape mismatch names the op and both shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({2, 3});
  try {
    ops::matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("[2 x 3]") != std::string::npos);
  }
  CHECK_THROWS_AS(ops::add(Tensor::zeros({2, 3}), Tensor::zeros({2, 2})), ShapeError);
  CHECK_THROWS_AS(ops::concat({Tensor::zeros({2, 3}), Tensor::zeros({1, 3})}), ShapeError);
  CHECK_THROWS_AS(Tensor::constant({2, 2}, {1, 2, 3}), ShapeError);
}

TEST_CASE("backward of simple closed forms") {
  Tensor x = Tensor::parameter({2, 3}, {0.1, -0.2, 0.3, 0.4, 0.5, -0.6});
  {
    ComputationRecord rec;
    RecordScope scope(rec);
    backward(ops::sum(x));
  }
  for (double g : x.grad()) CHECK(g == 1.0);

  Tensor z = Tensor::parameter({1, 4}, {0, 0, 0, 0});
  {
    ComputationRecord rec;
    RecordScope scope(rec);
    backward(ops::sum(ops::tanh(z)));
  }
  for (double g : z.grad()) CHECK(g == 1.0);
}

TEST_CASE("backward contract errors") {
  Tensor x = Tensor::parameter({1, 3}, {1, 2, 3});
  CHECK_THROWS_AS(backward(ops::sum(x)), GraphError);  // no record

  ComputationRecord rec;
  RecordScope scope(rec);
  Tensor y = ops::tanh(x);
  CHECK_THROWS_AS(rec.backward(y), GraphError);  // non-scalar
  Tensor loss = ops::sum(y);
  rec.backward(loss);
  CHECK_THROWS_AS(rec.backward(loss), GraphError);  // second call without reset
  rec.reset();
  Tensor again = ops::sum(ops::tanh(x));
  CHECK_NOTHROW(rec.backward(again));
}

TEST_CASE("record is topologically ordered") {
  Tensor x = Tensor::parameter({1, 2}, {0.5, -0.5});
  ComputationRecord rec;
  RecordScope scope(rec);
  Tensor a = ops::tanh(x);
  Tensor b = ops::mul(a, a);
  Tensor c = ops::sum(b);
  CHECK(rec.size() == 3);
  CHECK(a.id() < b.id());
  CHECK(b.id() < c.id());
  CHECK(rec.contains(c));
}

TEST_CASE("random two-layer composition matches central differences") {
  std::mt19937_64 rng(11);
  Tensor x = random_param({3, 4}, rng);
  Tensor w1 = random_param({5, 4}, rng);
  Tensor b1 = random_param({1, 5}, rng);
  Tensor w2 = random_param({2, 5}, rng);
  auto f = [&] { return ops::sum(ops::sigmoid(ops::linear(ops::tanh(ops::add(ops::linear(x, w1), b1)), w2))); };
  check_primitive(f, {{"x", x}, {"w1", w1}, {"b1", b1}, {"w2", w2}});
}

TEST_CASE("every primitive passes the gradient check on random inputs") {
  std::mt19937_64 rng(5);
  Tensor a = random_param({3, 4}, rng);
  Tensor b = random_param({4, 2}, rng);
  Tensor c = random_param({3, 4}, rng);
  Tensor r = random_param({1, 4}, rng);
  Tensor wts = random_param({1, 3}, rng);
  Tensor mix = random_param({3, 4}, rng);  // fixed weighting of outputs
  mix = Tensor::constant({3, 4}, std::vector<double>(mix.values().begin(), mix.values().end()));
  auto weigh = [&](const Tensor& t) { return ops::sum(ops::mul(t, mix)); };

  SUBCASE("matmul") { check_primitive([&] { return ops::sum(ops::tanh(ops::matmul(a, b))); }, {{"a", a}, {"b", b}}); }
  SUBCASE("linear") {
    Tensor w = random_param({2, 4}, rng);
    check_primitive([&] { return ops::sum(ops::tanh(ops::linear(a, w))); }, {{"a", a}, {"w", w}});
  }
  SUBCASE("add broadcast") { check_primitive([&] { return weigh(ops::add(a, r)); }, {{"a", a}, {"r", r}}); }
  SUBCASE("sub") { check_primitive([&] { return weigh(ops::sub(a, c)); }, {{"a", a}, {"c", c}}); }
  SUBCASE("mul") { check_primitive([&] { return weigh(ops::mul(a, c)); }, {{"a", a}, {"c", c}}); }
  SUBCASE("scale") { check_primitive([&] { return weigh(ops::scale(a, -1.7)); }, {{"a", a}}); }
  SUBCASE("tanh") { check_primitive([&] { return weigh(ops::tanh(a)); }, {{"a", a}}); }
  SUBCASE("sigmoid") { check_primitive([&] { return weigh(ops::sigmoid(a)); }, {{"a", a}}); }
  SUBCASE("softmax") { check_primitive([&] { return weigh(ops::softmax(a)); }, {{"a", a}}); }
  SUBCASE("log_softmax") { check_primitive([&] { return weigh(ops::log_softmax(a)); }, {{"a", a}}); }
  SUBCASE("concat") {
    Tensor d = random_param({3, 2}, rng);
    Tensor m2 = Tensor::constant({3, 6}, std::vector<double>(18, 0.3));
    check_primitive([&] { return ops::sum(ops::mul(ops::tanh(ops::concat({a, d})), m2)); }, {{"a", a}, {"d", d}});
  }
  SUBCASE("stack and slices") {
    Tensor s = ops::slice_rows(ops::stack_rows(std::vector<Tensor>{a, c}), 1, 5);
    check_primitive(
        [&] {
          Tensor st = ops::stack_rows(std::vector<Tensor>{a, c});
          return ops::sum(ops::tanh(ops::slice_cols(ops::slice_rows(st, 1, 5), 1, 3)));
        },
        {{"a", a}, {"c", c}});
    CHECK(s.shape() == Shape{4, 4});
  }
  SUBCASE("gather_rows") {
    const int ids[] = {2, 0, 2};
    check_primitive([&] { return weigh(ops::tanh(ops::gather_rows(a, ids))); }, {{"a", a}});
  }
  SUBCASE("weighted_sum") {
    Tensor p0 = random_param({1, 4}, rng), p1 = random_param({1, 4}, rng), p2 = random_param({1, 4}, rng);
    check_primitive(
        [&] {
          std::vector<Tensor> parts{p0, p1, p2};
          return ops::sum(ops::tanh(ops::weighted_sum(ops::softmax(wts), parts)));
        },
        {{"w", wts}, {"p0", p0}, {"p1", p1}, {"p2", p2}});
  }
  SUBCASE("nll") {
    const int targets[] = {1, 3, 0};
    check_primitive([&] { return ops::nll(ops::log_softmax(a), targets); }, {{"a", a}});
  }
}

TEST_CASE("dropout is inverted and identity at p = 0") {
  std::mt19937_64 rng(1);
  Tensor x = Tensor::full({1, 2000}, 1.0);
  Tensor d = ops::dropout(x, 0.5, rng);
  double total = 0.0;
  for (double v : d.values()) {
    CHECK((v == 0.0 || v == 2.0));
    total += v;
  }
  CHECK(total / 2000.0 == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ops::dropout(x, 0.0, rng).same(x));
  CHECK_THROWS(ops::dropout(x, 1.0, rng));
}

TEST_CASE("identical graphs evaluate bitwise identically") {
  std::mt19937_64 rng(9);
  Tensor a = random_param({4, 6}, rng);
  Tensor w = random_param({3, 6}, rng);
  auto run = [&] { return ops::softmax(ops::tanh(ops::linear(a, w))); };
  Tensor y1 = run();
  Tensor y2 = run();
  CHECK(std::equal(y1.values().begin(), y1.values().end(), y2.values().begin()));
}

TEST_CASE("finite checks flag non-finite outputs") {
  set_finite_checks(true);
  CHECK_THROWS_AS(ops::scale(Tensor::row({1e308}), 10.0), std::domain_error);
  set_finite_checks(false);
  CHECK_NOTHROW(ops::scale(Tensor::row({1e308}), 10.0));
}

TEST_CASE("finite_difference_check basics") {
  SUBCASE("x squared at 3") {
    Tensor x = Tensor::parameter({1, 1}, {3.0});
    auto report = finite_difference_check([&] { return ops::mul(x, x); }, {{"x", x}});
    REQUIRE(report.entries.size() == 1);
    CHECK(report.entries[0].worst_autodiff == 6.0);
    CHECK(report.entries[0].worst_numeric == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(report.entries[0].max_rel_error < 1e-8);
    CHECK(report.passed());
  }
  SUBCASE("constant zero") {
    Tensor x = Tensor::parameter({1, 2}, {0.3, 0.4});
    auto report = finite_difference_check([&] { return Tensor::zeros({1, 1}); }, {{"x", x}});
    CHECK(report.entries[0].worst_autodiff == 0.0);
    CHECK(report.entries[0].worst_numeric == 0.0);
    CHECK(report.passed());
  }
  SUBCASE("non-deterministic function rejected") {
    Tensor x = Tensor::parameter({1, 1}, {1.0});
    int calls = 0;
    auto f = [&] { return ops::scale(x, 1.0 + 0.1 * ++calls); };
    CHECK_THROWS_AS(finite_difference_check(f, {{"x", x}}), std::runtime_error);
  }
  SUBCASE("relative error formula") {
    CHECK(gradient_relative_error(0.0, 0.0) == 0.0);
    CHECK(gradient_relative_error(1.0, 3.0) == doctest::Approx(0.5));
    CHECK(gradient_relative_error(1e-12, 0.0) == doctest::Approx(1e-4));
  }
}
