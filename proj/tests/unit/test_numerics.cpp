#include <cmath>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "kinodiff/common/error.hpp"
#include "kinodiff/numerics/adam.hpp"
#include "kinodiff/numerics/grad_check.hpp"
#include "kinodiff/numerics/graph.hpp"
#include "kinodiff/numerics/rng.hpp"

using namespace kinodiff;
using namespace kinodiff::numerics;

namespace {

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor t = rng.normal_tensor({r, c});
  for (double& v : t.storage()) v *= scale;
  return t;
}

// Contracts an op output with fixed random weights so every output entry
// contributes a distinct gradient.
double check_unary(const std::function<Var(Var)>& op, const Tensor& point, std::uint64_t seed = 1) {
  Rng rng(seed);
  Tensor probe;
  return grad_check(
      [&](Graph& g, Var x) {
        Var y = op(x);
        const Tensor& shape_src = g.forward(y);
        if (probe.shape() != shape_src.shape() || probe.size() != shape_src.size()) {
          probe = rng.normal_tensor(shape_src.shape());
        }
        return sum(mul(y, g.constant(probe)));
      },
      point, 1e-6);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("tensor basics") {
  Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.at(1, 2) == 6.0);
  CHECK(Tensor::vector({1, 2}).rows() == 1);
  CHECK(Tensor::scalar(2.5).item() == 2.5);
  CHECK_THROWS_AS(m.item(), ShapeError);
  CHECK(m.reshaped({3, 2}).at(2, 1) == 6.0);
  CHECK_THROWS_AS(m.reshaped({4, 2}), ShapeError);
  CHECK(max_abs_diff(m, Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 7})) == 1.0);
  m.at(0, 0) = std::nan("");
  CHECK_FALSE(m.all_finite());
}

TEST_CASE("rng streams are reproducible and forks independent of draw history") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42);
  const Rng fresh_fork = Rng(42).fork(3);
  c.uniform();
  Rng f1 = c.fork(3);
  Rng f2 = fresh_fork;
  CHECK(f1.next_u64() == f2.next_u64());
  CHECK(Rng(42).fork(3).next_u64() != Rng(42).fork(4).next_u64());
}

TEST_CASE("rng distributions") {
  Rng rng(7);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  // Standard errors: 1/sqrt(n) for the mean, sqrt(2/n) for the variance.
  CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[rng.index(5)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("graph forward, staleness and backward") {
  Graph g;
  Var a = g.variable(Tensor::vector({1.0, 2.0}));
  Var b = g.constant(Tensor::vector({3.0, 4.0}));
  Var y = sum(mul(add(a, b), a));  // sum((a + b) a)
  CHECK_THROWS(g.value(y));
  CHECK(g.forward(y).item() == doctest::Approx(1 * 4 + 2 * 6));
  const GradMap grads = g.backward(y);
  // d/da = 2a + b
  const Tensor& ga = grads.at(a.id);
  CHECK(ga[0] == doctest::Approx(5.0));
  CHECK(ga[1] == doctest::Approx(8.0));
  CHECK(grads.count(b.id) == 0);
  g.set_value(a, Tensor::vector({0.0, 0.0}));
  CHECK_THROWS(g.value(y));
  CHECK(g.forward(y).item() == doctest::Approx(0.0));
}

TEST_CASE("elementwise op gradients") {
  Rng rng(3);
  const Tensor p = random_matrix(rng, 3, 4);
  CHECK(check_unary([](Var x) { return identity(x); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return scale(x, -2.5); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return add_scalar(x, 0.7); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return square(x); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return exp(x); }, p) < 1e-6);
  CHECK(check_unary([](Var x) { return tanh(x); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return sin(x); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return cos(x); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return silu(x); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return mul(x, x); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return sub(x, scale(x, 0.3)); }, p) < 1e-7);
}

TEST_CASE("reduction and matrix op gradients") {
  Rng rng(4);
  const Tensor p = random_matrix(rng, 4, 3);
  const Tensor w = random_matrix(rng, 3, 5);
  const Tensor bias = rng.normal_tensor({3});
  CHECK(check_unary([](Var x) { return mean(square(x)); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return row_sum(x); }, p) < 1e-7);
  CHECK(check_unary([&](Var x) { return matmul(x, x.graph->constant(w)); }, p) < 1e-7);
  CHECK(check_unary([&](Var x) { return matmul(x.graph->constant(w.reshaped({5, 3})), slice_rows(x, 0, 3)); }, p) <
        1e-7);
  CHECK(check_unary([&](Var x) { return add_row(x, x.graph->constant(bias)); }, p) < 1e-7);
  CHECK(check_unary([&](Var x) { return add_row(x.graph->constant(p), slice_rows(x, 1, 2)); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return softmax_rows(x); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return slice_cols(x, 1, 3); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return concat_cols({x, slice_cols(x, 0, 1), square(x)}); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return affine_cols(x, {2.0, -1.0, 0.5}, {1.0, 0.0, 3.0}); }, p) < 1e-7);
  CHECK(check_unary([](Var x) { return central_diff_rows(x, 0.5, {false, true, false}); }, p) < 1e-7);
}

TEST_CASE("softmax rows sum to one") {
  Graph g;
  Var s = softmax_rows(g.constant(Tensor::matrix(2, 3, {1000, 1001, 1002, -5, 0, 5})));
  const Tensor& v = g.forward(s);
  for (std::size_t r = 0; r < 2; ++r) CHECK(v.at(r, 0) + v.at(r, 1) + v.at(r, 2) == doctest::Approx(1.0));
  CHECK(v.all_finite());
}

TEST_CASE("central differences") {
  // Quadratics are differentiated exactly by central differences.
  const double dt = 0.25;
  Tensor x({6, 1});
  for (std::size_t i = 0; i < 6; ++i) {
    const double t = dt * static_cast<double>(i);
    x.at(i, 0) = 3.0 * t * t - 2.0 * t + 1.0;
  }
  Graph g;
  const Tensor& d = g.forward(central_diff_rows(g.constant(x), dt, {false}));
  REQUIRE(d.rows() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(d.at(i, 0) == doctest::Approx(6.0 * dt * (i + 1) - 2.0).epsilon(1e-12));

  // Wrapped columns take the short way round the circle.
  const double pi = std::numbers::pi;
  Graph g2;
  Tensor a = Tensor::matrix(3, 1, {pi - 0.1, -pi + 0.05, -pi + 0.1});
  const Tensor& w = g2.forward(central_diff_rows(g2.constant(a), 1.0, {true}));
  CHECK(w.at(0, 0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(g2.forward(central_diff_rows(g2.constant(a), 1.0, {true, false})), ShapeError);
}

TEST_CASE("shape errors name the op") {
  Graph g;
  Var a = g.constant(Tensor({2, 3}));
  Var b = g.constant(Tensor({2, 2}));
  CHECK_THROWS_AS(g.forward(add(a, b)), ShapeError);
  CHECK_THROWS_AS(g.forward(matmul(a, a)), ShapeError);
  try {
    g.forward(matmul(a, a));
    FAIL("matmul accepted mismatched shapes");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("matmul") != std::string::npos);
  }
}

TEST_CASE("grad_check_leaves restores values") {
  Rng rng(9);
  Graph g;
  const Tensor av = random_matrix(rng, 2, 2);
  Var a = g.variable(av);
  Var b = g.variable(random_matrix(rng, 2, 2));
  Var y = sum(square(matmul(a, b)));
  g.forward(y);
  CHECK(grad_check_leaves(g, y, {a, b}, {}) < 1e-6);
  CHECK(g.value(a) == av);
}

TEST_CASE("adam first step matches the closed form") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  OptimState st{cfg, 0, {}, {}};
  ParamMap params{{"w", Tensor::vector({1.0, -2.0, 0.5})}};
  ParamMap grads{{"w", Tensor::vector({0.3, -4.0, 0.0})}};
  adam_step(params, grads, st);
  // Bias-corrected moments at step 1 are g and g^2, so the step is lr g / (|g| + eps).
  const Tensor& w = params.at("w");
  CHECK(w[0] == doctest::Approx(1.0 - 0.1 * 0.3 / (0.3 + 1e-8)));
  CHECK(w[1] == doctest::Approx(-2.0 + 0.1 * 4.0 / (4.0 + 1e-8)));
  CHECK(w[2] == 0.5);
  CHECK(st.step == 1);

  // Second step against an oracle recomputation.
  const double g2 = 0.1;
  ParamMap grads2{{"w", Tensor::vector({g2, 0.0, 0.0})}};
  const double before = w[0];
  adam_step(params, grads2, st);
  const double m = 0.9 * (0.1 * 0.3) + 0.1 * g2;
  const double v = 0.999 * (0.001 * 0.09) + 0.001 * g2 * g2;
  const double mh = m / (1 - 0.9 * 0.9), vh = v / (1 - 0.999 * 0.999);
  CHECK(params.at("w")[0] == doctest::Approx(before - 0.1 * mh / (std::sqrt(vh) + 1e-8)));
}

TEST_CASE("adam rejects bad gradients without side effects") {
  OptimState st;
  ParamMap params{{"w", Tensor::vector({1.0})}};
  const ParamMap before = params;
  CHECK_THROWS_AS(adam_step(params, {{"w", Tensor::vector({std::nan("")})}}, st), NumericError);
  CHECK_THROWS_AS(adam_step(params, {{"w", Tensor::vector({1.0, 2.0})}}, st), ShapeError);
  CHECK(params == before);
  CHECK(st.step == 0);
}

}  // TEST_SUITE
