#include <cmath>
#include <numeric>

#include "doctest.h"
#include "kinodiff/common/error.hpp"
#include "kinodiff/denoiser/checkpoint.hpp"
#include "kinodiff/denoiser/denoiser.hpp"
#include "kinodiff/denoiser/layers.hpp"
#include "kinodiff/numerics/grad_check.hpp"
#include "kinodiff/numerics/graph.hpp"
#include "kinodiff/numerics/rng.hpp"

using namespace kinodiff;
using namespace kinodiff::denoiser;
using numerics::Graph;
using numerics::Rng;

namespace {

DenoiserConfig tiny_config() {
  DenoiserConfig c;
  c.width = 8;
  c.heads = 2;
  c.sampling_blocks = 2;
  c.resnet_blocks = 1;
  c.kernel = 3;
  c.max_context = 3;
  return c;
}

DenoiserContext random_context(Rng& rng, std::size_t k, std::size_t n, std::size_t d) {
  DenoiserContext ctx{rng.normal_tensor({k * n, d}), Tensor({k, n})};
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) ctx.mask.at(j, i) = rng.uniform() < 0.7 ? 1.0 : 0.0;
  }
  return ctx;
}

// Per head and step: softmax over self plus present neighbors, weighting values.
Tensor attention_oracle(const Tensor& q, const Tensor& ks, const Tensor& vs, const Tensor& kc, const Tensor& vc,
                        const Tensor& mask, std::size_t heads) {
  const std::size_t n = q.rows(), w = q.cols(), d = w / heads, k = mask.rows();
  Tensor out({n, w});
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      auto dot = [&](const Tensor& keys, std::size_t row) {
        double s = 0.0;
        for (std::size_t c = h * d; c < (h + 1) * d; ++c) s += q.at(i, c) * keys.at(row, c);
        return s / std::sqrt(static_cast<double>(d));
      };
      std::vector<double> logits{dot(ks, i)};
      std::vector<std::size_t> rows;
      for (std::size_t j = 0; j < k; ++j) {
        if (mask.at(j, i) > 0.5) {
          logits.push_back(dot(kc, j * n + i));
          rows.push_back(j * n + i);
        }
      }
      double z = 0.0;
      for (double l : logits) z += std::exp(l);
      for (std::size_t c = h * d; c < (h + 1) * d; ++c) {
        double acc = std::exp(logits[0]) / z * vs.at(i, c);
        for (std::size_t r = 0; r < rows.size(); ++r) acc += std::exp(logits[r + 1]) / z * vc.at(rows[r], c);
        out.at(i, c) = acc;
      }
    }
  }
  return out;
}

Tensor run_attention(const Tensor& q, const Tensor& ks, const Tensor& vs, const Tensor& kc, const Tensor& vc,
                     const Tensor& mask, std::size_t heads) {
  Graph g;
  return g.forward(neighbor_attention(g.constant(q), g.constant(ks), g.constant(vs), g.constant(kc), g.constant(vc),
                                      g.constant(mask), heads));
}

Tensor run_conv(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
  Graph g;
  return g.forward(temporal_conv(g.constant(x), g.constant(kernel), g.constant(bias)));
}

Checkpoint sample_checkpoint() {
  Rng rng(12);
  Checkpoint ck;
  ck.params = init_params(tiny_config(), rng);
  ck.normalizer = std::make_shared<const geodata::Normalizer>(
      geodata::NormMode::z_score, geodata::LocalProjection(51.5, -0.1),
      std::array<double, geodata::kFeatureCount>{1, 2, 3, 0.5, 0, 0},
      std::array<double, geodata::kFeatureCount>{100, 200, 4, 1.5, 0.25, 0.125});
  ck.schedule = {50, 1e-4, 0.2, "abc"};
  ck.step = 17;
  numerics::OptimState opt;
  opt.step = 17;
  for (const auto& [name, t] : ck.params.tensors) {
    opt.first_moment[name] = rng.normal_tensor(t.shape());
    opt.second_moment[name] = rng.normal_tensor(t.shape());
  }
  ck.optimizer = opt;
  ck.run_config = "[run]\nseed=3\n";
  return ck;
}

}  // namespace

TEST_SUITE("denoiser") {

TEST_CASE("attention weights examples") {
  Rng rng(1);
  const std::size_t n = 4, w = 4;
  const Tensor q = rng.normal_tensor({n, w});
  const Tensor ks = rng.normal_tensor({n, w});

  SUBCASE("no neighbors puts all weight on self") {
    const Tensor a = attention_weights(q, ks, Tensor({0, w}), Tensor({0, n}), 2);
    REQUIRE(a.rows() == 2 * n);
    REQUIRE(a.cols() == 1);
    for (std::size_t r = 0; r < a.rows(); ++r) CHECK(a.at(r, 0) == doctest::Approx(1.0));
  }
  SUBCASE("a neighbor with the self key splits evenly") {
    Tensor mask({1, n});
    for (std::size_t i = 0; i < n; ++i) mask.at(0, i) = 1.0;
    const Tensor a = attention_weights(q, ks, ks, mask, 2);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      CHECK(a.at(r, 0) == doctest::Approx(0.5));
      CHECK(a.at(r, 1) == doctest::Approx(0.5));
    }
  }
  SUBCASE("masked entries get zero and rows sum to one") {
    const Tensor kc = rng.normal_tensor({3 * n, w});
    Tensor mask({3, n});
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t i = 0; i < n; ++i) mask.at(j, i) = (i + j) % 2 == 0 ? 1.0 : 0.0;
    }
    const Tensor a = attention_weights(q, ks, kc, mask, 2);
    for (std::size_t h = 0; h < 2; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < 4; ++c) s += a.at(h * n + i, c);
        CHECK(s == doctest::Approx(1.0));
        for (std::size_t j = 0; j < 3; ++j) {
          if (mask.at(j, i) == 0.0) CHECK(a.at(h * n + i, 1 + j) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("neighbor attention matches a brute-force oracle") {
  Rng rng(2);
  const std::size_t n = 5, w = 6, k = 3, heads = 3;
  const Tensor q = rng.normal_tensor({n, w}), ks = rng.normal_tensor({n, w}), vs = rng.normal_tensor({n, w});
  const Tensor kc = rng.normal_tensor({k * n, w}), vc = rng.normal_tensor({k * n, w});
  Tensor mask({k, n});
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) mask.at(j, i) = rng.uniform() < 0.6 ? 1.0 : 0.0;
  }
  const Tensor got = run_attention(q, ks, vs, kc, vc, mask, heads);
  CHECK(numerics::max_abs_diff(got, attention_oracle(q, ks, vs, kc, vc, mask, heads)) < 1e-12);

  // A fully masked context is the same as no context.
  const Tensor none = run_attention(q, ks, vs, kc, vc, Tensor({k, n}), heads);
  const Tensor empty = run_attention(q, ks, vs, Tensor({0, w}), Tensor({0, w}), Tensor({0, n}), heads);
  CHECK(numerics::max_abs_diff(none, empty) < 1e-15);

  // Gradients through every input.
  Graph g;
  std::vector<numerics::Var> leaves;
  for (const Tensor* t : {&q, &ks, &vs, &kc, &vc}) leaves.push_back(g.variable(*t));
  numerics::Var out = neighbor_attention(leaves[0], leaves[1], leaves[2], leaves[3], leaves[4], g.constant(mask), heads);
  numerics::Var loss = numerics::sum(numerics::mul(out, g.constant(rng.normal_tensor({n, w}))));
  g.forward(loss);
  CHECK(numerics::grad_check_leaves(g, loss, leaves, {}) < 1e-6);
}

TEST_CASE("attention shape errors") {
  Rng rng(3);
  const Tensor q = rng.normal_tensor({4, 6});
  CHECK_THROWS_AS(run_attention(q, q, q, Tensor({0, 6}), Tensor({0, 6}), Tensor({0, 4}), 4), ShapeError);
  CHECK_THROWS_AS(run_attention(q, q, q, rng.normal_tensor({8, 6}), rng.normal_tensor({8, 6}), Tensor({1, 4}), 2),
                  ShapeError);
}

TEST_CASE("temporal convolution examples") {
  const std::size_t n = 6;
  Tensor ramp({n, 1}), ones({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    ramp.at(i, 0) = static_cast<double>(i);
    ones.at(i, 0) = 1.0;
  }
  const Tensor zero_bias({1});
  CHECK(run_conv(ramp, Tensor::matrix(1, 3, {0, 1, 0}), zero_bias) == ramp);

  // Averaging a constant: interior rows keep the value, edges see zero padding.
  const Tensor avg = run_conv(ones, Tensor::matrix(1, 3, {1.0 / 3, 1.0 / 3, 1.0 / 3}), zero_bias);
  for (std::size_t i = 1; i + 1 < n; ++i) CHECK(avg.at(i, 0) == doctest::Approx(1.0));
  CHECK(avg.at(0, 0) == doctest::Approx(2.0 / 3));

  // out[i] = x[i + 1] - x[i - 1] on the interior of a ramp.
  const Tensor diff = run_conv(ramp, Tensor::matrix(1, 3, {1, 0, -1}), Tensor::vector({0.5}));
  for (std::size_t i = 1; i + 1 < n; ++i) CHECK(diff.at(i, 0) == doctest::Approx(2.5));

  CHECK_THROWS_AS(run_conv(ramp, Tensor::matrix(1, 2, {1, 1}), zero_bias), ShapeError);
  CHECK_THROWS_AS(run_conv(ramp, Tensor::matrix(1, 7, {1, 1, 1, 1, 1, 1, 1}), zero_bias), ShapeError);
  CHECK_THROWS_AS(run_conv(ramp, Tensor::matrix(2, 3, {0, 1, 0, 0, 1, 0}), zero_bias), ShapeError);
}

TEST_CASE("layer norm normalizes rows") {
  Rng rng(4);
  Tensor x = rng.normal_tensor({5, 16});
  for (double& v : x.storage()) v = 3.0 * v + 7.0;
  Tensor gain({16}), bias({16});
  for (std::size_t c = 0; c < 16; ++c) gain[c] = 1.0;
  Graph g;
  const Tensor y = g.forward(layer_norm(g.constant(x), g.constant(gain), g.constant(bias)));
  for (std::size_t r = 0; r < 5; ++r) {
    double m = 0.0, s = 0.0;
    for (std::size_t c = 0; c < 16; ++c) m += y.at(r, c);
    m /= 16.0;
    for (std::size_t c = 0; c < 16; ++c) s += (y.at(r, c) - m) * (y.at(r, c) - m);
    CHECK(std::abs(m) < 1e-6);
    CHECK(std::abs(s / 16.0 - 1.0) < 1e-4);
  }
}

TEST_CASE("layer gradients") {
  Rng rng(5);
  const Tensor x = rng.normal_tensor({6, 4});
  Graph g;
  numerics::Var xv = g.variable(x);
  numerics::Var gain = g.variable(rng.normal_tensor({4}));
  numerics::Var bias = g.variable(rng.normal_tensor({4}));
  numerics::Var kernel = g.variable(rng.normal_tensor({4, 3}));
  numerics::Var w = g.variable(rng.normal_tensor({4, 4}));
  numerics::Var y = linear(temporal_conv(layer_norm(xv, gain, bias), kernel, bias), w, bias);
  numerics::Var loss = numerics::sum(numerics::mul(y, g.constant(rng.normal_tensor({6, 4}))));
  g.forward(loss);
  CHECK(numerics::grad_check_leaves(g, loss, {xv, gain, bias, kernel, w}, {}) < 1e-6);
}

TEST_CASE("denoiser shapes and validation") {
  Rng rng(6);
  const DenoiserConfig c = tiny_config();
  const DenoiserParams p = init_params(c, rng);
  CHECK_NOTHROW(check_params(p));
  const std::size_t n = 12;
  const Tensor x = rng.normal_tensor({n, c.features});
  const Prediction out = predict(p, x, 0.5, random_context(rng, 2, n, c.features));
  CHECK(out.eps.rows() == n);
  CHECK(out.eps.cols() == c.features);
  CHECK(out.kinematics.rows() == n);
  CHECK(out.kinematics.cols() == 2);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::abs(out.kinematics.at(i, 0)) <= c.kappa_max);
    CHECK(std::abs(out.kinematics.at(i, 1)) <= c.a_max);
  }

  CHECK_THROWS_AS(predict(p, x, 0.0, empty_context(n, c.features)), InputError);
  CHECK_THROWS_AS(predict(p, x, 1.5, empty_context(n, c.features)), InputError);
  CHECK_THROWS_AS(predict(p, rng.normal_tensor({n, 4}), 0.5, empty_context(n, c.features)), ShapeError);

  DenoiserParams broken = p;
  broken.tensors.erase(broken.tensors.begin());
  CHECK_THROWS_AS(check_params(broken), ShapeError);
  DenoiserConfig bad = c;
  bad.heads = 3;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = c;
  bad.kernel = 4;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("denoiser is invariant to neighbor order") {
  Rng rng(7);
  const DenoiserConfig c = tiny_config();
  const DenoiserParams p = init_params(c, rng);
  const std::size_t n = 10, k = 3, d = c.features;
  const Tensor x = rng.normal_tensor({n, d});
  const DenoiserContext ctx = random_context(rng, k, n, d);
  const std::vector<std::size_t> order{2, 0, 1};
  DenoiserContext perm{Tensor({k * n, d}), Tensor({k, n})};
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      perm.mask.at(j, i) = ctx.mask.at(order[j], i);
      for (std::size_t f = 0; f < d; ++f) perm.neighbors.at(j * n + i, f) = ctx.neighbors.at(order[j] * n + i, f);
    }
  }
  const Prediction a = predict(p, x, 0.3, ctx), b = predict(p, x, 0.3, perm);
  CHECK(numerics::max_abs_diff(a.eps, b.eps) < 1e-12);
  CHECK(numerics::max_abs_diff(a.kinematics, b.kinematics) < 1e-12);

  // An all-absent context matches the empty one.
  DenoiserContext absent = ctx;
  for (double& m : absent.mask.storage()) m = 0.0;
  const Prediction e = predict(p, x, 0.3, empty_context(n, d)), z = predict(p, x, 0.3, absent);
  CHECK(numerics::max_abs_diff(e.eps, z.eps) < 1e-12);
  CHECK(numerics::max_abs_diff(predict(p, x, 0.3, ctx).eps, e.eps) > 0.0);
}

TEST_CASE("end-to-end denoiser gradients") {
  Rng rng(8);
  const DenoiserConfig c = tiny_config();
  const DenoiserParams p = init_params(c, rng);
  const std::size_t n = 8;
  Graph g;
  const BoundParams bound = bind_params(g, p.tensors, true);
  numerics::Var x = g.variable(rng.normal_tensor({n, c.features}));
  const DenoiserOutput out = denoise_forward(g, c, bound, x, 0.4, random_context(rng, 2, n, c.features));
  numerics::Var loss =
      numerics::add(numerics::sum(numerics::mul(out.eps, g.constant(rng.normal_tensor({n, c.features})))),
                    numerics::sum(numerics::mul(out.kinematics, g.constant(rng.normal_tensor({n, 2})))));
  g.forward(loss);
  std::vector<numerics::Var> leaves{x};
  for (const auto& [name, v] : bound) leaves.push_back(v);
  numerics::LeafCheckOptions opt;
  opt.max_coords_per_leaf = 4;
  opt.seed = 3;
  CHECK(numerics::grad_check_leaves(g, loss, leaves, opt) < 1e-5);
}

TEST_CASE("step embedding separates noise levels") {
  const Tensor a = step_embedding(0.9, 16), b = step_embedding(0.5, 16), c = step_embedding(0.9, 16);
  CHECK(a.rows() == 1);
  CHECK(a.cols() == 16);
  CHECK(a == c);
  CHECK(numerics::max_abs_diff(a, b) > 1e-3);
  const Tensor pe = position_encoding(5, 8);
  CHECK(pe.rows() == 5);
  CHECK(numerics::max_abs_diff(step_embedding(0.99, 8), step_embedding(0.98, 8)) > 0.0);
}

TEST_CASE("checkpoint round-trip") {
  const Checkpoint ck = sample_checkpoint();
  const std::string bytes = serialize_checkpoint(ck);
  CHECK(bytes.rfind("KDIFFCKP", 0) == 0);
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back.params.config == ck.params.config);
  CHECK(back.params.tensors == ck.params.tensors);
  CHECK(*back.normalizer == *ck.normalizer);
  CHECK(back.schedule == ck.schedule);
  CHECK(back.step == 17);
  REQUIRE(back.optimizer.has_value());
  CHECK(back.optimizer->step == 17);
  CHECK(back.optimizer->first_moment == ck.optimizer->first_moment);
  CHECK(back.optimizer->second_moment == ck.optimizer->second_moment);
  CHECK(back.run_config == ck.run_config);
  CHECK(serialize_checkpoint(back) == bytes);
}

TEST_CASE("checkpoint errors") {
  const Checkpoint ck = sample_checkpoint();
  const std::string bytes = serialize_checkpoint(ck);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad_magic), InputError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), InputError);
  CHECK_THROWS_AS(deserialize_checkpoint(""), InputError);

  // Tensors sized for a different width than the stored configuration.
  Checkpoint mismatched = ck;
  mismatched.params.config.width = 16;
  mismatched.params.config.heads = 2;
  mismatched.optimizer.reset();
  CHECK_THROWS_AS(deserialize_checkpoint(serialize_checkpoint(mismatched)), ShapeError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/model.ckpt"), InputError);
}

}  // TEST_SUITE
