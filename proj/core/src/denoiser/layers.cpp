#include "kinodiff/denoiser/layers.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "kinodiff/common/error.hpp"

namespace kinodiff::denoiser {

using numerics::Op;
using numerics::Shape;
using numerics::shape_to_string;

namespace {

numerics::Graph& graph_of(Var a) {
  if (!a.graph) throw Error("Var is not attached to a graph");
  return *a.graph;
}

void check_matrix(const std::string& op, const std::string& what, const Tensor& t, std::size_t rows,
                  std::size_t cols) {
  if (t.rank() != 2 || t.rows() != rows || t.cols() != cols) {
    throw ShapeError(op + ": " + what + " has shape " + shape_to_string(t.shape()) + ", expected " +
                     shape_to_string({rows, cols}));
  }
}

struct AttnDims {
  std::size_t n, w, k, heads, d;
};

AttnDims attention_dims(const Tensor& q, const Tensor& ks, const Tensor& kc, const Tensor& mask, std::size_t heads) {
  const std::string op = "neighbor_attention";
  if (q.rank() != 2) throw ShapeError(op + ": query must be a matrix, got " + shape_to_string(q.shape()));
  const std::size_t n = q.rows(), w = q.cols();
  if (heads == 0 || w % heads != 0) {
    throw ShapeError(op + ": width " + std::to_string(w) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  check_matrix(op, "self keys", ks, n, w);
  if (kc.rank() != 2 || kc.cols() != w || (n > 0 && kc.rows() % n != 0)) {
    throw ShapeError(op + ": context keys have shape " + shape_to_string(kc.shape()) + " for query shape " +
                     shape_to_string(q.shape()));
  }
  const std::size_t k = n == 0 ? 0 : kc.rows() / n;
  if (k > 0) {
    check_matrix(op, "mask", mask, k, n);
  } else if (mask.size() != 0) {
    throw ShapeError(op + ": mask has shape " + shape_to_string(mask.shape()) + " but there is no context");
  }
  return {n, w, k, heads, w / heads};
}

/// Softmax weights for step i, head h: weights[0] = self, weights[1 + j] = neighbor j.
void step_weights(const AttnDims& dm, const Tensor& q, const Tensor& ks, const Tensor& kc, const Tensor& mask,
                  std::size_t i, std::size_t h, std::vector<double>& weights) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(dm.d));
  const std::size_t off = h * dm.d;
  weights.assign(1 + dm.k, 0.0);
  auto dot = [&](const Tensor& keys, std::size_t row) {
    double s = 0.0;
    for (std::size_t c = 0; c < dm.d; ++c) s += q.at(i, off + c) * keys.at(row, off + c);
    return s * scale;
  };
  double mx = weights[0] = dot(ks, i);
  std::vector<bool> on(1 + dm.k, false);
  on[0] = true;
  for (std::size_t j = 0; j < dm.k; ++j) {
    if (mask.at(j, i) == 0.0) continue;
    on[1 + j] = true;
    weights[1 + j] = dot(kc, j * dm.n + i);
    mx = std::max(mx, weights[1 + j]);
  }
  double total = 0.0;
  for (std::size_t s = 0; s <= dm.k; ++s) {
    weights[s] = on[s] ? std::exp(weights[s] - mx) : 0.0;
    total += weights[s];
  }
  for (double& w : weights) w /= total;
}

class NeighborAttentionOp final : public Op {
 public:
  explicit NeighborAttentionOp(std::size_t heads) : heads_(heads) {}
  std::string name() const override { return "neighbor_attention"; }

  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor &q = *in[0], &ks = *in[1], &vs = *in[2], &kc = *in[3], &vc = *in[4], &mask = *in[5];
    const AttnDims dm = attention_dims(q, ks, kc, mask, heads_);
    check_matrix(name(), "self values", vs, dm.n, dm.w);
    check_matrix(name(), "context values", vc, dm.k * dm.n, dm.w);
    Tensor out(Shape{dm.n, dm.w});
    std::vector<double> wts;
    for (std::size_t i = 0; i < dm.n; ++i)
      for (std::size_t h = 0; h < dm.heads; ++h) {
        step_weights(dm, q, ks, kc, mask, i, h, wts);
        const std::size_t off = h * dm.d;
        for (std::size_t c = 0; c < dm.d; ++c) {
          double s = wts[0] * vs.at(i, off + c);
          for (std::size_t j = 0; j < dm.k; ++j)
            if (wts[1 + j] != 0.0) s += wts[1 + j] * vc.at(j * dm.n + i, off + c);
          out.at(i, off + c) = s;
        }
      }
    return out;
  }

  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    const Tensor &q = *in[0], &ks = *in[1], &vs = *in[2], &kc = *in[3], &vc = *in[4], &mask = *in[5];
    const AttnDims dm = attention_dims(q, ks, kc, mask, heads_);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dm.d));
    Tensor *dq = gin[0], *dks = gin[1], *dvs = gin[2], *dkc = gin[3], *dvc = gin[4];
    std::vector<double> wts, dw(1 + dm.k);
    for (std::size_t i = 0; i < dm.n; ++i)
      for (std::size_t h = 0; h < dm.heads; ++h) {
        step_weights(dm, q, ks, kc, mask, i, h, wts);
        const std::size_t off = h * dm.d;
        // Value rows for slot s: self row i or context row j n + i.
        auto value = [&](std::size_t s, std::size_t c) {
          return s == 0 ? vs.at(i, off + c) : vc.at((s - 1) * dm.n + i, off + c);
        };
        auto key = [&](std::size_t s, std::size_t c) {
          return s == 0 ? ks.at(i, off + c) : kc.at((s - 1) * dm.n + i, off + c);
        };
        double wdw = 0.0;
        for (std::size_t s = 0; s <= dm.k; ++s) {
          dw[s] = 0.0;
          if (wts[s] == 0.0) continue;
          for (std::size_t c = 0; c < dm.d; ++c) dw[s] += g.at(i, off + c) * value(s, c);
          wdw += wts[s] * dw[s];
        }
        for (std::size_t s = 0; s <= dm.k; ++s) {
          if (wts[s] == 0.0) continue;
          const double dlogit = wts[s] * (dw[s] - wdw) * scale;
          Tensor* dv = s == 0 ? dvs : dvc;
          Tensor* dk = s == 0 ? dks : dkc;
          const std::size_t row = s == 0 ? i : (s - 1) * dm.n + i;
          for (std::size_t c = 0; c < dm.d; ++c) {
            if (dv) dv->at(row, off + c) += wts[s] * g.at(i, off + c);
            if (dq) dq->at(i, off + c) += dlogit * key(s, c);
            if (dk) dk->at(row, off + c) += dlogit * q.at(i, off + c);
          }
        }
      }
  }

 private:
  std::size_t heads_;
};

class LayerNormOp final : public Op {
 public:
  std::string name() const override { return "layer_norm"; }

  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor &x = *in[0], &gain = *in[1], &bias = *in[2];
    check(x, gain, bias);
    Tensor out(x.shape());
    const std::size_t w = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto [mu, inv] = moments(x, r);
      for (std::size_t c = 0; c < w; ++c) out.at(r, c) = (x.at(r, c) - mu) * inv * gain[c] + bias[c];
    }
    return out;
  }

  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    const Tensor &x = *in[0], &gain = *in[1];
    const std::size_t w = x.cols();
    const double wd = static_cast<double>(w);
    std::vector<double> xhat(w), dxhat(w);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto [mu, inv] = moments(x, r);
      double sum_d = 0.0, sum_dx = 0.0;
      for (std::size_t c = 0; c < w; ++c) {
        xhat[c] = (x.at(r, c) - mu) * inv;
        dxhat[c] = g.at(r, c) * gain[c];
        sum_d += dxhat[c];
        sum_dx += dxhat[c] * xhat[c];
        if (gin[1]) (*gin[1])[c] += g.at(r, c) * xhat[c];
        if (gin[2]) (*gin[2])[c] += g.at(r, c);
      }
      if (gin[0]) {
        for (std::size_t c = 0; c < w; ++c)
          gin[0]->at(r, c) += inv / wd * (wd * dxhat[c] - sum_d - xhat[c] * sum_dx);
      }
    }
  }

 private:
  static void check(const Tensor& x, const Tensor& gain, const Tensor& bias) {
    if (x.rank() != 2) throw ShapeError("layer_norm: expected a matrix, got " + shape_to_string(x.shape()));
    if (gain.size() != x.cols() || bias.size() != x.cols()) {
      throw ShapeError("layer_norm: gain " + shape_to_string(gain.shape()) + " / bias " +
                       shape_to_string(bias.shape()) + " do not match input " + shape_to_string(x.shape()));
    }
  }
  static std::pair<double, double> moments(const Tensor& x, std::size_t r) {
    const std::size_t w = x.cols();
    double mu = 0.0;
    for (std::size_t c = 0; c < w; ++c) mu += x.at(r, c);
    mu /= static_cast<double>(w);
    double var = 0.0;
    for (std::size_t c = 0; c < w; ++c) var += (x.at(r, c) - mu) * (x.at(r, c) - mu);
    var /= static_cast<double>(w);
    return {mu, 1.0 / std::sqrt(var + kLayerNormEps)};
  }
};

class TemporalConvOp final : public Op {
 public:
  std::string name() const override { return "temporal_conv"; }

  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor &x = *in[0], &w = *in[1], &b = *in[2];
    check(x, w, b);
    const std::size_t n = x.rows(), ch = x.cols(), k = w.cols(), half = (k - 1) / 2;
    Tensor out(x.shape());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + half) - static_cast<std::ptrdiff_t>(j);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
        for (std::size_t c = 0; c < ch; ++c) out.at(i, c) += w.at(c, j) * x.at(static_cast<std::size_t>(src), c);
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < ch; ++c) out.at(i, c) += b[c];
    return out;
  }

  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    const Tensor &x = *in[0], &w = *in[1];
    const std::size_t n = x.rows(), ch = x.cols(), k = w.cols(), half = (k - 1) / 2;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + half) - static_cast<std::ptrdiff_t>(j);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
        const auto s = static_cast<std::size_t>(src);
        for (std::size_t c = 0; c < ch; ++c) {
          if (gin[0]) gin[0]->at(s, c) += w.at(c, j) * g.at(i, c);
          if (gin[1]) gin[1]->at(c, j) += x.at(s, c) * g.at(i, c);
        }
      }
    if (gin[2])
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < ch; ++c) (*gin[2])[c] += g.at(i, c);
  }

 private:
  static void check(const Tensor& x, const Tensor& w, const Tensor& b) {
    const std::string op = "temporal_conv";
    if (x.rank() != 2) throw ShapeError(op + ": expected a matrix, got " + shape_to_string(x.shape()));
    if (w.rank() != 2 || w.rows() != x.cols()) {
      throw ShapeError(op + ": kernel " + shape_to_string(w.shape()) + " does not match input " +
                       shape_to_string(x.shape()));
    }
    if (w.cols() % 2 == 0) throw ShapeError(op + ": kernel size " + std::to_string(w.cols()) + " must be odd");
    if (w.cols() > x.rows()) {
      throw ShapeError(op + ": kernel size " + std::to_string(w.cols()) + " exceeds sequence length " +
                       std::to_string(x.rows()));
    }
    if (b.size() != x.cols()) throw ShapeError(op + ": bias " + shape_to_string(b.shape()) + " does not match input");
  }
};

}  // namespace

Var neighbor_attention(Var q, Var k_self, Var v_self, Var k_ctx, Var v_ctx, Var mask, std::size_t heads) {
  return graph_of(q).apply(std::make_unique<NeighborAttentionOp>(heads), {q, k_self, v_self, k_ctx, v_ctx, mask});
}

Tensor attention_weights(const Tensor& q, const Tensor& k_self, const Tensor& k_ctx, const Tensor& mask,
                         std::size_t heads) {
  const AttnDims dm = attention_dims(q, k_self, k_ctx, mask, heads);
  Tensor out(Shape{dm.heads * dm.n, 1 + dm.k});
  std::vector<double> wts;
  for (std::size_t h = 0; h < dm.heads; ++h)
    for (std::size_t i = 0; i < dm.n; ++i) {
      step_weights(dm, q, k_self, k_ctx, mask, i, h, wts);
      for (std::size_t s = 0; s <= dm.k; ++s) out.at(h * dm.n + i, s) = wts[s];
    }
  return out;
}

Var layer_norm(Var x, Var gain, Var bias) {
  return graph_of(x).apply(std::make_unique<LayerNormOp>(), {x, gain, bias});
}

Var temporal_conv(Var x, Var kernel, Var bias) {
  return graph_of(x).apply(std::make_unique<TemporalConvOp>(), {x, kernel, bias});
}

Var linear(Var x, Var w, Var b) { return numerics::add_row(numerics::matmul(x, w), b); }

}  // namespace kinodiff::denoiser
