#include "kinodiff/denoiser/denoiser.hpp"

#include <cmath>

#include "kinodiff/common/error.hpp"
#include "kinodiff/denoiser/layers.hpp"

namespace kinodiff::denoiser {

using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

std::string kinematic_source_name(KinematicSource source) {
  return source == KinematicSource::head ? "head" : "finite-difference";
}

KinematicSource parse_kinematic_source(const std::string& name) {
  if (name == "head") return KinematicSource::head;
  if (name == "finite-difference") return KinematicSource::finite_difference;
  throw InputError("unknown kinematic source '" + name + "' (expected head or finite-difference)");
}

void DenoiserConfig::validate() const {
  if (features == 0) throw InputError("model: features must be > 0");
  if (width == 0 || heads == 0 || width % heads != 0) throw InputError("model: width must be divisible by heads");
  if (width % 2 != 0) throw InputError("model: width must be even");
  if (sampling_blocks < 2) throw InputError("model: at least 2 sampling blocks are required");
  if (resnet_blocks < 1) throw InputError("model: at least 1 resnet block is required");
  if (kernel % 2 == 0) throw InputError("model: kernel size must be odd");
  if (!(kappa_max > 0.0) || !(a_max > 0.0)) throw InputError("model: kinematic bounds must be > 0");
  if (!(guidance >= 0.0)) throw InputError("model: guidance must be >= 0");
}

namespace {

std::string block(std::size_t b) { return "block" + std::to_string(b); }
std::string res(std::size_t b, std::size_t r) { return block(b) + ".res" + std::to_string(r); }

}  // namespace

std::map<std::string, Shape> param_shapes(const DenoiserConfig& c) {
  const std::size_t w = c.width;
  std::map<std::string, Shape> s;
  s["embed.in.w"] = {c.features, w};
  s["embed.in.b"] = {w};
  s["embed.ctx.w"] = {c.features, w};
  s["embed.ctx.b"] = {w};
  s["step.w"] = {w, w};
  s["step.b"] = {w};
  for (std::size_t b = 0; b < c.sampling_blocks; ++b) {
    const std::string p = block(b);
    s[p + ".step.w"] = {w, w};
    s[p + ".step.b"] = {w};
    for (const char* m : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"}) s[p + m] = {w, w};
    s[p + ".attn.bo"] = {w};
    s[p + ".attn.ln.g"] = {w};
    s[p + ".attn.ln.b"] = {w};
    for (std::size_t r = 0; r < c.resnet_blocks; ++r) {
      const std::string q = res(b, r);
      s[q + ".conv.w"] = {w, c.kernel};
      s[q + ".conv.b"] = {w};
      s[q + ".lin.w"] = {w, w};
      s[q + ".lin.b"] = {w};
      s[q + ".ln.g"] = {w};
      s[q + ".ln.b"] = {w};
    }
  }
  s["head.eps.w"] = {w, c.features};
  s["head.eps.b"] = {c.features};
  s["head.kin.w"] = {w, 2};
  s["head.kin.b"] = {2};
  return s;
}

DenoiserParams init_params(const DenoiserConfig& config, numerics::Rng& rng) {
  config.validate();
  DenoiserParams p{config, {}};
  for (const auto& [name, shape] : param_shapes(config)) {
    Tensor t(shape);
    const bool is_gain = name.ends_with(".ln.g");
    if (is_gain) {
      t.fill(1.0);
    } else if (shape.size() == 2) {
      // Fan-in is the number of inputs mixed per output: rows for dense
      // weights, the kernel length for the depthwise convolution.
      const bool conv = name.ends_with(".conv.w");
      const double fan_in = static_cast<double>(conv ? shape[1] : shape[0]);
      const double std = 1.0 / std::sqrt(fan_in);
      for (double& v : t.storage()) v = std * rng.normal();
    }
    p.tensors.emplace(name, std::move(t));
  }
  return p;
}

void check_params(const DenoiserParams& params) {
  const auto shapes = param_shapes(params.config);
  for (const auto& [name, shape] : shapes) {
    const auto it = params.tensors.find(name);
    if (it == params.tensors.end()) throw ShapeError("denoiser parameters: missing tensor '" + name + "'");
    if (it->second.shape() != shape) {
      throw ShapeError("denoiser parameters: '" + name + "' has shape " + numerics::shape_to_string(it->second.shape()) +
                       ", configuration expects " + numerics::shape_to_string(shape));
    }
  }
  for (const auto& [name, t] : params.tensors) {
    if (!shapes.contains(name)) throw ShapeError("denoiser parameters: unexpected tensor '" + name + "'");
  }
}

DenoiserContext empty_context(std::size_t n, std::size_t features) {
  return {Tensor(Shape{0, features}), Tensor(Shape{0, n})};
}

DenoiserContext make_context(const geodata::NeighborContext& ctx, std::size_t n, std::size_t features,
                             std::size_t max_context) {
  const std::size_t k = std::min(ctx.size(), max_context);
  DenoiserContext out{Tensor(Shape{k * n, features}), Tensor(Shape{k, n})};
  for (std::size_t j = 0; j < k; ++j) {
    const geodata::Neighbor& nb = ctx.neighbors[j];
    if (nb.features.rows() != n || nb.features.cols() != features || nb.mask.size() != n) {
      throw ShapeError("context neighbor '" + nb.id + "' has shape " + numerics::shape_to_string(nb.features.shape()) +
                       ", expected " + numerics::shape_to_string({n, features}));
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.mask.at(j, i) = nb.mask[i];
      for (std::size_t c = 0; c < features; ++c) out.neighbors.at(j * n + i, c) = nb.features.at(i, c);
    }
  }
  return out;
}

Tensor step_embedding(double alpha_bar, std::size_t width) {
  const double s = -std::log(alpha_bar);
  const std::size_t half = width / 2;
  Tensor e(Shape{1, width});
  for (std::size_t j = 0; j < half; ++j) {
    const double frac = half > 1 ? static_cast<double>(j) / static_cast<double>(half - 1) : 0.0;
    const double f = std::pow(1e-3, frac);
    e.at(0, j) = std::sin(s * f);
    e.at(0, half + j) = std::cos(s * f);
  }
  return e;
}

Tensor position_encoding(std::size_t n, std::size_t width) {
  const std::size_t half = width / 2;
  Tensor e(Shape{n, width});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < half; ++j) {
      const double f = std::pow(1e-4, static_cast<double>(j) / static_cast<double>(half));
      e.at(i, 2 * j) = std::sin(static_cast<double>(i) * f);
      e.at(i, 2 * j + 1) = std::cos(static_cast<double>(i) * f);
    }
  return e;
}

BoundParams bind_params(Graph& graph, const ParamMap& tensors, bool trainable) {
  BoundParams out;
  for (const auto& [name, t] : tensors) out.emplace(name, trainable ? graph.variable(t) : graph.constant(t));
  return out;
}

DenoiserOutput denoise_forward(Graph& graph, const DenoiserConfig& c, const BoundParams& p, Var x_t,
                               double alpha_bar, const DenoiserContext& context) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) throw InputError("denoise_forward: alpha_bar must be in (0, 1]");
  const Tensor& x = graph.value(x_t);
  if (x.rank() != 2 || x.cols() != c.features) {
    throw ShapeError("denoise_forward: input shape " + numerics::shape_to_string(x.shape()) + " does not match " +
                     std::to_string(c.features) + " features");
  }
  const std::size_t n = x.rows();
  auto P = [&](const std::string& name) -> Var {
    const auto it = p.find(name);
    if (it == p.end()) throw ShapeError("denoise_forward: missing parameter '" + name + "'");
    return it->second;
  };

  const std::size_t k = std::min(context.count(), c.max_context);
  Tensor nb = context.neighbors, mask = context.mask;
  if (k < context.count()) {
    nb = Tensor(Shape{k * n, c.features}, std::vector<double>(nb.storage().begin(),
                                                              nb.storage().begin() + static_cast<std::ptrdiff_t>(k * n * c.features)));
    mask = Tensor(Shape{k, n}, std::vector<double>(mask.storage().begin(),
                                                   mask.storage().begin() + static_cast<std::ptrdiff_t>(k * n)));
  }
  if (k == 0) {
    nb = Tensor(Shape{0, c.features});
    mask = Tensor(Shape{0, n});
  }

  Var h = linear(x_t, P("embed.in.w"), P("embed.in.b")) + graph.constant(position_encoding(n, c.width));
  const Var ctx = linear(graph.constant(nb), P("embed.ctx.w"), P("embed.ctx.b"));
  const Var mask_var = graph.constant(mask);
  const Var temb = numerics::silu(linear(graph.constant(step_embedding(alpha_bar, c.width)), P("step.w"), P("step.b")));

  for (std::size_t b = 0; b < c.sampling_blocks; ++b) {
    const std::string pre = block(b);
    h = numerics::add_row(h, linear(temb, P(pre + ".step.w"), P(pre + ".step.b")));
    const Var wk = P(pre + ".attn.wk"), wv = P(pre + ".attn.wv");
    const Var q = numerics::matmul(h, P(pre + ".attn.wq"));
    Var vc = numerics::matmul(ctx, wv);
    if (c.guidance != 1.0) vc = numerics::scale(vc, c.guidance);
    const Var attn = neighbor_attention(q, numerics::matmul(h, wk), numerics::matmul(h, wv), numerics::matmul(ctx, wk),
                                        vc, mask_var, c.heads);
    h = layer_norm(h + linear(attn, P(pre + ".attn.wo"), P(pre + ".attn.bo")), P(pre + ".attn.ln.g"),
                   P(pre + ".attn.ln.b"));
    for (std::size_t r = 0; r < c.resnet_blocks; ++r) {
      const std::string q2 = res(b, r);
      const Var conv = temporal_conv(h, P(q2 + ".conv.w"), P(q2 + ".conv.b"));
      h = layer_norm(h + linear(numerics::silu(conv), P(q2 + ".lin.w"), P(q2 + ".lin.b")), P(q2 + ".ln.g"),
                     P(q2 + ".ln.b"));
    }
  }

  DenoiserOutput out;
  out.eps = linear(h, P("head.eps.w"), P("head.eps.b"));
  out.kinematics = numerics::affine_cols(numerics::tanh(linear(h, P("head.kin.w"), P("head.kin.b"))),
                                         {c.kappa_max, c.a_max}, {0.0, 0.0});
  return out;
}

Prediction predict(const DenoiserParams& params, const Tensor& x_t, double alpha_bar, const DenoiserContext& context) {
  Graph graph;
  const BoundParams bound = bind_params(graph, params.tensors, false);
  const Var x = graph.constant(x_t);
  const DenoiserOutput out = denoise_forward(graph, params.config, bound, x, alpha_bar, context);
  const Var both = numerics::concat_cols({out.eps, out.kinematics});
  const Tensor& v = graph.forward(both);
  const std::size_t n = v.rows(), d = params.config.features;
  Prediction pred{Tensor(Shape{n, d}), Tensor(Shape{n, 2})};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) pred.eps.at(i, j) = v.at(i, j);
    for (std::size_t j = 0; j < 2; ++j) pred.kinematics.at(i, j) = v.at(i, d + j);
  }
  return pred;
}

}  // namespace kinodiff::denoiser
