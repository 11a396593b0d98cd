#pragma once

#include <cstddef>

#include "kinodiff/numerics/graph.hpp"

namespace kinodiff::denoiser {

using numerics::Tensor;
using numerics::Var;

/// Multi-head attention where step i of the target attends to its own key
/// and to the keys of every neighbor present at step i.
///
/// q, k_self, v_self: n x W. k_ctx, v_ctx: (K n) x W, neighbor j occupying
/// rows [j n, (j + 1) n). mask: K x n constant, 1 = present. Heads split W
/// into equal slices of width d; logits are scaled by 1 / sqrt(d). Masked
/// steps are excluded from the softmax (an infinitely negative logit).
Var neighbor_attention(Var q, Var k_self, Var v_self, Var k_ctx, Var v_ctx, Var mask, std::size_t heads);

/// Attention weights of neighbor_attention for inspection: for each head
/// and step, a row of 1 + K weights (self first, masked entries 0).
/// Result shape (heads n) x (1 + K).
Tensor attention_weights(const Tensor& q, const Tensor& k_self, const Tensor& k_ctx, const Tensor& mask,
                         std::size_t heads);

inline constexpr double kLayerNormEps = 1e-5;

/// Per-row normalization to zero mean and unit variance (eps guarded),
/// then gain and bias of shape [W].
Var layer_norm(Var x, Var gain, Var bias);

/// Depthwise convolution along rows with zero padding: for each channel c,
/// out[i, c] = sum_j w[c, j] x[i + h - j, c] + b[c], h = (k - 1) / 2.
/// kernel: W x k with k odd; bias: [W]. Throws ShapeError if k is even or
/// longer than the sequence.
Var temporal_conv(Var x, Var kernel, Var bias);

/// x W + b.
Var linear(Var x, Var w, Var b);

}  // namespace kinodiff::denoiser
