#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "kinodiff/numerics/tensor.hpp"

namespace kinodiff::numerics {

/// Named parameter tensors. Ordered so iteration (and hence every update and
/// serialization) is deterministic.
using ParamMap = std::map<std::string, Tensor>;

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimState {
  AdamConfig config;
  std::uint64_t step = 0;
  ParamMap first_moment;
  ParamMap second_moment;
};

/// One bias-corrected Adam update. Parameters without an entry in `grads`
/// are treated as having a zero gradient. Throws NumericError on a
/// non-finite gradient and ShapeError on a shape mismatch; in both cases
/// nothing is modified.
void adam_step(ParamMap& params, const ParamMap& grads, OptimState& state);

}  // namespace kinodiff::numerics
