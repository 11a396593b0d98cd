#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "kinodiff/geodata/neighbors.hpp"
#include "kinodiff/numerics/adam.hpp"
#include "kinodiff/numerics/graph.hpp"
#include "kinodiff/numerics/rng.hpp"

namespace kinodiff::denoiser {

using numerics::ParamMap;
using numerics::Shape;

/// Where the curvature and acceleration fed to the physics loss come from.
enum class KinematicSource { head, finite_difference };

std::string kinematic_source_name(KinematicSource source);
KinematicSource parse_kinematic_source(const std::string& name);

struct DenoiserConfig {
  std::size_t features = geodata::kFeatureCount;  // d: columns of the trajectory matrix
  std::size_t width = 32;           // model width W
  std::size_t heads = 2;            // attention heads; key width = W / heads
  std::size_t sampling_blocks = 3;  // attention + residual stacks
  std::size_t resnet_blocks = 3;    // temporal residual blocks per sampling block
  std::size_t kernel = 5;           // temporal kernel size (odd)
  std::size_t max_context = 4;      // K: neighbors attended to
  double kappa_max = 0.2;           // bound of the curvature head (1/m)
  double a_max = 3.0;               // bound of the acceleration head (m/s^2)
  double guidance = 1.0;            // multiplier on neighbor values
  KinematicSource kinematic_source = KinematicSource::head;

  std::size_t key_width() const noexcept { return heads == 0 ? 0 : width / heads; }
  /// Throws InputError on an inconsistent configuration.
  void validate() const;

  friend bool operator==(const DenoiserConfig&, const DenoiserConfig&) = default;
};

/// Parameter names and shapes, a function of the configuration alone.
std::map<std::string, Shape> param_shapes(const DenoiserConfig& config);

struct DenoiserParams {
  DenoiserConfig config;
  ParamMap tensors;
};

/// Scaled normal weights (std 1 / sqrt(fan_in)), zero biases, unit norm gains.
DenoiserParams init_params(const DenoiserConfig& config, numerics::Rng& rng);

/// Throws ShapeError naming the first missing, extra or misshapen tensor.
void check_params(const DenoiserParams& params);

/// Neighbor features stacked as (K n) x d and a K x n presence mask.
struct DenoiserContext {
  numerics::Tensor neighbors;
  numerics::Tensor mask;

  std::size_t count() const noexcept { return mask.rank() == 2 ? mask.rows() : 0; }
};

DenoiserContext empty_context(std::size_t n, std::size_t features);
/// Takes at most `max_context` neighbors in their given order.
DenoiserContext make_context(const geodata::NeighborContext& ctx, std::size_t n, std::size_t features,
                             std::size_t max_context);

/// Sinusoidal features of -log(alpha_bar) at geometric frequencies from 1
/// down to 1e-3, shape 1 x width.
numerics::Tensor step_embedding(double alpha_bar, std::size_t width);
/// Fixed sinusoidal encoding of the step index, shape n x width.
numerics::Tensor position_encoding(std::size_t n, std::size_t width);

using BoundParams = std::map<std::string, numerics::Var>;
/// Adds every tensor to the graph as a variable (trainable) or constant.
BoundParams bind_params(numerics::Graph& graph, const ParamMap& tensors, bool trainable);

struct DenoiserOutput {
  numerics::Var eps;        // n x d noise prediction
  numerics::Var kinematics; // n x 2: curvature (1/m), acceleration (m/s^2)
};

/// x_t: n x d. Throws InputError for alpha_bar outside (0, 1] and ShapeError
/// on shape mismatches.
DenoiserOutput denoise_forward(numerics::Graph& graph, const DenoiserConfig& config, const BoundParams& params,
                               numerics::Var x_t, double alpha_bar, const DenoiserContext& context);

struct Prediction {
  numerics::Tensor eps;
  numerics::Tensor kinematics;
};

/// Inference without gradients.
Prediction predict(const DenoiserParams& params, const numerics::Tensor& x_t, double alpha_bar,
                   const DenoiserContext& context);

}  // namespace kinodiff::denoiser
