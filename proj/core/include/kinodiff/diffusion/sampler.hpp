#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "kinodiff/denoiser/denoiser.hpp"
#include "kinodiff/diffusion/schedule.hpp"

namespace kinodiff::diffusion {

enum class SamplerMode { ancestral, eta };

std::string sampler_mode_name(SamplerMode mode);
SamplerMode parse_sampler_mode(const std::string& name);

struct SamplerConfig {
  SamplerMode mode = SamplerMode::eta;
  double eta = 0.0;        // stochasticity of eta mode; 0 is deterministic
  std::size_t stride = 4;  // skip between evaluated steps
  std::size_t t_star = 0;  // reconstruction depth; 0 selects T / 4
  std::size_t repeats = 1; // reconstructions averaged per score

  /// Throws InputError unless 1 <= stride <= T, t_star <= T, eta >= 0, repeats >= 1.
  void validate(std::size_t steps) const;
  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

/// t_star, or max(1, T / 4) when it is 0.
std::size_t resolved_t_star(const SamplerConfig& config, std::size_t steps);

/// Evaluated steps when descending from `start` with the given stride:
/// start, start - s, ... while positive. The step after the last one is 0.
std::vector<std::size_t> step_sequence(std::size_t start, std::size_t stride);

/// One reverse transition from t to t_prev < t. With t_prev = t - 1 this is
/// the plain single-step update; larger gaps use alpha = ab_t / ab_prev.
///   ancestral: (x_t - (1 - alpha) / sqrt(1 - ab_t) eps) / sqrt(alpha) + sqrt(1 - alpha) z
///   eta:       sqrt(ab_prev) x0_hat + sqrt(1 - ab_prev - s^2) eps + s z,
///              s^2 = eta * (1 - ab_prev) (1 - alpha) / (1 - ab_t)
/// z is zero when t_prev = 0; no random numbers are drawn when the noise
/// scale is zero.
Tensor reverse_step(const Tensor& x_t, const Tensor& eps_hat, std::size_t t, std::size_t t_prev,
                    const NoiseSchedule& schedule, const SamplerConfig& config, numerics::Rng& rng);

/// Noise predictor: (x_t, t, alpha_bar_t) -> eps_hat.
using EpsFn = std::function<Tensor(const Tensor& x_t, std::size_t t, double alpha_bar)>;

struct ChainResult {
  Tensor x0;
  std::size_t evaluations = 0;
};

/// Runs the strided reverse chain from x at step `start` down to 0.
ChainResult run_chain(const Tensor& x_start, std::size_t start, const NoiseSchedule& schedule,
                      const SamplerConfig& config, const EpsFn& eps_fn, numerics::Rng& rng);

/// Reverse chain from pure noise of shape n x d.
ChainResult sample_full(const EpsFn& eps_fn, std::size_t n, std::size_t d, const NoiseSchedule& schedule,
                        const SamplerConfig& config, numerics::Rng& rng);
ChainResult sample_full(const denoiser::DenoiserParams& params, std::size_t n, const NoiseSchedule& schedule,
                        const SamplerConfig& config, const denoiser::DenoiserContext& context, numerics::Rng& rng);

/// Partial noising of x0 to depth t_star (x0 itself when t_star = 0), then
/// the reverse chain back to step 0.
Tensor reconstruct(const Tensor& x0, std::size_t t_star, const NoiseSchedule& schedule, const SamplerConfig& config,
                   const EpsFn& eps_fn, numerics::Rng& rng);
Tensor reconstruct(const Tensor& x0, const denoiser::DenoiserParams& params, const NoiseSchedule& schedule,
                   const SamplerConfig& config, const denoiser::DenoiserContext& context, numerics::Rng& rng);

/// Noise predictor backed by a trained denoiser.
EpsFn denoiser_eps(const denoiser::DenoiserParams& params, const denoiser::DenoiserContext& context);

}  // namespace kinodiff::diffusion
