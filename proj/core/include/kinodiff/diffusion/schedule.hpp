#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kinodiff/numerics/rng.hpp"
#include "kinodiff/numerics/tensor.hpp"

namespace kinodiff::diffusion {

using numerics::Tensor;

/// beta_t, alpha_t = 1 - beta_t for t in 1..T and alpha_bar_t for t in 0..T
/// (alpha_bar_0 = 1, alpha_bar_t = prod_{i <= t} alpha_i).
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  /// betas[t - 1] = beta_t. Throws InputError unless every beta is in (0, 1).
  NoiseSchedule(std::vector<double> betas, double beta_start, double beta_end);

  std::size_t steps() const noexcept { return betas_.size(); }
  double beta_start() const noexcept { return beta_start_; }
  double beta_end() const noexcept { return beta_end_; }
  /// t in [1, T]; throws InputError otherwise.
  double beta(std::size_t t) const;
  double alpha(std::size_t t) const;
  /// t in [0, T].
  double alpha_bar(std::size_t t) const;
  const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

  /// 16 hex digits identifying T and every beta bit pattern.
  std::string digest() const;

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bar_{1.0};
  double beta_start_ = 0.0;
  double beta_end_ = 0.0;
};

/// beta linearly interpolated from beta_start (t = 1) to beta_end (t = T).
/// Throws InputError unless T >= 1 and 0 < beta_start <= beta_end < 1.
NoiseSchedule linear_schedule(std::size_t steps, double beta_start, double beta_end);

inline constexpr std::size_t kDefaultSteps = 1000;
inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

/// T = 50 with both beta endpoints scaled by 1000 / 50.
NoiseSchedule desk_schedule();

struct StepDraw {
  std::size_t t = 0;
  double alpha_bar = 1.0;
};

/// t uniform on 1..T, then alpha_bar uniform on [alpha_bar_t, alpha_bar_{t-1}].
StepDraw sample_t_alpha_bar(const NoiseSchedule& schedule, numerics::Rng& rng);

/// sqrt(ab) x0 + sqrt(1 - ab) eps. Throws ShapeError on mismatched shapes
/// and InputError for ab outside (0, 1].
Tensor q_sample(const Tensor& x0, double alpha_bar, const Tensor& eps);

/// One forward transition: sqrt(alpha_t) x + sqrt(beta_t) eps.
Tensor q_step(const Tensor& x, std::size_t t, const NoiseSchedule& schedule, const Tensor& eps);

struct Posterior {
  Tensor mean;
  double variance = 0.0;
};

/// Mean and variance of q(x_{t-1} | x_t, x0). Throws InputError for t outside [1, T].
Posterior posterior_params(const Tensor& x0, const Tensor& x_t, std::size_t t, const NoiseSchedule& schedule);
/// Coefficients (of x0, of x_t) of the posterior mean.
std::pair<double, double> posterior_coefficients(std::size_t t, const NoiseSchedule& schedule);

/// (x_t - sqrt(1 - ab) eps_hat) / sqrt(ab). Throws InputError for ab <= 0 or ab > 1.
Tensor predict_x0(const Tensor& x_t, const Tensor& eps_hat, double alpha_bar);

}  // namespace kinodiff::diffusion
