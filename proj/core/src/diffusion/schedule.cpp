#include "kinodiff/diffusion/schedule.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "kinodiff/common/error.hpp"
#include "kinodiff/common/format.hpp"

namespace kinodiff::diffusion {

NoiseSchedule::NoiseSchedule(std::vector<double> betas, double beta_start, double beta_end)
    : betas_(std::move(betas)), beta_start_(beta_start), beta_end_(beta_end) {
  if (betas_.empty()) throw InputError("noise schedule needs at least one step");
  alpha_bar_.reserve(betas_.size() + 1);
  for (double b : betas_) {
    if (!(b > 0.0 && b < 1.0)) throw InputError("noise schedule: beta " + format_double(b) + " is outside (0, 1)");
    alpha_bar_.push_back(alpha_bar_.back() * (1.0 - b));
  }
}

double NoiseSchedule::beta(std::size_t t) const {
  if (t < 1 || t > betas_.size()) {
    throw InputError("step " + std::to_string(t) + " is outside [1, " + std::to_string(betas_.size()) + "]");
  }
  return betas_[t - 1];
}

double NoiseSchedule::alpha(std::size_t t) const { return 1.0 - beta(t); }

double NoiseSchedule::alpha_bar(std::size_t t) const {
  if (t >= alpha_bar_.size()) {
    throw InputError("step " + std::to_string(t) + " is outside [0, " + std::to_string(betas_.size()) + "]");
  }
  return alpha_bar_[t];
}

std::string NoiseSchedule::digest() const {
  // FNV-1a over T and the beta bit patterns.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(betas_.size());
  for (double b : betas_) mix(std::bit_cast<std::uint64_t>(b));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NoiseSchedule linear_schedule(std::size_t steps, double beta_start, double beta_end) {
  if (steps < 1) throw InputError("schedule: T must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw InputError("schedule: need 0 < beta1 <= betaT < 1, got beta1=" + format_double(beta_start) +
                     ", betaT=" + format_double(beta_end));
  }
  std::vector<double> betas(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    betas[i] = beta_start + (beta_end - beta_start) * frac;
  }
  return NoiseSchedule(std::move(betas), beta_start, beta_end);
}

NoiseSchedule desk_schedule() {
  constexpr std::size_t steps = 50;
  constexpr double factor = static_cast<double>(kDefaultSteps) / steps;
  return linear_schedule(steps, kDefaultBetaStart * factor, kDefaultBetaEnd * factor);
}

StepDraw sample_t_alpha_bar(const NoiseSchedule& schedule, numerics::Rng& rng) {
  const std::size_t t = 1 + rng.index(schedule.steps());
  return {t, rng.uniform(schedule.alpha_bar(t), schedule.alpha_bar(t - 1))};
}

namespace {

void check_alpha_bar(double ab) {
  if (!(ab > 0.0 && ab <= 1.0)) throw InputError("alpha_bar " + format_double(ab) + " is outside (0, 1]");
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + numerics::shape_to_string(a.shape()) + " vs " +
                     numerics::shape_to_string(b.shape()));
  }
}

}  // namespace

Tensor q_sample(const Tensor& x0, double alpha_bar, const Tensor& eps) {
  check_alpha_bar(alpha_bar);
  check_same_shape("q_sample", x0, eps);
  const double a = std::sqrt(alpha_bar), b = std::sqrt(1.0 - alpha_bar);
  Tensor out(x0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * eps[i];
  return out;
}

Tensor q_step(const Tensor& x, std::size_t t, const NoiseSchedule& schedule, const Tensor& eps) {
  check_same_shape("q_step", x, eps);
  const double a = std::sqrt(schedule.alpha(t)), b = std::sqrt(schedule.beta(t));
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * eps[i];
  return out;
}

std::pair<double, double> posterior_coefficients(std::size_t t, const NoiseSchedule& s) {
  const double ab = s.alpha_bar(t), ab_prev = s.alpha_bar(t - 1), a = s.alpha(t);
  return {std::sqrt(ab_prev) * (1.0 - a) / (1.0 - ab), std::sqrt(a) * (1.0 - ab_prev) / (1.0 - ab)};
}

Posterior posterior_params(const Tensor& x0, const Tensor& x_t, std::size_t t, const NoiseSchedule& s) {
  if (t < 1 || t > s.steps()) {
    throw InputError("posterior: step " + std::to_string(t) + " is outside [1, " + std::to_string(s.steps()) + "]");
  }
  check_same_shape("posterior_params", x0, x_t);
  const auto [c0, ct] = posterior_coefficients(t, s);
  Posterior p;
  p.mean = Tensor(x0.shape());
  for (std::size_t i = 0; i < x0.size(); ++i) p.mean[i] = c0 * x0[i] + ct * x_t[i];
  p.variance = (1.0 - s.alpha_bar(t - 1)) * (1.0 - s.alpha(t)) / (1.0 - s.alpha_bar(t));
  return p;
}

Tensor predict_x0(const Tensor& x_t, const Tensor& eps_hat, double alpha_bar) {
  check_alpha_bar(alpha_bar);
  check_same_shape("predict_x0", x_t, eps_hat);
  const double a = std::sqrt(alpha_bar), b = std::sqrt(1.0 - alpha_bar);
  Tensor out(x_t.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] - b * eps_hat[i]) / a;
  return out;
}

}  // namespace kinodiff::diffusion
