#include "kinodiff/diffusion/sampler.hpp"

#include <cmath>

#include "kinodiff/common/error.hpp"

namespace kinodiff::diffusion {

std::string sampler_mode_name(SamplerMode mode) { return mode == SamplerMode::ancestral ? "ancestral" : "eta"; }

SamplerMode parse_sampler_mode(const std::string& name) {
  if (name == "ancestral") return SamplerMode::ancestral;
  if (name == "eta") return SamplerMode::eta;
  throw InputError("unknown sampler mode '" + name + "' (expected ancestral or eta)");
}

void SamplerConfig::validate(std::size_t steps) const {
  if (stride < 1 || stride > steps) throw InputError("sampler: stride must be in [1, T]");
  if (t_star > steps) throw InputError("sampler: t_star must be in [1, T]");
  if (!(eta >= 0.0)) throw InputError("sampler: eta must be >= 0");
  if (repeats < 1) throw InputError("sampler: repeats must be >= 1");
}

std::size_t resolved_t_star(const SamplerConfig& config, std::size_t steps) {
  return config.t_star != 0 ? config.t_star : std::max<std::size_t>(1, steps / 4);
}

std::vector<std::size_t> step_sequence(std::size_t start, std::size_t stride) {
  if (stride == 0) throw InputError("stride must be >= 1");
  std::vector<std::size_t> seq;
  for (std::size_t t = start; t > 0; t = t > stride ? t - stride : 0) seq.push_back(t);
  return seq;
}

Tensor reverse_step(const Tensor& x_t, const Tensor& eps_hat, std::size_t t, std::size_t t_prev,
                    const NoiseSchedule& s, const SamplerConfig& config, numerics::Rng& rng) {
  if (t < 1 || t > s.steps() || t_prev >= t) {
    throw InputError("reverse_step: invalid transition " + std::to_string(t) + " -> " + std::to_string(t_prev));
  }
  if (x_t.shape() != eps_hat.shape()) throw ShapeError("reverse_step: x_t and eps_hat shapes differ");
  const double ab = s.alpha_bar(t);
  const double ab_prev = s.alpha_bar(t_prev);
  const double alpha = ab / ab_prev;
  Tensor out(x_t.shape());
  double sigma = 0.0;
  switch (config.mode) {
    case SamplerMode::ancestral: {
      const double c = (1.0 - alpha) / std::sqrt(1.0 - ab);
      const double inv = 1.0 / std::sqrt(alpha);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv * (x_t[i] - c * eps_hat[i]);
      if (t_prev > 0) sigma = std::sqrt(1.0 - alpha);
      break;
    }
    case SamplerMode::eta: {
      const double var = config.eta * (1.0 - ab_prev) * (1.0 - alpha) / (1.0 - ab);
      const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
      const double dir = std::sqrt(std::max(0.0, 1.0 - ab_prev - var));
      const double keep = std::sqrt(ab_prev);
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double x0 = (x_t[i] - b * eps_hat[i]) / a;
        out[i] = keep * x0 + dir * eps_hat[i];
      }
      if (t_prev > 0) sigma = std::sqrt(var);
      break;
    }
  }
  if (sigma > 0.0)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
  return out;
}

ChainResult run_chain(const Tensor& x_start, std::size_t start, const NoiseSchedule& schedule,
                      const SamplerConfig& config, const EpsFn& eps_fn, numerics::Rng& rng) {
  if (start > schedule.steps()) throw InputError("run_chain: start step exceeds T");
  ChainResult r{x_start, 0};
  for (std::size_t t : step_sequence(start, config.stride)) {
    const std::size_t t_prev = t > config.stride ? t - config.stride : 0;
    const Tensor eps = eps_fn(r.x0, t, schedule.alpha_bar(t));
    ++r.evaluations;
    r.x0 = reverse_step(r.x0, eps, t, t_prev, schedule, config, rng);
  }
  return r;
}

ChainResult sample_full(const EpsFn& eps_fn, std::size_t n, std::size_t d, const NoiseSchedule& schedule,
                        const SamplerConfig& config, numerics::Rng& rng) {
  config.validate(schedule.steps());
  const Tensor x_T = rng.normal_tensor({n, d});
  return run_chain(x_T, schedule.steps(), schedule, config, eps_fn, rng);
}

ChainResult sample_full(const denoiser::DenoiserParams& params, std::size_t n, const NoiseSchedule& schedule,
                        const SamplerConfig& config, const denoiser::DenoiserContext& context, numerics::Rng& rng) {
  return sample_full(denoiser_eps(params, context), n, params.config.features, schedule, config, rng);
}

Tensor reconstruct(const Tensor& x0, std::size_t t_star, const NoiseSchedule& schedule, const SamplerConfig& config,
                   const EpsFn& eps_fn, numerics::Rng& rng) {
  if (t_star > schedule.steps()) throw InputError("reconstruct: t_star exceeds T");
  if (t_star == 0) return x0;
  const Tensor eps = rng.normal_tensor(x0.shape());
  const Tensor x_t = q_sample(x0, schedule.alpha_bar(t_star), eps);
  return run_chain(x_t, t_star, schedule, config, eps_fn, rng).x0;
}

Tensor reconstruct(const Tensor& x0, const denoiser::DenoiserParams& params, const NoiseSchedule& schedule,
                   const SamplerConfig& config, const denoiser::DenoiserContext& context, numerics::Rng& rng) {
  config.validate(schedule.steps());
  return reconstruct(x0, resolved_t_star(config, schedule.steps()), schedule, config, denoiser_eps(params, context),
                     rng);
}

EpsFn denoiser_eps(const denoiser::DenoiserParams& params, const denoiser::DenoiserContext& context) {
  return [&params, context](const Tensor& x_t, std::size_t, double alpha_bar) {
    return denoiser::predict(params, x_t, alpha_bar, context).eps;
  };
}

}  // namespace kinodiff::diffusion
