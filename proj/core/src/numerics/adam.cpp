#include "kinodiff/numerics/adam.hpp"

#include <cmath>

#include "kinodiff/common/error.hpp"

namespace kinodiff::numerics {

void adam_step(ParamMap& params, const ParamMap& grads, OptimState& state) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw ShapeError("adam_step: gradient for unknown parameter '" + name + "'");
    if (it->second.shape() != g.shape()) {
      throw ShapeError("adam_step: parameter '" + name + "' has shape " + shape_to_string(it->second.shape()) +
                       " but gradient has " + shape_to_string(g.shape()));
    }
    if (!g.all_finite()) throw NumericError("adam_step: non-finite gradient for parameter '" + name + "'");
  }

  const AdamConfig& cfg = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (auto& [name, p] : params) {
    Tensor& m = state.first_moment.try_emplace(name, Tensor(p.shape())).first->second;
    Tensor& v = state.second_moment.try_emplace(name, Tensor(p.shape())).first->second;
    if (m.shape() != p.shape() || v.shape() != p.shape()) {
      throw ShapeError("adam_step: moment shape mismatch for parameter '" + name + "'");
    }
    auto git = grads.find(name);
    const Tensor* g = git == grads.end() ? nullptr : &git->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g ? (*g)[i] : 0.0;
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace kinodiff::numerics
