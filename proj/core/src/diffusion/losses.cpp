#include "kinodiff/diffusion/losses.hpp"

#include <cmath>

#include "kinodiff/common/error.hpp"

namespace kinodiff::diffusion {

using numerics::Shape;
namespace nx = numerics;

void LossWeights::validate() const {
  for (double v : {gamma1, gamma2, gamma3, w.w1, w.w2, w.w3, w.w4}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("loss weights must be finite and >= 0");
  }
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  return w.gamma1 * c.vlb + w.gamma2 * c.rec + w.gamma3 * c.phy;
}

double simple_loss(const Tensor& eps, const Tensor& eps_hat) {
  if (eps.shape() != eps_hat.shape()) throw ShapeError("simple_loss: shape mismatch");
  if (eps.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) s += (eps[i] - eps_hat[i]) * (eps[i] - eps_hat[i]);
  return s / static_cast<double>(eps.size());
}

double recon_loss(const Tensor& x0_hat, const Tensor& x0) {
  if (x0.shape() != x0_hat.shape() || x0.rank() != 2 || x0.cols() < 2) {
    throw ShapeError("recon_loss: shape mismatch " + nx::shape_to_string(x0_hat.shape()) + " vs " +
                     nx::shape_to_string(x0.shape()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x0.rows(); ++i)
    for (std::size_t c = 0; c < 2; ++c) s += (x0_hat.at(i, c) - x0.at(i, c)) * (x0_hat.at(i, c) - x0.at(i, c));
  return s;
}

Var simple_loss(Var eps_hat, const Tensor& eps) {
  return nx::mean(nx::square(eps_hat - eps_hat.graph->constant(eps)));
}

Var recon_loss(Var x0_hat, const Tensor& x0) {
  const Var diff = x0_hat - x0_hat.graph->constant(x0);
  return nx::sum(nx::square(nx::slice_cols(diff, 0, 2)));
}

Var predict_x0(Var eps_hat, const Tensor& x_t, double alpha_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) throw InputError("predict_x0: alpha_bar must be in (0, 1]");
  const Var xt = eps_hat.graph->constant(x_t);
  return nx::scale(xt - nx::scale(eps_hat, std::sqrt(1.0 - alpha_bar)), 1.0 / std::sqrt(alpha_bar));
}

Var physics_loss(Var x0_hat, Var kinematics, const PhysicsInputs& in) {
  using namespace geodata;
  if (!in.normalizer) throw InputError("physics_loss: no normalizer");
  const std::size_t n = in.steps;
  if (n < 3) throw InputError("physics_loss: need at least 3 steps");
  const Normalizer& norm = *in.normalizer;
  std::vector<double> gain(kFeatureCount), offset(kFeatureCount);
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    gain[c] = norm.gain(c);
    offset[c] = norm.offset(c);
  }
  const Var phys = nx::slice_cols(nx::affine_cols(x0_hat, gain, offset), 0, kHeading + 1);  // x, y, v, psi
  const Var d = nx::central_diff_rows(phys, in.dt, {false, false, false, true});
  const Var mid = nx::slice_rows(phys, 1, n - 1);
  const Var v = nx::slice_cols(mid, kSpeed, kSpeed + 1);
  const Var psi = nx::slice_cols(mid, kHeading, kHeading + 1);

  const Var r1 = nx::slice_cols(d, kX, kX + 1) - v * nx::cos(psi);
  const Var r2 = nx::slice_cols(d, kY, kY + 1) - v * nx::sin(psi);
  Var r3, r4;
  const Var dpsi = nx::slice_cols(d, kHeading, kHeading + 1);
  const Var dv = nx::slice_cols(d, kSpeed, kSpeed + 1);
  if (in.source == denoiser::KinematicSource::head) {
    const Var kin_mid = nx::slice_rows(kinematics, 1, n - 1);
    r3 = dpsi - v * nx::slice_cols(kin_mid, 0, 1);
    r4 = dv - nx::slice_cols(kin_mid, 1, 2);
  } else {
    // Forward differences at interior steps i: (q[i + 1] - q[i]) / dt.
    const Var next = nx::slice_rows(phys, 2, n);
    const Var fwd = nx::scale(next - mid, 1.0 / in.dt);
    r3 = dpsi - nx::slice_cols(fwd, kHeading, kHeading + 1);
    r4 = dv - nx::slice_cols(fwd, kSpeed, kSpeed + 1);
  }
  const auto& w = in.weights;
  const Var total = nx::scale(nx::sum(nx::square(r1)), w.w1) + nx::scale(nx::sum(nx::square(r2)), w.w2) +
                    nx::scale(nx::sum(nx::square(r3)), w.w3 * in.mean_speed * in.mean_speed) +
                    nx::scale(nx::sum(nx::square(r4)), w.w4);
  return nx::scale(total, 1.0 / static_cast<double>(n - 2));
}

}  // namespace kinodiff::diffusion
