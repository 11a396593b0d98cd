#pragma once

#include "kinodiff/denoiser/denoiser.hpp"
#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/kbm/kbm.hpp"
#include "kinodiff/numerics/graph.hpp"
#include "kinodiff/numerics/tensor.hpp"

namespace kinodiff::diffusion {

using numerics::Tensor;
using numerics::Var;

struct LossWeights {
  double gamma1 = 1.0;  // noise-prediction term
  double gamma2 = 1.0;  // position reconstruction term
  double gamma3 = 0.1;  // physics term
  kbm::PhysicsWeights w;

  /// Throws InputError if any weight is negative or non-finite.
  void validate() const;
  friend bool operator==(const LossWeights& a, const LossWeights& b) {
    return a.gamma1 == b.gamma1 && a.gamma2 == b.gamma2 && a.gamma3 == b.gamma3 && a.w.w1 == b.w.w1 &&
           a.w.w2 == b.w.w2 && a.w.w3 == b.w.w3 && a.w.w4 == b.w.w4;
  }
};

struct LossComponents {
  double vlb = 0.0;  // simplified variational term
  double rec = 0.0;
  double phy = 0.0;
};

/// gamma1 vlb + gamma2 rec + gamma3 phy.
double total_loss(const LossComponents& c, const LossWeights& w);

/// Mean squared error over all entries.
double simple_loss(const Tensor& eps, const Tensor& eps_hat);
/// Sum over steps of the squared distance between the (x, y) columns.
double recon_loss(const Tensor& x0_hat, const Tensor& x0);

// ---- graph versions used in training ----------------------------------------

Var simple_loss(Var eps_hat, const Tensor& eps);
Var recon_loss(Var x0_hat, const Tensor& x0);
/// (x_t - sqrt(1 - ab) eps_hat) / sqrt(ab) with x_t constant.
Var predict_x0(Var eps_hat, const Tensor& x_t, double alpha_bar);

struct PhysicsInputs {
  const geodata::Normalizer* normalizer = nullptr;
  std::size_t steps = 0;  // rows of the reconstruction
  double dt = 1.0;
  double mean_speed = 0.0;  // vbar, scales the heading residual
  kbm::PhysicsWeights weights;
  denoiser::KinematicSource source = denoiser::KinematicSource::head;
};

/// Physics loss of a normalized reconstruction (n x d; columns x, y, v, psi
/// are used) and kinematic head
/// (n x 2) in physical units: mean over interior steps of w1 r1^2 + w2 r2^2 +
/// w3 (vbar r3)^2 + w4 r4^2. With the finite-difference source, curvature
/// times speed and acceleration are forward differences of the
/// reconstructed heading and speed.
Var physics_loss(Var x0_hat, Var kinematics, const PhysicsInputs& in);

}  // namespace kinodiff::diffusion
