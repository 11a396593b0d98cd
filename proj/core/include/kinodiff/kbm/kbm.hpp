#pragma once

#include <cstddef>
#include <vector>

#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/geodata/trajectory.hpp"
#include "kinodiff/numerics/rng.hpp"

namespace kinodiff::kbm {

/// Planar state: position (m), heading (rad, 0 = +x, counter-clockwise), speed (m/s).
struct KbmState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double v = 0.0;

  friend bool operator==(const KbmState&, const KbmState&) = default;
};

/// Curvature (1/m) and longitudinal acceleration (m/s^2), held constant over a step.
struct KbmControl {
  double kappa = 0.0;
  double a = 0.0;

  friend bool operator==(const KbmControl&, const KbmControl&) = default;
};

struct KbmParams {
  double wheelbase = 2.7;  // m
  double kappa_max = 0.2;  // 1/m
  double a_max = 3.0;      // m/s^2
};

/// (v cos psi, v sin psi, v kappa, a), returned in state layout.
KbmState kbm_derivative(const KbmState& state, const KbmControl& u);

/// kappa = tan(delta) / L. Throws InputError for |delta| >= pi/2 or L <= 0.
double steering_to_curvature(double delta, const KbmParams& params);

struct TurningRadius {
  bool infinite = false;
  double value = 0.0;  // m, signed like kappa; meaningless when infinite
};

TurningRadius curvature_to_radius(double kappa);

/// Classic RK4 with zero-order-hold controls. Returns controls.size() + 1
/// states starting with state0. Throws InputError for dt <= 0 and
/// NumericError (naming the step) if the state becomes non-finite.
std::vector<KbmState> integrate(const KbmState& state0, const std::vector<KbmControl>& controls, double dt);

/// Uniformly sampled physical series with per-step head values.
struct KinematicSeries {
  double dt = 0.0;
  std::vector<double> x, y, psi, v, kappa, a;

  std::size_t size() const noexcept { return x.size(); }
};

/// States plus controls (the control at step i drives i -> i+1). The head
/// value at a sample is the mean of the controls of the two intervals that
/// meet there, the quantity a central difference measures; end samples use
/// their single adjacent interval.
KinematicSeries series_from_states(const std::vector<KbmState>& states, const std::vector<KbmControl>& controls,
                                   double dt);

/// Physical series of a canonical trajectory with externally supplied
/// curvature and acceleration per step.
KinematicSeries series_from_canonical(const geodata::CanonicalTraj& canon, const std::vector<double>& kappa,
                                      const std::vector<double>& accel);

/// Residuals at interior steps 1..n-2 (central differences, heading
/// differences wrapped to the shortest signed angle).
struct Residuals {
  std::vector<double> r1, r2, r3, r4;

  std::size_t size() const noexcept { return r1.size(); }
  double max_abs() const;
};

/// Throws InputError for fewer than 3 steps, dt <= 0 or ragged arrays.
Residuals kbm_residuals(const KinematicSeries& series);

struct PhysicsWeights {
  double w1 = 1.0, w2 = 1.0, w3 = 1.0, w4 = 1.0;
};

/// Mean over interior steps of w1 r1^2 + w2 r2^2 + w3 (vbar r3)^2 + w4 r4^2,
/// where vbar is the mean speed of the series.
double physics_loss(const KinematicSeries& series, const PhysicsWeights& weights);
double mean_speed(const KinematicSeries& series);

struct GenerateOptions {
  std::size_t n = 180;
  double dt = 1.0;
  KbmParams params;
  /// Scales the random control rates; 0 keeps the initial controls constant.
  double control_smoothness = 1.0;
  double origin_lat = 37.7749;
  double origin_lon = -122.4194;
  double spread = 1500.0;  // m, radius of start positions about the origin
  double t0 = 1.6e9;       // s, shared start time
  double v_min = 4.0, v_max = 9.0;
  double kappa_init = 0.005;     // |kappa| bound of the initial curvature
  double kappa_rate = 0.00005;   // std of curvature rate (1/m per s)
  double kappa_reversion = 0.02; // 1/s, pull of the curvature back to 0
  double a_rate = 0.003;         // std of jerk-like acceleration rate (m/s^3)
  double a_reversion = 0.2;      // 1/s, pull of the acceleration back to 0
  double speed_pull = 0.01;      // 1/s^2, pull of the speed toward mid-band
};

struct GeneratedTrack {
  geodata::Trajectory traj;  // lat/lon, t, recorded v
  std::vector<KbmState> states;
  std::vector<KbmControl> controls;
};

/// Bounded smooth random controls integrated by RK4 and projected to
/// lat/lon about the configured origin.
GeneratedTrack generate_track(numerics::Rng& rng, const GenerateOptions& options);
geodata::Trajectory generate_normal(numerics::Rng& rng, const GenerateOptions& options);

}  // namespace kinodiff::kbm
