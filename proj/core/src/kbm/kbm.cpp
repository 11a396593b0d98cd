#include "kinodiff/kbm/kbm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/geo.hpp"

namespace kinodiff::kbm {

KbmState kbm_derivative(const KbmState& s, const KbmControl& u) {
  return {s.v * std::cos(s.psi), s.v * std::sin(s.psi), s.v * u.kappa, u.a};
}

double steering_to_curvature(double delta, const KbmParams& params) {
  if (!(params.wheelbase > 0.0)) throw InputError("wheelbase must be > 0");
  if (!(std::abs(delta) < std::numbers::pi / 2)) throw InputError("steering angle must satisfy |delta| < pi/2");
  return std::tan(delta) / params.wheelbase;
}

TurningRadius curvature_to_radius(double kappa) {
  if (kappa == 0.0) return {true, 0.0};
  return {false, 1.0 / kappa};
}

namespace {

KbmState axpy(const KbmState& s, double h, const KbmState& d) {
  return {s.x + h * d.x, s.y + h * d.y, s.psi + h * d.psi, s.v + h * d.v};
}

bool finite(const KbmState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.psi) && std::isfinite(s.v);
}

}  // namespace

std::vector<KbmState> integrate(const KbmState& state0, const std::vector<KbmControl>& controls, double dt) {
  if (!(dt > 0.0)) throw InputError("integrate: dt must be > 0");
  if (!finite(state0)) throw NumericError("integrate: non-finite initial state");
  std::vector<KbmState> out;
  out.reserve(controls.size() + 1);
  out.push_back(state0);
  KbmState s = state0;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    const KbmControl& u = controls[i];
    const KbmState k1 = kbm_derivative(s, u);
    const KbmState k2 = kbm_derivative(axpy(s, dt / 2, k1), u);
    const KbmState k3 = kbm_derivative(axpy(s, dt / 2, k2), u);
    const KbmState k4 = kbm_derivative(axpy(s, dt, k3), u);
    s = {s.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.y + dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
         s.psi + dt / 6 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi),
         s.v + dt / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
    if (!finite(s)) throw NumericError("integrate: non-finite state at step " + std::to_string(i + 1));
    out.push_back(s);
  }
  return out;
}

KinematicSeries series_from_states(const std::vector<KbmState>& states, const std::vector<KbmControl>& controls,
                                   double dt) {
  if (states.empty() || controls.empty()) throw InputError("series_from_states: empty input");
  KinematicSeries s;
  s.dt = dt;
  const std::size_t last = controls.size() - 1;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const KbmControl& before = controls[std::min(i == 0 ? 0 : i - 1, last)];
    const KbmControl& after = controls[std::min(i, last)];
    s.x.push_back(states[i].x);
    s.y.push_back(states[i].y);
    s.psi.push_back(states[i].psi);
    s.v.push_back(states[i].v);
    s.kappa.push_back(0.5 * (before.kappa + after.kappa));
    s.a.push_back(0.5 * (before.a + after.a));
  }
  return s;
}

KinematicSeries series_from_canonical(const geodata::CanonicalTraj& canon, const std::vector<double>& kappa,
                                      const std::vector<double>& accel) {
  using namespace geodata;
  if (!canon.normalizer) throw InputError("series_from_canonical: no normalizer");
  const std::size_t n = canon.length();
  if (kappa.size() != n || accel.size() != n) throw InputError("series_from_canonical: head length mismatch");
  const Normalizer& norm = *canon.normalizer;
  KinematicSeries s;
  s.dt = canon.dt;
  for (std::size_t i = 0; i < n; ++i) {
    s.x.push_back(norm.denormalize(kX, canon.features.at(i, kX)));
    s.y.push_back(norm.denormalize(kY, canon.features.at(i, kY)));
    s.v.push_back(norm.denormalize(kSpeed, canon.features.at(i, kSpeed)));
    s.psi.push_back(norm.denormalize(kHeading, canon.features.at(i, kHeading)));
  }
  s.kappa = kappa;
  s.a = accel;
  return s;
}

double Residuals::max_abs() const {
  double m = 0.0;
  for (const auto* r : {&r1, &r2, &r3, &r4})
    for (double v : *r) m = std::max(m, std::abs(v));
  return m;
}

Residuals kbm_residuals(const KinematicSeries& s) {
  const std::size_t n = s.size();
  if (n < 3) throw InputError("kbm_residuals: need at least 3 steps");
  if (!(s.dt > 0.0)) throw InputError("kbm_residuals: dt must be > 0");
  for (const auto* arr : {&s.y, &s.psi, &s.v, &s.kappa, &s.a}) {
    if (arr->size() != n) throw InputError("kbm_residuals: ragged series");
  }
  Residuals r;
  const double h = 2.0 * s.dt;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dx = (s.x[i + 1] - s.x[i - 1]) / h;
    const double dy = (s.y[i + 1] - s.y[i - 1]) / h;
    const double dpsi = wrap_to_pi(s.psi[i + 1] - s.psi[i - 1]) / h;
    const double dv = (s.v[i + 1] - s.v[i - 1]) / h;
    r.r1.push_back(dx - s.v[i] * std::cos(s.psi[i]));
    r.r2.push_back(dy - s.v[i] * std::sin(s.psi[i]));
    r.r3.push_back(dpsi - s.v[i] * s.kappa[i]);
    r.r4.push_back(dv - s.a[i]);
  }
  return r;
}

double mean_speed(const KinematicSeries& series) {
  if (series.v.empty()) return 0.0;
  double sum = 0.0;
  for (double v : series.v) sum += v;
  return sum / static_cast<double>(series.v.size());
}

double physics_loss(const KinematicSeries& series, const PhysicsWeights& w) {
  const Residuals r = kbm_residuals(series);
  const double vbar = mean_speed(series);
  double total = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double r3 = vbar * r.r3[i];
    total += w.w1 * r.r1[i] * r.r1[i] + w.w2 * r.r2[i] * r.r2[i] + w.w3 * r3 * r3 + w.w4 * r.r4[i] * r.r4[i];
  }
  return total / static_cast<double>(r.size());
}

GeneratedTrack generate_track(numerics::Rng& rng, const GenerateOptions& o) {
  if (o.n < 2) throw InputError("generate_normal: n must be >= 2");
  if (!(o.dt > 0.0)) throw InputError("generate_normal: dt must be > 0");
  const double kmax = o.params.kappa_max;
  const double amax = o.params.a_max;

  const double radius = o.spread * std::sqrt(rng.uniform());
  const double angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
  KbmState s0{radius * std::cos(angle), radius * std::sin(angle), rng.uniform(-std::numbers::pi, std::numbers::pi),
              rng.uniform(o.v_min, o.v_max)};

  // Controls follow a damped random walk in their rates, so both the
  // controls and their first derivatives are continuous-looking.
  double kappa = std::clamp(rng.uniform(-o.kappa_init, o.kappa_init), -kmax, kmax);
  double accel = 0.0;
  double kappa_rate = 0.0;
  double a_rate = 0.0;
  const double damping = 0.9;

  GeneratedTrack track;
  track.states.reserve(o.n);
  track.states.push_back(s0);
  KbmState s = s0;
  for (std::size_t i = 0; i + 1 < o.n; ++i) {
    if (i > 0 && o.control_smoothness > 0.0) {
      kappa_rate = damping * kappa_rate + o.control_smoothness * o.kappa_rate * rng.normal();
      a_rate = damping * a_rate + o.control_smoothness * o.a_rate * rng.normal();
      kappa = std::clamp(kappa + (kappa_rate - o.kappa_reversion * kappa) * o.dt, -kmax, kmax);
      const double v_mid = 0.5 * (o.v_min + o.v_max);
      accel = std::clamp(accel + (a_rate - o.a_reversion * accel - o.speed_pull * (s.v - v_mid)) * o.dt, -amax, amax);
    }
    // Never brake through zero speed.
    if (accel < 0.0 && s.v + accel * o.dt < 0.0) accel = 0.0;
    const KbmControl u{kappa, accel};
    const std::vector<KbmState> step = integrate(s, {u}, o.dt);
    s = step.back();
    track.controls.push_back(u);
    track.states.push_back(s);
  }

  const geodata::LocalProjection proj(o.origin_lat, o.origin_lon);
  track.traj.points.reserve(o.n);
  for (std::size_t i = 0; i < o.n; ++i) {
    const geodata::GeoPoint g = proj.inverse(track.states[i].x, track.states[i].y);
    track.traj.points.push_back({g.lat, g.lon, o.t0 + o.dt * static_cast<double>(i), track.states[i].v});
  }
  return track;
}

geodata::Trajectory generate_normal(numerics::Rng& rng, const GenerateOptions& options) {
  return generate_track(rng, options).traj;
}

}  // namespace kinodiff::kbm
