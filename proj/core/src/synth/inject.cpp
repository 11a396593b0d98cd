#include "kinodiff/synth/inject.hpp"

#include <cmath>
#include <numbers>

#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/geo.hpp"
#include "kinodiff/geodata/kinematics.hpp"

namespace kinodiff::synth {

using geodata::GeoPoint;
using geodata::LocalProjection;
using geodata::PlanarPoint;
using geodata::Trajectory;

std::string kind_name(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::speed: return "speed";
    case AnomalyKind::bearing: return "bearing";
    case AnomalyKind::drift: return "drift";
    case AnomalyKind::replay: return "replay";
  }
  return "unknown";
}

AnomalyKind parse_kind(const std::string& name) {
  if (name == "speed") return AnomalyKind::speed;
  if (name == "bearing") return AnomalyKind::bearing;
  if (name == "drift") return AnomalyKind::drift;
  if (name == "replay") return AnomalyKind::replay;
  throw InputError("unknown anomaly kind '" + name + "'");
}

bool violates_kinematics(AnomalyKind kind) { return kind != AnomalyKind::speed; }

double default_severity(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::speed: return 0.5;
    case AnomalyKind::bearing: return 120.0;
    case AnomalyKind::drift: return 1.0;
    case AnomalyKind::replay: return 0.5;
  }
  return 0.0;
}

namespace {

bool within(double v, const SeverityRange& r) { return v >= r.lo && v <= r.hi; }

}  // namespace

void check_severity(AnomalyKind kind, double s, const SeverityRanges& r) {
  bool ok = std::isfinite(s);
  switch (kind) {
    case AnomalyKind::speed: ok = ok && within(s, r.speed) && std::abs(s - 1.0) >= r.speed_exclusion; break;
    case AnomalyKind::bearing: ok = ok && within(std::abs(s), r.bearing); break;
    case AnomalyKind::drift: ok = ok && within(std::abs(s), r.drift); break;
    case AnomalyKind::replay: ok = ok && within(s, r.replay); break;
  }
  if (!ok) throw InputError("severity " + std::to_string(s) + " out of range for " + kind_name(kind) + " anomaly");
}

double sample_severity(AnomalyKind kind, const SeverityRanges& r, numerics::Rng& rng) {
  switch (kind) {
    case AnomalyKind::speed: {
      // Uniform over [lo, 1 - excl] U [1 + excl, hi].
      const double left = std::max(0.0, (1.0 - r.speed_exclusion) - r.speed.lo);
      const double right = std::max(0.0, r.speed.hi - (1.0 + r.speed_exclusion));
      const double u = rng.uniform(0.0, left + right);
      return u < left ? r.speed.lo + u : 1.0 + r.speed_exclusion + (u - left);
    }
    case AnomalyKind::bearing:
    case AnomalyKind::drift: {
      const SeverityRange& range = kind == AnomalyKind::bearing ? r.bearing : r.drift;
      const double mag = rng.uniform(range.lo, range.hi);
      return rng.uniform() < 0.5 ? -mag : mag;
    }
    case AnomalyKind::replay: return rng.uniform(r.replay.lo, r.replay.hi);
  }
  return 0.0;
}

namespace {

Trajectory inject_speed(Trajectory t, const AnomalySpec& s) {
  // Intervals between consecutive window points are scaled by u; every later
  // timestamp shifts by the accumulated change.
  std::vector<double> original(t.points.size());
  for (std::size_t i = 0; i < t.points.size(); ++i) original[i] = t.points[i].t;
  double shift = 0.0;
  for (std::size_t i = s.window_start + 1; i < t.points.size(); ++i) {
    const double step = original[i] - original[i - 1];
    if (i < s.window_end) shift += (s.severity - 1.0) * step;
    t.points[i].t = original[i] + shift;
  }
  return t;
}

Trajectory inject_bearing(Trajectory t, const AnomalySpec& s) {
  const auto& pivot = t.points[s.window_start];
  const LocalProjection proj(pivot.lat, pivot.lon);
  // Positive severity turns clockwise, like a bearing increase.
  const double theta = -deg_to_rad(s.severity);
  const double c = std::cos(theta), sn = std::sin(theta);
  for (std::size_t i = s.window_start + 1; i < t.points.size(); ++i) {
    const PlanarPoint p = proj.forward(t.points[i].lat, t.points[i].lon);
    const GeoPoint g = proj.inverse(c * p.x - sn * p.y, sn * p.x + c * p.y);
    t.points[i].lat = g.lat;
    t.points[i].lon = g.lon;
  }
  return t;
}

Trajectory inject_drift(Trajectory t, const AnomalySpec& s) {
  const Trajectory k = geodata::derive_kinematics(t, {geodata::Differencing::forward, false});
  for (std::size_t i = s.window_start; i < s.window_end; ++i) {
    const auto& p = t.points[i];
    const LocalProjection proj(p.lat, p.lon);
    const double offset = s.severity * static_cast<double>(i - s.window_start + 1);
    // Right-hand normal of the bearing (x east, y north).
    const double b = k.derived.bearing[i];
    const GeoPoint g = proj.inverse(offset * std::cos(b), -offset * std::sin(b));
    t.points[i].lat = g.lat;
    t.points[i].lon = g.lon;
  }
  return t;
}

Trajectory inject_replay(Trajectory t, const AnomalySpec& s, const Trajectory& donor) {
  const std::size_t len = s.window_end - s.window_start;
  if (donor.points.size() < len) throw InputError("replay donor '" + donor.id + "' is shorter than the window");
  const std::size_t span = donor.points.size() - len;
  const auto first = static_cast<std::size_t>(std::llround(s.severity * static_cast<double>(span)));
  const auto& anchor = t.points[s.window_start];
  const auto& origin = donor.points[first];
  const LocalProjection donor_proj(origin.lat, origin.lon);
  const LocalProjection target_proj(anchor.lat, anchor.lon);
  // Donor timing rescaled onto the window's own time span.
  const double d0 = donor.points[first].t;
  const double d1 = donor.points[first + len - 1].t;
  const double w0 = t.points[s.window_start].t;
  const double w1 = t.points[s.window_end - 1].t;
  for (std::size_t j = 0; j < len; ++j) {
    const auto& dp = donor.points[first + j];
    const PlanarPoint p = donor_proj.forward(dp.lat, dp.lon);
    const GeoPoint g = target_proj.inverse(p.x, p.y);
    auto& out = t.points[s.window_start + j];
    out.lat = g.lat;
    out.lon = g.lon;
    out.v = dp.v;
    if (j > 0 && j + 1 < len && d1 > d0) out.t = w0 + (dp.t - d0) / (d1 - d0) * (w1 - w0);
  }
  return t;
}

}  // namespace

Injected inject(const Trajectory& traj, const AnomalySpec& spec, const SeverityRanges& ranges,
                const Trajectory* donor) {
  const std::size_t n = traj.points.size();
  if (spec.window_end > n || spec.window_start >= spec.window_end) {
    throw InputError("anomaly window [" + std::to_string(spec.window_start) + ", " + std::to_string(spec.window_end) +
                     ") is out of bounds for '" + traj.id + "' with " + std::to_string(n) + " points");
  }
  if (spec.window_end - spec.window_start < kMinWindow) {
    throw InputError("anomaly window is shorter than " + std::to_string(kMinWindow) + " steps");
  }
  check_severity(spec.kind, spec.severity, ranges);

  Injected out{traj, spec};
  out.traj.derived = {};
  switch (spec.kind) {
    case AnomalyKind::speed: out.traj = inject_speed(std::move(out.traj), spec); break;
    case AnomalyKind::bearing:
      out.traj = inject_bearing(std::move(out.traj), spec);
      out.spec.window_end = n;
      break;
    case AnomalyKind::drift: out.traj = inject_drift(std::move(out.traj), spec); break;
    case AnomalyKind::replay:
      if (donor == nullptr) throw InputError("replay anomaly needs a donor trajectory");
      out.traj = inject_replay(std::move(out.traj), spec, *donor);
      break;
  }
  return out;
}

}  // namespace kinodiff::synth
