#include "kinodiff/geodata/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/geo.hpp"

namespace kinodiff::geodata {

namespace {

/// Forward differences of `values` over the per-point times; the last entry
/// repeats the previous one.
std::vector<double> forward_rate(const std::vector<double>& values, const std::vector<TrajPoint>& pts) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = (values[i + 1] - values[i]) / (pts[i + 1].t - pts[i].t);
  out[n - 1] = out[n - 2];
  return out;
}

}  // namespace

Trajectory derive_kinematics(Trajectory traj, const KinematicsOptions& options) {
  const auto& pts = traj.points;
  const std::size_t n = pts.size();
  if (n < 2) throw InputError("derive_kinematics: trajectory '" + traj.id + "' needs at least 2 points");
  for (std::size_t i = 1; i < n; ++i) {
    if (pts[i].t == pts[i - 1].t) {
      throw InputError("derive_kinematics: zero time step at point " + std::to_string(i) + " of '" + traj.id + "'");
    }
  }

  std::vector<double> seg_dist(n - 1), seg_bearing(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    seg_dist[i] = haversine_distance(pts[i].lat, pts[i].lon, pts[i + 1].lat, pts[i + 1].lon);
    seg_bearing[i] = initial_bearing(pts[i].lat, pts[i].lon, pts[i + 1].lat, pts[i + 1].lon);
  }

  Kinematics k;
  k.speed.resize(n);
  k.bearing.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool interior = options.differencing == Differencing::central && i > 0 && i + 1 < n;
    if (interior) {
      const TrajPoint& a = pts[i - 1];
      const TrajPoint& b = pts[i + 1];
      k.speed[i] = haversine_distance(a.lat, a.lon, b.lat, b.lon) / (b.t - a.t);
      k.bearing[i] = initial_bearing(a.lat, a.lon, b.lat, b.lon);
    } else {
      const std::size_t s = std::min(i, n - 2);
      k.speed[i] = seg_dist[s] / (pts[s + 1].t - pts[s].t);
      k.bearing[i] = seg_bearing[s];
    }
  }
  const bool recorded = options.use_recorded_speed &&
                        std::all_of(pts.begin(), pts.end(), [](const TrajPoint& p) { return p.v.has_value(); });
  if (recorded) {
    for (std::size_t i = 0; i < n; ++i) k.speed[i] = *pts[i].v;
  }

  if (n >= 3) {
    k.accel = forward_rate(k.speed, pts);
    k.curvature.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double ds = seg_dist[i];
      k.curvature[i] = ds > 0.0 ? wrap_to_pi(k.bearing[i + 1] - k.bearing[i]) / ds : 0.0;
    }
    k.curvature[n - 1] = k.curvature[n - 2];
  }
  if (n >= 4) k.jerk = forward_rate(k.accel, pts);

  traj.derived = std::move(k);
  return traj;
}

std::vector<Trajectory> split_gaps(const Trajectory& traj, double factor) {
  const std::size_t n = traj.points.size();
  if (n < 3) return {traj};
  std::vector<double> steps(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) steps[i] = traj.points[i + 1].t - traj.points[i].t;
  std::vector<double> sorted = steps;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];

  std::vector<Trajectory> segments;
  Trajectory current;
  current.points.push_back(traj.points[0]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (steps[i] > factor * median) {
      segments.push_back(std::move(current));
      current = Trajectory{};
    }
    current.points.push_back(traj.points[i + 1]);
  }
  segments.push_back(std::move(current));

  std::vector<Trajectory> out;
  for (Trajectory& s : segments) {
    if (s.points.size() >= 2) out.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].id = out.size() == 1 ? traj.id : traj.id + "#" + std::to_string(k);
  }
  return out;
}

Trajectory resample(const Trajectory& traj, std::size_t n) {
  if (n < 2) throw InputError("resample: n must be >= 2, got " + std::to_string(n));
  if (traj.points.size() < 2 || !(traj.duration() > 0.0)) {
    throw InputError("resample: trajectory '" + traj.id + "' has zero duration");
  }
  const auto& pts = traj.points;
  const double t0 = pts.front().t;
  const double t1 = pts.back().t;
  Trajectory out;
  out.id = traj.id;
  out.points.resize(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0) {
      out.points[k] = pts.front();
      continue;
    }
    if (k == n - 1) {
      out.points[k] = pts.back();
      continue;
    }
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < pts.size() && pts[seg + 1].t <= t) ++seg;
    const TrajPoint& a = pts[seg];
    const TrajPoint& b = pts[seg + 1];
    const double w = (t - a.t) / (b.t - a.t);
    TrajPoint p;
    p.t = t;
    p.lat = a.lat + w * (b.lat - a.lat);
    p.lon = a.lon + w * (b.lon - a.lon);
    if (a.v && b.v) p.v = *a.v + w * (*b.v - *a.v);
    out.points[k] = p;
  }
  return out;
}

}  // namespace kinodiff::geodata
