#pragma once

#include <optional>
#include <string>
#include <vector>

namespace kinodiff::geodata {

/// One fix: WGS84 degrees, seconds since the Unix epoch, optional speed (m/s).
struct TrajPoint {
  double lat = 0.0;
  double lon = 0.0;
  double t = 0.0;
  std::optional<double> v;

  friend bool operator==(const TrajPoint&, const TrajPoint&) = default;
};

/// Per-point kinematic features. Each array is either empty (not computed)
/// or has one entry per point. Bearing is in radians, 0 = north, clockwise
/// positive, wrapped to (-pi, pi].
struct Kinematics {
  std::vector<double> speed;      // m/s
  std::vector<double> bearing;    // rad
  std::vector<double> accel;      // m/s^2
  std::vector<double> jerk;       // m/s^3
  std::vector<double> curvature;  // 1/m

  bool empty() const noexcept { return speed.empty() && bearing.empty(); }
  friend bool operator==(const Kinematics&, const Kinematics&) = default;
};

struct Trajectory {
  std::string id;
  std::vector<TrajPoint> points;
  Kinematics derived;

  std::size_t size() const noexcept { return points.size(); }
  double duration() const noexcept { return points.empty() ? 0.0 : points.back().t - points.front().t; }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

bool valid_coordinate(double lat, double lon);

/// Throws InputError unless the trajectory has >= 2 points, valid
/// coordinates, strictly increasing timestamps and length-matched derived arrays.
void validate(const Trajectory& traj);

}  // namespace kinodiff::geodata
