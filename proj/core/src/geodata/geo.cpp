#include "kinodiff/geodata/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/trajectory.hpp"

namespace kinodiff::geodata {

double haversine_distance(double lat1, double lon1, double lat2, double lon2) {
  const double p1 = deg_to_rad(lat1);
  const double p2 = deg_to_rad(lat2);
  const double dp = p2 - p1;
  const double dl = deg_to_rad(lon2 - lon1);
  const double s1 = std::sin(dp / 2.0);
  const double s2 = std::sin(dl / 2.0);
  const double h = s1 * s1 + std::cos(p1) * std::cos(p2) * s2 * s2;
  return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

double initial_bearing(double lat1, double lon1, double lat2, double lon2) {
  const double p1 = deg_to_rad(lat1);
  const double p2 = deg_to_rad(lat2);
  const double dl = deg_to_rad(lon2 - lon1);
  const double y = std::sin(dl) * std::cos(p2);
  const double x = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  return wrap_to_pi(std::atan2(y, x));
}

double bearing_to_heading(double bearing) { return wrap_to_pi(std::numbers::pi / 2.0 - bearing); }
double heading_to_bearing(double heading) { return wrap_to_pi(std::numbers::pi / 2.0 - heading); }

LocalProjection::LocalProjection(double lat0, double lon0)
    : lat0_(lat0), lon0_(lon0), cos_lat0_(std::cos(deg_to_rad(lat0))) {
  if (!valid_coordinate(lat0, lon0) || std::abs(lat0) >= 90.0) {
    throw InputError("LocalProjection: invalid origin");
  }
}

PlanarPoint LocalProjection::forward(double lat, double lon) const {
  return {kEarthRadius * deg_to_rad(lon - lon0_) * cos_lat0_, kEarthRadius * deg_to_rad(lat - lat0_)};
}

GeoPoint LocalProjection::inverse(double x, double y) const {
  return {lat0_ + rad_to_deg(y / kEarthRadius), lon0_ + rad_to_deg(x / (kEarthRadius * cos_lat0_))};
}

bool valid_coordinate(double lat, double lon) {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

void validate(const Trajectory& traj) {
  if (traj.points.size() < 2) {
    throw InputError("trajectory '" + traj.id + "' has " + std::to_string(traj.points.size()) + " points; need >= 2");
  }
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const TrajPoint& p = traj.points[i];
    if (!valid_coordinate(p.lat, p.lon)) {
      throw InputError("trajectory '" + traj.id + "' point " + std::to_string(i) + " has invalid coordinates");
    }
    if (i > 0 && !(p.t > traj.points[i - 1].t)) {
      throw InputError("trajectory '" + traj.id + "' timestamps not strictly increasing at point " + std::to_string(i));
    }
  }
  const Kinematics& k = traj.derived;
  for (const auto* arr : {&k.speed, &k.bearing, &k.accel, &k.jerk, &k.curvature}) {
    if (!arr->empty() && arr->size() != traj.points.size()) {
      throw InputError("trajectory '" + traj.id + "' derived array length does not match point count");
    }
  }
}

}  // namespace kinodiff::geodata
