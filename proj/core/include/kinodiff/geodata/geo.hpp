#pragma once

namespace kinodiff::geodata {

/// Sphere radius used for every distance and projection (WGS84 equatorial).
inline constexpr double kEarthRadius = 6378137.0;

/// Great-circle distance in metres.
double haversine_distance(double lat1, double lon1, double lat2, double lon2);

/// Initial great-circle bearing from point 1 to point 2: radians, 0 = north,
/// clockwise positive, wrapped to (-pi, pi].
double initial_bearing(double lat1, double lon1, double lat2, double lon2);

/// Navigation bearing (north, clockwise) to planar heading (east, counter-clockwise) and back.
double bearing_to_heading(double bearing);
double heading_to_bearing(double heading);

struct PlanarPoint {
  double x = 0.0;  // metres east of the origin
  double y = 0.0;  // metres north of the origin
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Local equirectangular projection about (lat0, lon0).
class LocalProjection {
 public:
  LocalProjection() = default;
  LocalProjection(double lat0, double lon0);

  double lat0() const noexcept { return lat0_; }
  double lon0() const noexcept { return lon0_; }

  PlanarPoint forward(double lat, double lon) const;
  GeoPoint inverse(double x, double y) const;

 private:
  double lat0_ = 0.0;
  double lon0_ = 0.0;
  double cos_lat0_ = 1.0;
};

}  // namespace kinodiff::geodata
