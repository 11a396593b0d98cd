#pragma once

#include <cstddef>
#include <vector>

#include "kinodiff/geodata/trajectory.hpp"

namespace kinodiff::scoring {

inline constexpr std::size_t kGridCells = 16;
inline constexpr std::size_t kLengthBins = 32;

/// cells x cells grid over a lat/lon bounding box. Points outside are
/// clamped into the boundary cells and counted.
class GeoGrid {
 public:
  /// Bounding box of every point. Throws InputError on an empty dataset.
  static GeoGrid fit(const std::vector<geodata::Trajectory>& data, std::size_t cells = kGridCells);

  GeoGrid(double min_lat, double max_lat, double min_lon, double max_lon, std::size_t cells = kGridCells);

  std::size_t cells() const noexcept { return cells_; }
  /// Row-major cell index (lat row, lon column).
  std::size_t cell_of(double lat, double lon, bool* clamped = nullptr) const;

 private:
  double min_lat_, max_lat_, min_lon_, max_lon_;
  std::size_t cells_;
};

/// Normalized histogram of `values` in `bins` equal-width bins over
/// [lo, hi]; out-of-range values are clamped and counted in `clamped`.
std::vector<double> histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins,
                              std::size_t* clamped = nullptr);

/// Point, origin and destination distributions over a grid.
std::vector<double> point_distribution(const std::vector<geodata::Trajectory>& data, const GeoGrid& grid,
                                       std::size_t* clamped = nullptr);
std::vector<double> endpoint_distribution(const std::vector<geodata::Trajectory>& data, const GeoGrid& grid,
                                          bool origin, std::size_t* clamped = nullptr);

/// Total haversine length of a trajectory in metres.
double path_length(const geodata::Trajectory& traj);

struct GeoErrors {
  double density = 0.0;
  double trip = 0.0;    // mean of origin and destination JSDs
  double length = 0.0;
  std::size_t clamped = 0;  // generated points or lengths outside the real range
};

/// Grid and length range come from the real dataset. Throws InputError if
/// either dataset is empty.
GeoErrors geo_distribution_errors(const std::vector<geodata::Trajectory>& real,
                                  const std::vector<geodata::Trajectory>& generated);

}  // namespace kinodiff::scoring
