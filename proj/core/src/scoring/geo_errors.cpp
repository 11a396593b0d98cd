#include "kinodiff/scoring/geo_errors.hpp"

#include <algorithm>
#include <cmath>

#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/geo.hpp"
#include "kinodiff/scoring/metrics.hpp"

namespace kinodiff::scoring {

using geodata::Trajectory;

GeoGrid GeoGrid::fit(const std::vector<Trajectory>& data, std::size_t cells) {
  double lat0 = INFINITY, lat1 = -INFINITY, lon0 = INFINITY, lon1 = -INFINITY;
  for (const Trajectory& t : data)
    for (const auto& p : t.points) {
      lat0 = std::min(lat0, p.lat);
      lat1 = std::max(lat1, p.lat);
      lon0 = std::min(lon0, p.lon);
      lon1 = std::max(lon1, p.lon);
    }
  if (!(lat0 <= lat1)) throw InputError("geo grid: empty dataset");
  return GeoGrid(lat0, lat1, lon0, lon1, cells);
}

GeoGrid::GeoGrid(double min_lat, double max_lat, double min_lon, double max_lon, std::size_t cells)
    : min_lat_(min_lat), max_lat_(max_lat), min_lon_(min_lon), max_lon_(max_lon), cells_(cells) {
  if (cells_ == 0) throw InputError("geo grid: cells must be > 0");
}

namespace {

std::size_t bin_of(double v, double lo, double hi, std::size_t bins, bool& clamped) {
  if (v < lo || v > hi) clamped = true;
  if (!(hi > lo)) return 0;
  const double f = (std::clamp(v, lo, hi) - lo) / (hi - lo);
  return std::min(bins - 1, static_cast<std::size_t>(f * static_cast<double>(bins)));
}

std::vector<double> normalized(std::vector<double> counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (total > 0.0)
    for (double& c : counts) c /= total;
  return counts;
}

}  // namespace

std::size_t GeoGrid::cell_of(double lat, double lon, bool* clamped) const {
  bool c = false;
  const std::size_t r = bin_of(lat, min_lat_, max_lat_, cells_, c);
  const std::size_t k = bin_of(lon, min_lon_, max_lon_, cells_, c);
  if (clamped) *clamped = c;
  return r * cells_ + k;
}

std::vector<double> histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins,
                              std::size_t* clamped) {
  if (bins == 0) throw InputError("histogram: bins must be > 0");
  std::vector<double> counts(bins, 0.0);
  for (double v : values) {
    bool c = false;
    counts[bin_of(v, lo, hi, bins, c)] += 1.0;
    if (c && clamped) ++*clamped;
  }
  return normalized(std::move(counts));
}

std::vector<double> point_distribution(const std::vector<Trajectory>& data, const GeoGrid& grid,
                                       std::size_t* clamped) {
  std::vector<double> counts(grid.cells() * grid.cells(), 0.0);
  for (const Trajectory& t : data)
    for (const auto& p : t.points) {
      bool c = false;
      counts[grid.cell_of(p.lat, p.lon, &c)] += 1.0;
      if (c && clamped) ++*clamped;
    }
  return normalized(std::move(counts));
}

std::vector<double> endpoint_distribution(const std::vector<Trajectory>& data, const GeoGrid& grid, bool origin,
                                          std::size_t* clamped) {
  std::vector<double> counts(grid.cells() * grid.cells(), 0.0);
  for (const Trajectory& t : data) {
    if (t.points.empty()) continue;
    const auto& p = origin ? t.points.front() : t.points.back();
    bool c = false;
    counts[grid.cell_of(p.lat, p.lon, &c)] += 1.0;
    if (c && clamped) ++*clamped;
  }
  return normalized(std::move(counts));
}

double path_length(const Trajectory& traj) {
  double s = 0.0;
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    const auto& a = traj.points[i - 1];
    const auto& b = traj.points[i];
    s += geodata::haversine_distance(a.lat, a.lon, b.lat, b.lon);
  }
  return s;
}

GeoErrors geo_distribution_errors(const std::vector<Trajectory>& real, const std::vector<Trajectory>& generated) {
  if (real.empty() || generated.empty()) throw InputError("geo errors: both datasets must be non-empty");
  const GeoGrid grid = GeoGrid::fit(real);
  GeoErrors e;
  std::size_t ignored = 0;
  e.density = jsd(point_distribution(real, grid), point_distribution(generated, grid, &e.clamped));
  const double origin = jsd(endpoint_distribution(real, grid, true), endpoint_distribution(generated, grid, true, &ignored));
  const double dest = jsd(endpoint_distribution(real, grid, false), endpoint_distribution(generated, grid, false, &ignored));
  e.trip = 0.5 * (origin + dest);

  std::vector<double> real_len, gen_len;
  for (const Trajectory& t : real) real_len.push_back(path_length(t));
  for (const Trajectory& t : generated) gen_len.push_back(path_length(t));
  const auto [lo, hi] = std::minmax_element(real_len.begin(), real_len.end());
  e.length = jsd(histogram(real_len, *lo, *hi, kLengthBins), histogram(gen_len, *lo, *hi, kLengthBins, &e.clamped));
  return e;
}

}  // namespace kinodiff::scoring
