#include "kinodiff/geodata/canonical.hpp"

#include <cmath>

#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/kinematics.hpp"

namespace kinodiff::geodata {

using numerics::Tensor;

std::string norm_mode_name(NormMode mode) { return mode == NormMode::min_max ? "min-max" : "z-score"; }

NormMode parse_norm_mode(const std::string& name) {
  if (name == "min-max") return NormMode::min_max;
  if (name == "z-score") return NormMode::z_score;
  throw InputError("unknown normalization mode '" + name + "' (expected min-max or z-score)");
}

Normalizer::Normalizer(NormMode mode, LocalProjection projection, std::array<double, kFeatureCount> center,
                       std::array<double, kFeatureCount> half_range)
    : mode_(mode), projection_(projection), center_(center), half_range_(half_range) {}

double Normalizer::normalize(std::size_t feature, double physical) const {
  const double g = half_range_.at(feature);
  if (g == 0.0) return 0.0;
  return (physical - center_.at(feature)) / g;
}

double Normalizer::denormalize(std::size_t feature, double normalized) const {
  return normalized * half_range_.at(feature) + center_.at(feature);
}

Tensor physical_features(const Trajectory& traj, const LocalProjection& projection, bool use_recorded_speed) {
  const std::size_t n = traj.points.size();
  const Trajectory* source = &traj;
  Trajectory derived;
  if (traj.derived.speed.size() != n || traj.derived.bearing.size() != n) {
    derived = derive_kinematics(traj, {Differencing::central, use_recorded_speed});
    source = &derived;
  }
  Tensor f(numerics::Shape{n, kFeatureCount});
  double previous = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const TrajPoint& p = traj.points[i];
    const PlanarPoint xy = projection.forward(p.lat, p.lon);
    double heading = bearing_to_heading(source->derived.bearing[i]);
    if (i > 0) heading = previous + wrap_to_pi(heading - previous);
    previous = heading;
    f.at(i, kX) = xy.x;
    f.at(i, kY) = xy.y;
    f.at(i, kSpeed) = source->derived.speed[i];
    f.at(i, kHeading) = heading;
  }
  // Rates by central differences, one-sided at the ends.
  for (std::size_t i = 0; n > 1 && i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? n - 1 : i + 1;
    const double span = traj.points[b].t - traj.points[a].t;
    f.at(i, kAccel) = span > 0.0 ? (f.at(b, kSpeed) - f.at(a, kSpeed)) / span : 0.0;
    f.at(i, kYawRate) = span > 0.0 ? (f.at(b, kHeading) - f.at(a, kHeading)) / span : 0.0;
  }
  return f;
}

Normalizer fit_normalizer(const std::vector<Trajectory>& trajectories, NormMode mode, bool use_recorded_speed) {
  if (trajectories.empty()) throw InputError("fit_normalizer: empty dataset");
  double lat_sum = 0.0, lon_sum = 0.0;
  std::size_t count = 0;
  for (const Trajectory& t : trajectories) {
    for (const TrajPoint& p : t.points) {
      lat_sum += p.lat;
      lon_sum += p.lon;
      ++count;
    }
  }
  const LocalProjection projection(lat_sum / static_cast<double>(count), lon_sum / static_cast<double>(count));

  std::array<double, kFeatureCount> lo, hi, sum{}, sum_sq{};
  lo.fill(INFINITY);
  hi.fill(-INFINITY);
  std::size_t rows = 0;
  for (const Trajectory& t : trajectories) {
    const Tensor f = physical_features(t, projection, use_recorded_speed);
    for (std::size_t i = 0; i < f.rows(); ++i) {
      for (std::size_t c = 0; c < kFeatureCount; ++c) {
        const double v = f.at(i, c);
        lo[c] = std::min(lo[c], v);
        hi[c] = std::max(hi[c], v);
        sum[c] += v;
        sum_sq[c] += v * v;
      }
      ++rows;
    }
  }

  static constexpr const char* names[kFeatureCount] = {"x", "y", "speed", "heading", "acceleration", "yaw_rate"};
  std::array<double, kFeatureCount> center{}, half{};
  std::vector<std::string> warnings;
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    if (mode == NormMode::min_max) {
      center[c] = 0.5 * (lo[c] + hi[c]);
      half[c] = 0.5 * (hi[c] - lo[c]);
    } else {
      const double m = sum[c] / static_cast<double>(rows);
      center[c] = m;
      half[c] = std::sqrt(std::max(0.0, sum_sq[c] / static_cast<double>(rows) - m * m));
    }
    if (!(half[c] > 1e-12 * std::max(1.0, std::abs(center[c])))) {
      half[c] = 0.0;
      center[c] = lo[c];
      warnings.push_back(std::string("feature '") + names[c] + "' is constant; it maps to 0");
    }
  }
  Normalizer norm(mode, projection, center, half);
  for (auto& w : warnings) norm.add_warning(std::move(w));
  return norm;
}

CanonicalTraj normalize(const Trajectory& traj, std::shared_ptr<const Normalizer> normalizer, bool use_recorded_speed) {
  if (!normalizer) throw InputError("normalize: no normalizer");
  const std::size_t n = traj.points.size();
  if (n < 2) throw InputError("normalize: trajectory '" + traj.id + "' needs at least 2 points");
  const double dt = traj.duration() / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    const double step = traj.points[i].t - traj.points[i - 1].t;
    if (std::abs(step - dt) > 1e-6 * dt) {
      throw InputError("normalize: trajectory '" + traj.id + "' is not uniformly sampled; resample first");
    }
  }
  Tensor f = physical_features(traj, normalizer->projection(), use_recorded_speed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < kFeatureCount; ++c) f.at(i, c) = normalizer->normalize(c, f.at(i, c));
  return CanonicalTraj{traj.id, std::move(f), dt, traj.points.front().t, std::move(normalizer)};
}

Trajectory denormalize(const CanonicalTraj& canon) {
  if (!canon.normalizer) throw InputError("denormalize: no normalizer");
  const Normalizer& norm = *canon.normalizer;
  const std::size_t n = canon.length();
  Trajectory traj;
  traj.id = canon.id;
  traj.points.resize(n);
  traj.derived.speed.resize(n);
  traj.derived.bearing.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = norm.denormalize(kX, canon.features.at(i, kX));
    const double y = norm.denormalize(kY, canon.features.at(i, kY));
    const double v = norm.denormalize(kSpeed, canon.features.at(i, kSpeed));
    const double heading = norm.denormalize(kHeading, canon.features.at(i, kHeading));
    const GeoPoint g = norm.projection().inverse(x, y);
    traj.points[i] = TrajPoint{g.lat, g.lon, canon.time_at(i), v};
    traj.derived.speed[i] = v;
    traj.derived.bearing[i] = heading_to_bearing(heading);
  }
  return traj;
}

CanonicalDataset build_canonical(const std::vector<Trajectory>& trajectories, const CanonicalOptions& options,
                                 std::shared_ptr<const Normalizer> fitted) {
  std::vector<Trajectory> resampled;
  for (const Trajectory& t : trajectories) {
    for (const Trajectory& seg : split_gaps(t, options.gap_factor)) {
      if (!(seg.duration() > 0.0)) continue;
      resampled.push_back(resample(seg, options.length));
    }
  }
  if (resampled.empty()) throw InputError("build_canonical: no usable trajectories");
  CanonicalDataset out;
  out.normalizer = fitted ? std::move(fitted)
                          : std::make_shared<const Normalizer>(
                                fit_normalizer(resampled, options.mode, options.use_recorded_speed));
  out.items.reserve(resampled.size());
  for (const Trajectory& t : resampled) out.items.push_back(normalize(t, out.normalizer, options.use_recorded_speed));
  return out;
}

}  // namespace kinodiff::geodata
