#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "kinodiff/geodata/geo.hpp"
#include "kinodiff/geodata/trajectory.hpp"
#include "kinodiff/numerics/tensor.hpp"

namespace kinodiff::geodata {

/// Columns of the canonical feature matrix.
enum Feature : std::size_t { kX = 0, kY = 1, kSpeed = 2, kHeading = 3, kAccel = 4, kYawRate = 5 };
inline constexpr std::size_t kFeatureCount = 6;

enum class NormMode { min_max, z_score };

std::string norm_mode_name(NormMode mode);
NormMode parse_norm_mode(const std::string& name);

/// Per-feature affine scaling plus the planar projection origin.
///
/// Physical features are x, y (metres, local equirectangular), speed (m/s)
/// heading (rad, planar convention: 0 = east, counter-clockwise, unwrapped
/// along each trajectory), acceleration (m/s^2) and yaw rate (rad/s), the
/// last two being time derivatives of speed and heading. Min-max mode maps [min, max] onto
/// [-1, 1]; z-score mode subtracts the mean and divides by the standard
/// deviation. A feature that is constant over the fitting set maps to 0.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(NormMode mode, LocalProjection projection, std::array<double, kFeatureCount> center,
             std::array<double, kFeatureCount> half_range);

  NormMode mode() const noexcept { return mode_; }
  const LocalProjection& projection() const noexcept { return projection_; }
  /// physical = normalized * gain + offset
  double gain(std::size_t feature) const { return half_range_.at(feature); }
  double offset(std::size_t feature) const { return center_.at(feature); }
  const std::array<double, kFeatureCount>& centers() const noexcept { return center_; }
  const std::array<double, kFeatureCount>& half_ranges() const noexcept { return half_range_; }

  double normalize(std::size_t feature, double physical) const;
  double denormalize(std::size_t feature, double normalized) const;

  /// Features flagged constant during fitting.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  friend bool operator==(const Normalizer& a, const Normalizer& b) {
    return a.mode_ == b.mode_ && a.projection_.lat0() == b.projection_.lat0() &&
           a.projection_.lon0() == b.projection_.lon0() && a.center_ == b.center_ && a.half_range_ == b.half_range_;
  }

 private:
  NormMode mode_ = NormMode::min_max;
  LocalProjection projection_;
  std::array<double, kFeatureCount> center_{};
  std::array<double, kFeatureCount> half_range_{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<std::string> warnings_;
};

/// Fixed-length, uniformly sampled, normalized trajectory.
struct CanonicalTraj {
  std::string id;
  numerics::Tensor features;  // n x kFeatureCount, normalized units
  double dt = 0.0;            // seconds per step
  double t0 = 0.0;            // time of the first step
  std::shared_ptr<const Normalizer> normalizer;

  std::size_t length() const noexcept { return features.rows(); }
  double time_at(std::size_t step) const noexcept { return t0 + dt * static_cast<double>(step); }
};

/// Physical (unnormalized) feature rows of a uniformly sampled trajectory.
/// Uses traj.derived speed/bearing when present, otherwise centred
/// differences of positions (recorded speeds used only when
/// `use_recorded_speed`). Heading is unwrapped along the trajectory;
/// acceleration and yaw rate are central time differences of speed and
/// heading.
numerics::Tensor physical_features(const Trajectory& traj, const LocalProjection& projection,
                                   bool use_recorded_speed = false);

/// Fits per-feature statistics on uniformly sampled trajectories. The
/// projection origin is the centroid of all points.
Normalizer fit_normalizer(const std::vector<Trajectory>& trajectories, NormMode mode, bool use_recorded_speed = false);

/// Requires uniform sampling (relative step jitter below 1e-6).
CanonicalTraj normalize(const Trajectory& traj, std::shared_ptr<const Normalizer> normalizer,
                        bool use_recorded_speed = false);

/// Inverse of normalize: positions, times and speeds, with derived speed and
/// bearing filled in so that normalize(denormalize(c)) reproduces c whenever
/// the rate columns of c are consistent with its speed and heading.
Trajectory denormalize(const CanonicalTraj& canon);

struct CanonicalOptions {
  std::size_t length = 180;
  NormMode mode = NormMode::min_max;
  double gap_factor = 10.0;
  bool use_recorded_speed = false;
};

struct CanonicalDataset {
  std::shared_ptr<const Normalizer> normalizer;
  std::vector<CanonicalTraj> items;
};

/// Gap split, resample and normalize. When `fitted` is null a normalizer is
/// fitted on this data (use this for the training split only).
CanonicalDataset build_canonical(const std::vector<Trajectory>& trajectories, const CanonicalOptions& options,
                                 std::shared_ptr<const Normalizer> fitted = nullptr);

}  // namespace kinodiff::geodata
