#pragma once

#include <vector>

#include "kinodiff/geodata/trajectory.hpp"

namespace kinodiff::geodata {

enum class Differencing {
  /// Speed and bearing of the segment leaving each point; the last point
  /// repeats the final segment.
  forward,
  /// Speed and bearing of the chord from the previous to the next point;
  /// end points fall back to one-sided segments. Centred estimates line up
  /// with central time derivatives of position.
  central,
};

struct KinematicsOptions {
  Differencing differencing = Differencing::forward;
  /// Use recorded speeds when every point carries one.
  bool use_recorded_speed = true;
};

/// Fills traj.derived. Acceleration, jerk and curvature are successive
/// differences of the per-point series (last point repeats the previous
/// value); curvature is wrapped bearing change over distance travelled, 0 for
/// zero-length steps. Acceleration and curvature need >= 3 points and jerk
/// >= 4; shorter trajectories leave those arrays empty. Throws InputError on
/// a repeated timestamp.
Trajectory derive_kinematics(Trajectory traj, const KinematicsOptions& options = {});

/// Splits wherever a time gap exceeds `factor` times the median step.
/// Segments shorter than two points are dropped; multiple segments get
/// "#k" id suffixes.
std::vector<Trajectory> split_gaps(const Trajectory& traj, double factor = 10.0);

/// Linear interpolation of lat, lon and (when present) v at n uniformly
/// spaced times over [t_first, t_last]. End points are copied exactly.
/// Derived features are cleared. Throws InputError for n < 2 or zero duration.
Trajectory resample(const Trajectory& traj, std::size_t n);

}  // namespace kinodiff::geodata
