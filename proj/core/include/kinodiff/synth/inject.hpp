#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "kinodiff/geodata/trajectory.hpp"
#include "kinodiff/numerics/rng.hpp"

namespace kinodiff::synth {

enum class AnomalyKind { speed, bearing, drift, replay };

std::string kind_name(AnomalyKind kind);
AnomalyKind parse_kind(const std::string& name);
/// Bearing, drift and replay break the motion model; speed does not.
bool violates_kinematics(AnomalyKind kind);

/// Severity semantics per kind:
///   speed   - time-scale factor u in [0.5, 1.5], |u - 1| >= 0.2; speed becomes v / u
///   bearing - rotation in degrees, |s| in [90, 180], sign = direction
///   drift   - lateral offset growth in m per step, |s| in [0.5, 2], sign = side
///   replay  - donor phase in [0, 1]: where the copied segment starts in the donor
struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::speed;
  double severity = 0.0;
  std::size_t window_start = 0;
  std::size_t window_end = 0;  // exclusive
  std::uint64_t seed = 0;

  friend bool operator==(const AnomalySpec&, const AnomalySpec&) = default;
};

struct SeverityRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct SeverityRanges {
  SeverityRange speed{0.5, 1.5};
  double speed_exclusion = 0.2;  // |u - 1| below this is rejected
  SeverityRange bearing{90.0, 180.0};
  SeverityRange drift{0.5, 2.0};
  SeverityRange replay{0.0, 1.0};
};

inline constexpr std::size_t kMinWindow = 5;

double default_severity(AnomalyKind kind);
/// Throws InputError if the severity is outside its kind's range.
void check_severity(AnomalyKind kind, double severity, const SeverityRanges& ranges = {});
/// Uniform severity within range (random sign for bearing and drift).
double sample_severity(AnomalyKind kind, const SeverityRanges& ranges, numerics::Rng& rng);

struct Injected {
  geodata::Trajectory traj;
  AnomalySpec spec;  // as applied; bearing windows extend to the end of the track
};

/// Applies one anomaly. The derived features of the result are cleared.
/// Throws InputError for a window shorter than 5 steps or out of bounds, a
/// severity out of range, or a replay without a donor long enough to supply
/// the window.
Injected inject(const geodata::Trajectory& traj, const AnomalySpec& spec, const SeverityRanges& ranges = {},
                const geodata::Trajectory* donor = nullptr);

}  // namespace kinodiff::synth
