#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kinodiff/geodata/trajectory.hpp"
#include "kinodiff/numerics/rng.hpp"
#include "kinodiff/synth/inject.hpp"

namespace kinodiff::synth {

struct Label {
  std::string id;
  bool anomalous = false;
  std::optional<AnomalySpec> spec;

  friend bool operator==(const Label&, const Label&) = default;
};

struct LabeledDataset {
  std::vector<geodata::Trajectory> trajectories;
  std::vector<Label> labels;
  double anomaly_rate = 0.0;

  std::size_t anomalous_count() const;
};

struct DatasetOptions {
  double rate = 0.05;
  std::map<AnomalyKind, double> kind_mix{{AnomalyKind::speed, 0.25},
                                         {AnomalyKind::bearing, 0.25},
                                         {AnomalyKind::drift, 0.25},
                                         {AnomalyKind::replay, 0.25}};
  std::size_t window_min = 20;
  std::size_t window_max = 40;
  SeverityRanges ranges;

  /// Throws InputError for rate outside (0, 1), negative or non-unit kind
  /// weights, or window bounds below the minimum.
  void validate() const;
};

/// ceil(rate * N), guarded against floating-point round-up.
std::size_t anomalous_target(double rate, std::size_t n);

/// A uniformly random subset of ceil(rate * N) normals receives one anomaly
/// each. Kinds are drawn from kind_mix, severities uniformly from their
/// ranges, windows uniformly in length and position. Each anomaly records
/// its own seed, from which its window and severity are re-derivable.
/// Throws InputError for rate outside (0, 1), a kind mix not summing to 1,
/// too few normals, or trajectories too short for the window.
LabeledDataset build_dataset(const std::vector<geodata::Trajectory>& normals, const DatasetOptions& options,
                             numerics::Rng& rng);

/// Columns: id,label,kind,severity,window_start,window_end,seed.
void write_labels(std::ostream& out, const std::vector<Label>& labels);
std::vector<Label> read_labels(std::istream& in);

}  // namespace kinodiff::synth
