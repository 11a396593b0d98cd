#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/numerics/tensor.hpp"

namespace kinodiff::geodata {

struct Neighbor {
  std::string id;
  double distance = 0.0;      // mean planar distance (m) over the shared window
  numerics::Tensor features;  // n x kFeatureCount on the target's steps, normalized units
  std::vector<double> mask;   // 1 where the neighbor covers the target step, else 0
};

/// Up to K neighbors aligned to a target's time base. Empty is legal.
struct NeighborContext {
  std::vector<Neighbor> neighbors;

  std::size_t size() const noexcept { return neighbors.size(); }
  bool empty() const noexcept { return neighbors.empty(); }
};

/// Read-only index over canonical trajectories sharing one normalizer.
class NeighborIndex {
 public:
  explicit NeighborIndex(std::vector<CanonicalTraj> items);

  const std::vector<CanonicalTraj>& items() const noexcept { return items_; }

  /// K nearest trajectories (excluding the target's own id) by mean planar
  /// distance over the time window they share with the target, restricted
  /// to [window_start, window_end] in seconds and to distance <= radius.
  /// Sorted by (distance, id). Throws InputError unless radius > 0.
  NeighborContext query(const CanonicalTraj& target, std::size_t k, double radius, double window_start,
                        double window_end) const;

  /// Window = the target's full time span.
  NeighborContext query(const CanonicalTraj& target, std::size_t k, double radius) const;

 private:
  std::vector<CanonicalTraj> items_;
};

/// Features of `source` linearly interpolated onto the steps of `target`;
/// steps outside source's time span get zero features and mask 0.
Neighbor align_to(const CanonicalTraj& source, const CanonicalTraj& target);

}  // namespace kinodiff::geodata
