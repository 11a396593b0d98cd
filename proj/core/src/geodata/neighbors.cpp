#include "kinodiff/geodata/neighbors.hpp"

#include <algorithm>
#include <cmath>

#include "kinodiff/common/error.hpp"

namespace kinodiff::geodata {

using numerics::Tensor;

NeighborIndex::NeighborIndex(std::vector<CanonicalTraj> items) : items_(std::move(items)) {}

Neighbor align_to(const CanonicalTraj& source, const CanonicalTraj& target) {
  const std::size_t n = target.length();
  const std::size_t m = source.length();
  Neighbor out;
  out.id = source.id;
  out.features = Tensor(numerics::Shape{n, kFeatureCount});
  out.mask.assign(n, 0.0);
  if (m == 0 || !(source.dt > 0.0)) return out;
  const double s_end = source.time_at(m - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = target.time_at(i);
    if (t < source.t0 - 1e-9 || t > s_end + 1e-9) continue;
    const double pos = std::clamp((t - source.t0) / source.dt, 0.0, static_cast<double>(m - 1));
    const auto lo = std::min(static_cast<std::size_t>(pos), m - 1);
    const std::size_t hi = std::min(lo + 1, m - 1);
    const double w = pos - static_cast<double>(lo);
    for (std::size_t c = 0; c < kFeatureCount; ++c)
      out.features.at(i, c) = (1.0 - w) * source.features.at(lo, c) + w * source.features.at(hi, c);
    out.mask[i] = 1.0;
  }
  return out;
}

namespace {

double planar_distance(const CanonicalTraj& a, std::size_t ia, const Tensor& b, std::size_t ib) {
  const Normalizer& norm = *a.normalizer;
  const double dx = norm.denormalize(kX, a.features.at(ia, kX)) - norm.denormalize(kX, b.at(ib, kX));
  const double dy = norm.denormalize(kY, a.features.at(ia, kY)) - norm.denormalize(kY, b.at(ib, kY));
  return std::hypot(dx, dy);
}

}  // namespace

NeighborContext NeighborIndex::query(const CanonicalTraj& target, std::size_t k, double radius, double window_start,
                                     double window_end) const {
  if (!(radius > 0.0)) throw InputError("neighbor query: radius must be > 0");
  if (!target.normalizer) throw InputError("neighbor query: target has no normalizer");
  NeighborContext ctx;
  if (k == 0) return ctx;
  std::vector<Neighbor> candidates;
  for (const CanonicalTraj& item : items_) {
    if (item.id == target.id) continue;
    Neighbor nb = align_to(item, target);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < target.length(); ++i) {
      const double t = target.time_at(i);
      if (nb.mask[i] == 0.0 || t < window_start || t > window_end) {
        continue;
      }
      sum += planar_distance(target, i, nb.features, i);
      ++count;
    }
    if (count == 0) continue;
    nb.distance = sum / static_cast<double>(count);
    if (nb.distance > radius) continue;
    for (std::size_t i = 0; i < target.length(); ++i) {
      const double t = target.time_at(i);
      if (t < window_start || t > window_end) {
        nb.mask[i] = 0.0;
        for (std::size_t c = 0; c < kFeatureCount; ++c) nb.features.at(i, c) = 0.0;
      }
    }
    candidates.push_back(std::move(nb));
  }
  std::sort(candidates.begin(), candidates.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  if (candidates.size() > k) candidates.resize(k);
  ctx.neighbors = std::move(candidates);
  return ctx;
}

NeighborContext NeighborIndex::query(const CanonicalTraj& target, std::size_t k, double radius) const {
  const double start = target.t0;
  const double end = target.time_at(target.length() == 0 ? 0 : target.length() - 1);
  return query(target, k, radius, start, end);
}

}  // namespace kinodiff::geodata
