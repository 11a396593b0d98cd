#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kinodiff/numerics/graph.hpp"

namespace kinodiff::numerics {

/// Builds a scalar expression of `x` inside `graph`.
using ScalarFn = std::function<Var(Graph& graph, Var x)>;

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
/// Throws NumericError when the function is not finite at a probed point.
double grad_check(const ScalarFn& fn, const Tensor& point, double h);

struct LeafCheckOptions {
  double h = 1e-6;
  /// Coordinates probed per leaf; 0 probes all of them.
  std::size_t max_coords_per_leaf = 0;
  std::uint64_t seed = 0;
};

/// Same error measure over several leaves of an already-built graph. Leaf
/// values are restored before returning. A leaf the root does not depend on
/// is checked against a zero gradient.
double grad_check_leaves(Graph& graph, Var root, const std::vector<Var>& leaves, const LeafCheckOptions& options);

}  // namespace kinodiff::numerics
