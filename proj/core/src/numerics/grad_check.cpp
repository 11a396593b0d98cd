#include "kinodiff/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kinodiff/common/error.hpp"
#include "kinodiff/numerics/rng.hpp"

namespace kinodiff::numerics {

namespace {

double finite_value(Graph& graph, Var root) {
  const double v = graph.forward(root).item();
  if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
  return v;
}

double probe(Graph& graph, Var root, Var leaf, const Tensor& base, std::size_t index, double h) {
  Tensor shifted = base;
  shifted[index] = base[index] + h;
  graph.set_value(leaf, shifted);
  const double plus = finite_value(graph, root);
  shifted[index] = base[index] - h;
  graph.set_value(leaf, shifted);
  const double minus = finite_value(graph, root);
  return (plus - minus) / (2.0 * h);
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

}  // namespace

double grad_check(const ScalarFn& fn, const Tensor& point, double h) {
  if (!(h > 0.0)) throw InputError("grad_check: h must be positive");
  Graph graph;
  Var x = graph.variable(point);
  Var root = fn(graph, x);
  finite_value(graph, root);
  graph.backward(root);
  const Tensor analytic = graph.grad(x);
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    worst = std::max(worst, relative_error(analytic[i], probe(graph, root, x, point, i, h)));
  }
  return worst;
}

double grad_check_leaves(Graph& graph, Var root, const std::vector<Var>& leaves, const LeafCheckOptions& options) {
  if (!(options.h > 0.0)) throw InputError("grad_check: h must be positive");
  finite_value(graph, root);
  const GradMap grads = graph.backward(root);
  Rng rng(options.seed);
  double worst = 0.0;
  for (const Var& leaf : leaves) {
    const Tensor base = graph.value(leaf);
    // Leaves the root does not depend on have no recorded gradient.
    const auto found = grads.find(leaf.id);
    const Tensor analytic = found != grads.end() ? found->second : Tensor(base.shape());
    std::vector<std::size_t> coords(base.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_leaf > 0 && coords.size() > options.max_coords_per_leaf) {
      for (std::size_t i = 0; i < options.max_coords_per_leaf; ++i) {
        std::swap(coords[i], coords[i + rng.index(coords.size() - i)]);
      }
      coords.resize(options.max_coords_per_leaf);
    }
    for (std::size_t idx : coords) {
      worst = std::max(worst, relative_error(analytic[idx], probe(graph, root, leaf, base, idx, options.h)));
    }
    graph.set_value(leaf, base);
  }
  graph.forward(root);
  return worst;
}

}  // namespace kinodiff::numerics
