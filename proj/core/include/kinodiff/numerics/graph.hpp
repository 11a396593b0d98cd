#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kinodiff/numerics/tensor.hpp"

namespace kinodiff::numerics {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid with its graph.
struct Var {
  Graph* graph = nullptr;
  std::uint32_t id = 0;
};

/// A differentiable operation. Implementations must be pure: forward depends
/// only on the inputs and the op's own constant configuration.
class Op {
 public:
  virtual ~Op() = default;
  virtual std::string name() const = 0;
  virtual Tensor forward(std::span<const Tensor* const> inputs) const = 0;
  /// Accumulates d(root)/d(input_i) into grad_inputs[i]. Entries are null for
  /// inputs that do not require a gradient.
  virtual void backward(std::span<const Tensor* const> inputs, const Tensor& output,
                        const Tensor& grad_output, std::span<Tensor* const> grad_inputs) const = 0;
};

using GradMap = std::map<std::uint32_t, Tensor>;

/// Tape of a computation, rebuilt for every batch.
///
/// Nodes are recorded in creation order, which is a topological order, so the
/// graph is acyclic by construction. Op nodes are evaluated by forward();
/// backward() requires the root to be evaluated against the current leaf
/// values and to be a single-element tensor.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  /// Replaces a leaf value; every op value becomes stale until forward().
  void set_value(Var leaf, Tensor value);

  Var apply(std::unique_ptr<Op> op, std::vector<Var> inputs);

  /// Evaluates every ancestor of `root` and returns the root value.
  const Tensor& forward(Var root);
  /// Reverse sweep from a scalar root. Returns gradients of all variables
  /// reachable from the root, keyed by node id.
  GradMap backward(Var root);

  const Tensor& value(Var v) const;
  /// Gradient after backward(); throws if none was computed for `v`.
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  bool is_leaf(Var v) const { return node(v).op == nullptr; }
  std::string op_name(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    std::unique_ptr<Op> op;
    std::vector<std::uint32_t> inputs;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::uint64_t value_epoch = UINT64_MAX;
  };

  const Node& node(Var v) const;
  Node& node(Var v);
  std::vector<std::uint32_t> ancestors(std::uint32_t root) const;

  std::vector<Node> nodes_;
  std::uint64_t epoch_ = 0;
};

// ---- elementwise -----------------------------------------------------------
Var identity(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var square(Var a);
Var exp(Var a);
Var tanh(Var a);
Var sin(Var a);
Var cos(Var a);
Var silu(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator*(Var a, double s) { return scale(a, s); }

// ---- reductions ------------------------------------------------------------
Var sum(Var a);
Var mean(Var a);
/// Sums each row of a matrix; result has shape [rows].
Var row_sum(Var a);

// ---- matrix ----------------------------------------------------------------
Var matmul(Var a, Var b);
/// x (n x C) plus a bias of shape [C] or [1, C] added to every row.
Var add_row(Var x, Var bias);
/// Row-wise softmax of a matrix (a vector is treated as one row).
Var softmax_rows(Var a);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var concat_cols(const std::vector<Var>& parts);
/// Per-column affine map y[:, c] = x[:, c] * gain[c] + offset[c] with constant coefficients.
Var affine_cols(Var x, std::vector<double> gain, std::vector<double> offset);
/// Central difference along rows: out[i] = (x[i + 2] - x[i]) / (2 dt), shape (n - 2) x C.
/// Columns flagged in `wrap` take the shortest signed angular difference.
Var central_diff_rows(Var x, double dt, std::vector<bool> wrap);

}  // namespace kinodiff::numerics
