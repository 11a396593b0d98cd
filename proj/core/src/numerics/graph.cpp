#include "kinodiff/numerics/graph.hpp"

#include <algorithm>
#include <cmath>

#include "kinodiff/common/angles.hpp"
#include "kinodiff/common/error.hpp"

namespace kinodiff::numerics {

// ---- Graph -----------------------------------------------------------------

const Graph::Node& Graph::node(Var v) const {
  if (v.graph != this || v.id >= nodes_.size()) throw Error("Var does not belong to this graph");
  return nodes_[v.id];
}

Graph::Node& Graph::node(Var v) {
  if (v.graph != this || v.id >= nodes_.size()) throw Error("Var does not belong to this graph");
  return nodes_[v.id];
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.value_epoch = epoch_;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::variable(Tensor value) {
  Var v = constant(std::move(value));
  nodes_[v.id].requires_grad = true;
  return v;
}

void Graph::set_value(Var leaf, Tensor value) {
  Node& n = node(leaf);
  if (n.op) throw Error("set_value: node " + std::to_string(leaf.id) + " is not a leaf");
  ++epoch_;
  n.value = std::move(value);
  n.value_epoch = epoch_;
}

Var Graph::apply(std::unique_ptr<Op> op, std::vector<Var> inputs) {
  Node n;
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    const Node& src = node(in);
    n.inputs.push_back(in.id);
    n.requires_grad = n.requires_grad || src.requires_grad;
  }
  n.op = std::move(op);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

std::vector<std::uint32_t> Graph::ancestors(std::uint32_t root) const {
  std::vector<char> seen(root + 1, 0);
  std::vector<std::uint32_t> stack{root};
  seen[root] = 1;
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    for (std::uint32_t in : nodes_[id].inputs) {
      if (!seen[in]) {
        seen[in] = 1;
        stack.push_back(in);
      }
    }
  }
  std::vector<std::uint32_t> order;
  for (std::uint32_t id = 0; id <= root; ++id) {
    if (seen[id]) order.push_back(id);
  }
  return order;
}

const Tensor& Graph::forward(Var root) {
  node(root);
  std::vector<const Tensor*> in_values;
  for (std::uint32_t id : ancestors(root.id)) {
    Node& n = nodes_[id];
    if (!n.op) continue;
    in_values.clear();
    for (std::uint32_t in : n.inputs) in_values.push_back(&nodes_[in].value);
    n.value = n.op->forward(in_values);
    n.value_epoch = epoch_;
  }
  return nodes_[root.id].value;
}

GradMap Graph::backward(Var root) {
  Node& r = node(root);
  if (r.op && r.value_epoch != epoch_) {
    throw Error("backward: node " + std::to_string(root.id) + " has not been evaluated; call forward first");
  }
  if (r.value.size() != 1) {
    throw ShapeError("backward: root must be scalar, got shape " + shape_to_string(r.value.shape()));
  }
  const std::vector<std::uint32_t> order = ancestors(root.id);
  for (std::uint32_t id : order) {
    Node& n = nodes_[id];
    n.has_grad = n.requires_grad;
    if (n.requires_grad) {
      n.grad = Tensor(n.value.shape());
    } else {
      n.grad = Tensor();
    }
  }
  if (!r.requires_grad) return {};
  r.grad.fill(1.0);

  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& n = nodes_[*it];
    if (!n.op || !n.requires_grad) continue;
    in_values.clear();
    in_grads.clear();
    for (std::uint32_t in : n.inputs) {
      Node& src = nodes_[in];
      in_values.push_back(&src.value);
      in_grads.push_back(src.requires_grad ? &src.grad : nullptr);
    }
    n.op->backward(in_values, n.value, n.grad, in_grads);
  }

  GradMap grads;
  for (std::uint32_t id : order) {
    const Node& n = nodes_[id];
    if (!n.op && n.requires_grad) grads.emplace(id, n.grad);
  }
  return grads;
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  if (n.op && n.value_epoch != epoch_) throw Error("value: node " + std::to_string(v.id) + " is stale; call forward first");
  return n.value;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = node(v);
  if (!n.has_grad) throw Error("grad: no gradient recorded for node " + std::to_string(v.id));
  return n.grad;
}

std::string Graph::op_name(Var v) const {
  const Node& n = node(v);
  return n.op ? n.op->name() : (n.requires_grad ? "variable" : "constant");
}

// ---- op helpers ------------------------------------------------------------

namespace {

Graph& graph_of(Var a) {
  if (!a.graph) throw Error("Var is not attached to a graph");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  if (a.graph != b.graph) throw Error("operands belong to different graphs");
  return graph_of(a);
}

[[noreturn]] void shape_mismatch(const std::string& op, const Tensor& a, const Tensor& b) {
  throw ShapeError(op + ": shape mismatch " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
}

void require_matrix(const std::string& op, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError(op + ": expected a matrix, got shape " + shape_to_string(a.shape()));
}

void accumulate(Tensor* dst, const Tensor& src) {
  if (!dst) return;
  for (std::size_t i = 0; i < src.size(); ++i) (*dst)[i] += src[i];
}

/// Elementwise unary op defined by f and f' (f' may use the output).
template <typename F, typename DF>
class UnaryOp final : public Op {
 public:
  UnaryOp(std::string name, F f, DF df) : name_(std::move(name)), f_(f), df_(df) {}
  std::string name() const override { return name_; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    Tensor out(in[0]->shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f_((*in[0])[i]);
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor& out, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    if (!gin[0]) return;
    for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * df_((*in[0])[i], out[i]);
  }

 private:
  std::string name_;
  F f_;
  DF df_;
};

template <typename F, typename DF>
Var unary(Var a, std::string name, F f, DF df) {
  return graph_of(a).apply(std::make_unique<UnaryOp<F, DF>>(std::move(name), f, df), {a});
}

enum class Binary { add, sub, mul };

class BinaryOp final : public Op {
 public:
  explicit BinaryOp(Binary kind) : kind_(kind) {}
  std::string name() const override {
    switch (kind_) {
      case Binary::add: return "add";
      case Binary::sub: return "sub";
      case Binary::mul: return "mul";
    }
    return "binary";
  }
  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    if (a.shape() != b.shape()) shape_mismatch(name(), a, b);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
      switch (kind_) {
        case Binary::add: out[i] = a[i] + b[i]; break;
        case Binary::sub: out[i] = a[i] - b[i]; break;
        case Binary::mul: out[i] = a[i] * b[i]; break;
      }
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    for (std::size_t i = 0; i < g.size(); ++i) {
      switch (kind_) {
        case Binary::add:
          if (gin[0]) (*gin[0])[i] += g[i];
          if (gin[1]) (*gin[1])[i] += g[i];
          break;
        case Binary::sub:
          if (gin[0]) (*gin[0])[i] += g[i];
          if (gin[1]) (*gin[1])[i] -= g[i];
          break;
        case Binary::mul:
          if (gin[0]) (*gin[0])[i] += g[i] * (*in[1])[i];
          if (gin[1]) (*gin[1])[i] += g[i] * (*in[0])[i];
          break;
      }
    }
  }

 private:
  Binary kind_;
};

class ScaleOp final : public Op {
 public:
  ScaleOp(double factor, double offset) : factor_(factor), offset_(offset) {}
  std::string name() const override { return "scale"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    Tensor out(in[0]->shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor_ * (*in[0])[i] + offset_;
    return out;
  }
  void backward(std::span<const Tensor* const>, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    if (!gin[0]) return;
    for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += factor_ * g[i];
  }

 private:
  double factor_;
  double offset_;
};

class SumOp final : public Op {
 public:
  explicit SumOp(bool average) : average_(average) {}
  std::string name() const override { return average_ ? "mean" : "sum"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    double s = 0.0;
    for (double v : in[0]->data()) s += v;
    if (average_) {
      if (in[0]->empty()) throw ShapeError("mean: empty tensor");
      s /= static_cast<double>(in[0]->size());
    }
    return Tensor::scalar(s);
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    if (!gin[0]) return;
    const double d = average_ ? g[0] / static_cast<double>(in[0]->size()) : g[0];
    for (double& v : gin[0]->data()) v += d;
  }

 private:
  bool average_;
};

class RowSumOp final : public Op {
 public:
  std::string name() const override { return "row_sum"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& a = *in[0];
    require_matrix(name(), a);
    Tensor out(Shape{a.rows()});
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < a.cols(); ++c) s += a.at(r, c);
      out[r] = s;
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    if (!gin[0]) return;
    const Tensor& a = *in[0];
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) gin[0]->at(r, c) += g[r];
  }
};

class MatmulOp final : public Op {
 public:
  std::string name() const override { return "matmul"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) shape_mismatch(name(), a, b);
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out(Shape{m, n});
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      double* row = po + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = pa[i * k + p];
        if (av == 0.0) continue;
        const double* brow = pb + p * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
      }
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    const Tensor& a = *in[0];
    const Tensor& b = *in[1];
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    const double* pg = g.data().data();
    if (gin[0]) {
      double* da = gin[0]->data().data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          const double* grow = pg + i * n;
          const double* brow = pb + p * n;
          for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
          da[i * k + p] += s;
        }
    }
    if (gin[1]) {
      double* db = gin[1]->data().data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = pa[i * k + p];
          if (av == 0.0) continue;
          const double* grow = pg + i * n;
          double* drow = db + p * n;
          for (std::size_t j = 0; j < n; ++j) drow[j] += av * grow[j];
        }
    }
  }
};

class AddRowOp final : public Op {
 public:
  std::string name() const override { return "add_row"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& x = *in[0];
    const Tensor& b = *in[1];
    require_matrix(name(), x);
    if (b.size() != x.cols() || b.rank() > 2 || (b.rank() == 2 && b.rows() != 1)) shape_mismatch(name(), x, b);
    Tensor out = x;
    const std::size_t c = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t j = 0; j < c; ++j) out[r * c + j] += b[j];
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    accumulate(gin[0], g);
    if (gin[1]) {
      const std::size_t c = in[0]->cols();
      for (std::size_t r = 0; r < in[0]->rows(); ++r)
        for (std::size_t j = 0; j < c; ++j) (*gin[1])[j] += g[r * c + j];
    }
  }
};

class SoftmaxRowsOp final : public Op {
 public:
  std::string name() const override { return "softmax_rows"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& a = *in[0];
    if (a.rank() == 0 || a.rank() > 2) throw ShapeError("softmax_rows: expected vector or matrix, got " + shape_to_string(a.shape()));
    Tensor out(a.shape());
    const std::size_t c = a.cols();
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double mx = -INFINITY;
      for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, a[r * c + j]);
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        out[r * c + j] = std::exp(a[r * c + j] - mx);
        s += out[r * c + j];
      }
      for (std::size_t j = 0; j < c; ++j) out[r * c + j] /= s;
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor& out, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    if (!gin[0]) return;
    const std::size_t c = in[0]->cols();
    for (std::size_t r = 0; r < in[0]->rows(); ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[r * c + j] * out[r * c + j];
      for (std::size_t j = 0; j < c; ++j) (*gin[0])[r * c + j] += out[r * c + j] * (g[r * c + j] - dot);
    }
  }
};

class SliceOp final : public Op {
 public:
  SliceOp(bool rows, std::size_t begin, std::size_t end) : rows_(rows), begin_(begin), end_(end) {}
  std::string name() const override { return rows_ ? "slice_rows" : "slice_cols"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& a = *in[0];
    require_matrix(name(), a);
    const std::size_t limit = rows_ ? a.rows() : a.cols();
    if (begin_ >= end_ || end_ > limit) {
      throw ShapeError(name() + ": range [" + std::to_string(begin_) + ", " + std::to_string(end_) +
                       ") out of bounds for shape " + shape_to_string(a.shape()));
    }
    const std::size_t r = rows_ ? end_ - begin_ : a.rows();
    const std::size_t c = rows_ ? a.cols() : end_ - begin_;
    Tensor out(Shape{r, c});
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        out.at(i, j) = rows_ ? a.at(i + begin_, j) : a.at(i, j + begin_);
    return out;
  }
  void backward(std::span<const Tensor* const>, const Tensor& out, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    if (!gin[0]) return;
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) {
        if (rows_) {
          gin[0]->at(i + begin_, j) += g.at(i, j);
        } else {
          gin[0]->at(i, j + begin_) += g.at(i, j);
        }
      }
  }

 private:
  bool rows_;
  std::size_t begin_;
  std::size_t end_;
};

class ConcatColsOp final : public Op {
 public:
  std::string name() const override { return "concat_cols"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    std::size_t rows = 0, cols = 0;
    for (std::size_t k = 0; k < in.size(); ++k) {
      require_matrix(name(), *in[k]);
      if (k == 0) rows = in[k]->rows();
      if (in[k]->rows() != rows) shape_mismatch(name(), *in[0], *in[k]);
      cols += in[k]->cols();
    }
    Tensor out(Shape{rows, cols});
    std::size_t off = 0;
    for (const Tensor* t : in) {
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < t->cols(); ++j) out.at(i, off + j) = t->at(i, j);
      off += t->cols();
    }
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    std::size_t off = 0;
    for (std::size_t k = 0; k < in.size(); ++k) {
      const Tensor& t = *in[k];
      if (gin[k]) {
        for (std::size_t i = 0; i < t.rows(); ++i)
          for (std::size_t j = 0; j < t.cols(); ++j) gin[k]->at(i, j) += g.at(i, off + j);
      }
      off += t.cols();
    }
  }
};

class AffineColsOp final : public Op {
 public:
  AffineColsOp(std::vector<double> gain, std::vector<double> offset) : gain_(std::move(gain)), offset_(std::move(offset)) {}
  std::string name() const override { return "affine_cols"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& x = *in[0];
    require_matrix(name(), x);
    if (gain_.size() != x.cols() || offset_.size() != x.cols()) {
      throw ShapeError("affine_cols: " + std::to_string(gain_.size()) + " coefficients for shape " +
                       shape_to_string(x.shape()));
    }
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) out.at(i, j) = x.at(i, j) * gain_[j] + offset_[j];
    return out;
  }
  void backward(std::span<const Tensor* const> in, const Tensor&, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    if (!gin[0]) return;
    for (std::size_t i = 0; i < in[0]->rows(); ++i)
      for (std::size_t j = 0; j < in[0]->cols(); ++j) gin[0]->at(i, j) += g.at(i, j) * gain_[j];
  }

 private:
  std::vector<double> gain_;
  std::vector<double> offset_;
};

class CentralDiffOp final : public Op {
 public:
  CentralDiffOp(double dt, std::vector<bool> wrap) : dt_(dt), wrap_(std::move(wrap)) {}
  std::string name() const override { return "central_diff_rows"; }
  Tensor forward(std::span<const Tensor* const> in) const override {
    const Tensor& x = *in[0];
    require_matrix(name(), x);
    if (x.rows() < 3) throw ShapeError("central_diff_rows: need at least 3 rows, got shape " + shape_to_string(x.shape()));
    if (!wrap_.empty() && wrap_.size() != x.cols()) {
      throw ShapeError("central_diff_rows: wrap mask has " + std::to_string(wrap_.size()) + " entries for shape " +
                       shape_to_string(x.shape()));
    }
    Tensor out(Shape{x.rows() - 2, x.cols()});
    for (std::size_t i = 0; i + 2 < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) {
        double d = x.at(i + 2, j) - x.at(i, j);
        if (!wrap_.empty() && wrap_[j]) d = wrap_to_pi(d);
        out.at(i, j) = d / (2.0 * dt_);
      }
    return out;
  }
  void backward(std::span<const Tensor* const>, const Tensor& out, const Tensor& g,
                std::span<Tensor* const> gin) const override {
    if (!gin[0]) return;
    const double s = 1.0 / (2.0 * dt_);
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j) {
        gin[0]->at(i + 2, j) += s * g.at(i, j);
        gin[0]->at(i, j) -= s * g.at(i, j);
      }
  }

 private:
  double dt_;
  std::vector<bool> wrap_;
};

}  // namespace

Var identity(Var a) {
  return unary(a, "identity", [](double x) { return x; }, [](double, double) { return 1.0; });
}
Var add(Var a, Var b) { return graph_of(a, b).apply(std::make_unique<BinaryOp>(Binary::add), {a, b}); }
Var sub(Var a, Var b) { return graph_of(a, b).apply(std::make_unique<BinaryOp>(Binary::sub), {a, b}); }
Var mul(Var a, Var b) { return graph_of(a, b).apply(std::make_unique<BinaryOp>(Binary::mul), {a, b}); }
Var scale(Var a, double factor) { return graph_of(a).apply(std::make_unique<ScaleOp>(factor, 0.0), {a}); }
Var add_scalar(Var a, double offset) { return graph_of(a).apply(std::make_unique<ScaleOp>(1.0, offset), {a}); }

Var square(Var a) {
  return unary(a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}
Var exp(Var a) {
  return unary(a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}
Var tanh(Var a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}
Var sin(Var a) {
  return unary(a, "sin", [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}
Var cos(Var a) {
  return unary(a, "cos", [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); });
}
Var silu(Var a) {
  return unary(
      a, "silu", [](double x) { return x / (1.0 + std::exp(-x)); },
      [](double x, double) {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 + x * (1.0 - s));
      });
}

Var sum(Var a) { return graph_of(a).apply(std::make_unique<SumOp>(false), {a}); }
Var mean(Var a) { return graph_of(a).apply(std::make_unique<SumOp>(true), {a}); }
Var row_sum(Var a) { return graph_of(a).apply(std::make_unique<RowSumOp>(), {a}); }
Var matmul(Var a, Var b) { return graph_of(a, b).apply(std::make_unique<MatmulOp>(), {a, b}); }
Var add_row(Var x, Var bias) { return graph_of(x, bias).apply(std::make_unique<AddRowOp>(), {x, bias}); }
Var softmax_rows(Var a) { return graph_of(a).apply(std::make_unique<SoftmaxRowsOp>(), {a}); }
Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  return graph_of(a).apply(std::make_unique<SliceOp>(true, begin, end), {a});
}
Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  return graph_of(a).apply(std::make_unique<SliceOp>(false, begin, end), {a});
}
Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  for (const Var& p : parts) graph_of(parts.front(), p);
  return graph_of(parts.front()).apply(std::make_unique<ConcatColsOp>(), parts);
}
Var affine_cols(Var x, std::vector<double> gain, std::vector<double> offset) {
  return graph_of(x).apply(std::make_unique<AffineColsOp>(std::move(gain), std::move(offset)), {x});
}
Var central_diff_rows(Var x, double dt, std::vector<bool> wrap) {
  if (!(dt > 0.0)) throw InputError("central_diff_rows: dt must be positive");
  return graph_of(x).apply(std::make_unique<CentralDiffOp>(dt, std::move(wrap)), {x});
}

}  // namespace kinodiff::numerics
