#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tnet/tensor.hpp"

// Tape-based reverse-mode differentiation over dense double tensors.
//
// A Graph records every primitive in construction order, which is also a
// valid topological order; backward() walks the tape once in reverse.
// Parameters enter the tape by reference and are addressed by name so that
// gradients come back as a name-keyed map.
namespace tnet::ag {

enum class Op : std::uint8_t {
  Leaf,
  Add,
  AddBias,
  Sub,
  Mul,
  MulConst,
  AddConst,
  Scale,
  OneMinus,
  MatMul,
  Linear,
  Transpose,
  ConcatCols,
  SliceCols,
  Row,
  StackRows,
  RepeatRow,
  MeanRows,
  GatherRows,
  Windows,
  Sigmoid,
  Tanh,
  Relu,
  Softmax,
  RowMax,
  ScaleRows,
  Sum,
  AddN,
  CrossEntropy,
};

std::string_view op_name(Op op);
std::optional<Op> op_from_name(std::string_view name);

class Graph;

/// Handle to a node on a Graph's tape. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return graph_ != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Graph& graph() const;
  std::size_t id() const noexcept { return id_; }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

using GradientMap = std::map<std::string, Tensor>;

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Constant leaf that refers to `value` without copying; `value` must outlive the graph.
  Var reference(const Tensor& value);
  /// Leaf that requires a gradient. `value` is referenced, not copied, and
  /// must outlive the graph.
  Var parameter(std::string name, const Tensor& value);

  /// Reverse sweep from a scalar node. Every gradient slot is reset first, so
  /// calling backward twice yields the same result.
  void backward(Var loss);

  /// Gradient accumulated at `v` by the last backward(); zeros if none reached it.
  Tensor grad(Var v) const;
  GradientMap parameter_gradients() const;

  /// Test hook: multiply the upstream gradient entering every `op` node by
  /// `factor` during backward. Used as a negative control for gradient checks.
  void inject_fault(Op op, double factor);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  Op op(Var v) const { return nodes_.at(v.id()).op; }

  // Primitive implementation surface.
  Var record(Op op, std::span<const Var> inputs, Tensor value, BackwardFn fn);
  Var record(Op op, std::initializer_list<Var> inputs, Tensor value, BackwardFn fn) {
    return record(op, std::span<const Var>(inputs.begin(), inputs.size()), std::move(value),
                  std::move(fn));
  }
  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Zero-initialised on first touch; returns nullptr when the node needs no gradient.
  Tensor* grad_slot(std::size_t id);

 private:
  struct Node {
    Op op = Op::Leaf;
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    std::string name;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::vector<std::size_t> parameter_ids_;
  std::optional<Op> fault_op_;
  double fault_factor_ = 1.0;
};

// ---------------------------------------------------------------------------
// Primitives. Rank-1 operands are treated as a single row where a matrix is
// expected. Shape violations throw DimensionError naming the primitive.

Var add(Var a, Var b);
/// a[n x d] + b[d] broadcast over rows.
Var add_bias(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// Elementwise product with a constant (no gradient to the constant).
Var mul_const(Var a, const Tensor& c);
Var add_const(Var a, const Tensor& c);
Var scale(Var a, double factor);
/// 1 - a, elementwise.
Var one_minus(Var a);

/// A[n x k] * B[k x m].
Var matmul(Var a, Var b);
/// x * W^T + b for W[out x in]; x is [in] or [n x in]. `bias` may be invalid.
Var linear(Var x, Var weight, Var bias = {});
Var transpose(Var a);

Var concat_cols(std::span<const Var> parts);
inline Var concat_cols(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat_cols(parts);
}
Var slice_cols(Var a, std::size_t begin, std::size_t count);
/// Row `r` of a matrix as a rank-1 tensor.
Var row(Var a, std::size_t r);
Var stack_rows(std::span<const Var> rows);
/// [d] -> [n x d].
Var repeat_row(Var v, std::size_t n);
/// Unweighted mean of the rows of a[m x d] -> [d].
Var mean_rows(Var a);
/// Rows of table[V x d] selected by ids -> [ids.size() x d].
Var gather_rows(Var table, std::span<const std::size_t> ids);
/// Sliding windows of `width` consecutive rows, each flattened:
/// a[P x d] -> [(P - width + 1) x (width * d)].
Var windows(Var a, std::size_t width);

Var sigmoid(Var a);
Var tanh(Var a);
/// ReLU; the derivative at exactly 0 is taken as 0.
Var relu(Var a);
/// Softmax along the last dimension (per row), computed with max subtraction.
Var softmax(Var a);

struct RowMaxResult {
  Var max;
  /// Column of the maximum in each row; ties resolve to the lowest column.
  std::vector<std::size_t> argmax;
};
/// Per-row maximum of a[r x c] -> [r]. Gradient flows to the argmax only.
RowMaxResult row_max(Var a);

/// Row i of a scaled by the constant weights[i].
Var scale_rows(Var a, std::span<const double> weights);

/// Sum of all elements -> scalar [1].
Var sum(Var a);
Var add_n(std::span<const Var> terms);
/// -log softmax(logits)[gold], via log-sum-exp -> scalar [1].
Var cross_entropy(Var logits, std::size_t gold);

}  // namespace tnet::ag
