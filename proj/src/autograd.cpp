#include "tnet/autograd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "tnet/error.hpp"

namespace tnet::ag {

namespace {

constexpr std::array<std::pair<Op, std::string_view>, 29> kOpNames{{
    {Op::Leaf, "leaf"},
    {Op::Add, "add"},
    {Op::AddBias, "add_bias"},
    {Op::Sub, "sub"},
    {Op::Mul, "mul"},
    {Op::MulConst, "mul_const"},
    {Op::AddConst, "add_const"},
    {Op::Scale, "scale"},
    {Op::OneMinus, "one_minus"},
    {Op::MatMul, "matmul"},
    {Op::Linear, "linear"},
    {Op::Transpose, "transpose"},
    {Op::ConcatCols, "concat_cols"},
    {Op::SliceCols, "slice_cols"},
    {Op::Row, "row"},
    {Op::StackRows, "stack_rows"},
    {Op::RepeatRow, "repeat_row"},
    {Op::MeanRows, "mean_rows"},
    {Op::GatherRows, "gather_rows"},
    {Op::Windows, "windows"},
    {Op::Sigmoid, "sigmoid"},
    {Op::Tanh, "tanh"},
    {Op::Relu, "relu"},
    {Op::Softmax, "softmax"},
    {Op::RowMax, "row_max"},
    {Op::ScaleRows, "scale_rows"},
    {Op::Sum, "sum"},
    {Op::AddN, "add_n"},
    {Op::CrossEntropy, "cross_entropy"},
}};

[[noreturn]] void dim_error(Op op, const std::string& detail) {
  throw DimensionError(std::string(op_name(op)) + ": " + detail);
}

void require_same_shape(Op op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    dim_error(op, "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void require_matrix(Op op, const Tensor& a) {
  if (a.rank() != 2) dim_error(op, "expected a matrix, got " + shape_str(a.shape()));
}

void require_same_graph(Op op, std::span<const Var> vars) {
  for (const auto& v : vars) {
    if (!v.valid()) dim_error(op, "invalid operand");
    if (&v.graph() != &vars.front().graph()) dim_error(op, "operands belong to different graphs");
  }
}

// out += a (same size).
void accumulate(Tensor* out, std::span<const double> a) {
  if (!out) return;
  auto d = out->data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += a[i];
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <class F>
Tensor map_values(const Tensor& a, F f) {
  Tensor out(a.shape());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

}  // namespace

std::string_view op_name(Op op) {
  for (const auto& [o, name] : kOpNames) {
    if (o == op) return name;
  }
  return "unknown";
}

std::optional<Op> op_from_name(std::string_view name) {
  for (const auto& [o, n] : kOpNames) {
    if (n == name) return o;
  }
  return std::nullopt;
}

const Tensor& Var::value() const { return graph().value(id_); }

Graph& Var::graph() const {
  if (!graph_) throw ContractError("use of an unbound Var");
  return *graph_;
}

// ---------------------------------------------------------------------------
// Graph

Var Graph::constant(Tensor value) {
  Node node;
  node.op = Op::Leaf;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::reference(const Tensor& value) {
  Node node;
  node.op = Op::Leaf;
  node.external = &value;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(std::string name, const Tensor& value) {
  Node node;
  node.op = Op::Leaf;
  node.external = &value;
  node.requires_grad = true;
  node.name = std::move(name);
  nodes_.push_back(std::move(node));
  parameter_ids_.push_back(nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Op op, std::span<const Var> inputs, Tensor value, BackwardFn fn) {
  Node node;
  node.op = op;
  node.value = std::move(value);
  node.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                   [this](const Var& v) { return nodes_[v.id()].requires_grad; });
  if (node.requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Graph::value(std::size_t id) const {
  const auto& node = nodes_.at(id);
  return node.external ? *node.external : node.value;
}

Tensor* Graph::grad_slot(std::size_t id) {
  auto& node = nodes_[id];
  if (!node.requires_grad) return nullptr;
  if (node.grad.empty()) node.grad = Tensor(value(id).shape());
  return &node.grad;
}

void Graph::inject_fault(Op op, double factor) {
  fault_op_ = op;
  fault_factor_ = factor;
}

void Graph::backward(Var loss) {
  if (!loss.valid() || &loss.graph() != this) {
    throw ContractError("backward: loss does not belong to this graph");
  }
  if (value(loss.id()).size() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        shape_str(value(loss.id()).shape()));
  }
  for (auto& node : nodes_) node.grad = Tensor();
  if (!nodes_[loss.id()].requires_grad) return;
  grad_slot(loss.id())->fill(1.0);

  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    auto& node = nodes_[id];
    if (!node.backward || node.grad.empty()) continue;
    if (fault_op_ && *fault_op_ == node.op) {
      Tensor scaled = node.grad;
      for (double& g : scaled.data()) g *= fault_factor_;
      node.backward(*this, scaled);
    } else {
      node.backward(*this, node.grad);
    }
  }
}

Tensor Graph::grad(Var v) const {
  const auto& node = nodes_.at(v.id());
  if (node.grad.empty()) return Tensor(value(v.id()).shape());
  return node.grad;
}

GradientMap Graph::parameter_gradients() const {
  GradientMap out;
  for (auto id : parameter_ids_) {
    const auto& node = nodes_[id];
    Tensor g = node.grad.empty() ? Tensor(value(id).shape()) : node.grad;
    auto [it, inserted] = out.emplace(node.name, g);
    if (!inserted) accumulate(&it->second, g.data());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise

Var add(Var a, Var b) {
  const Var in[] = {a, b};
  require_same_graph(Op::Add, in);
  const auto& va = a.value();
  const auto& vb = b.value();
  require_same_shape(Op::Add, va, vb);
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
  const auto ia = a.id(), ib = b.id();
  return a.graph().record(Op::Add, in, std::move(out), [ia, ib](Graph& g, const Tensor& go) {
    accumulate(g.grad_slot(ia), go.data());
    accumulate(g.grad_slot(ib), go.data());
  });
}

Var add_bias(Var a, Var b) {
  const Var in[] = {a, b};
  require_same_graph(Op::AddBias, in);
  const auto& va = a.value();
  const auto& vb = b.value();
  if (vb.size() != va.cols()) {
    dim_error(Op::AddBias, "bias " + shape_str(vb.shape()) + " vs input " + shape_str(va.shape()));
  }
  Tensor out = va;
  const auto cols = va.cols();
  for (std::size_t r = 0; r < va.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += vb[c];
  }
  const auto ia = a.id(), ib = b.id();
  return a.graph().record(Op::AddBias, in, std::move(out),
                          [ia, ib, cols](Graph& g, const Tensor& go) {
                            accumulate(g.grad_slot(ia), go.data());
                            if (auto* gb = g.grad_slot(ib)) {
                              for (std::size_t i = 0; i < go.size(); ++i) (*gb)[i % cols] += go[i];
                            }
                          });
}

Var sub(Var a, Var b) {
  const Var in[] = {a, b};
  require_same_graph(Op::Sub, in);
  const auto& va = a.value();
  const auto& vb = b.value();
  require_same_shape(Op::Sub, va, vb);
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
  const auto ia = a.id(), ib = b.id();
  return a.graph().record(Op::Sub, in, std::move(out), [ia, ib](Graph& g, const Tensor& go) {
    accumulate(g.grad_slot(ia), go.data());
    if (auto* gb = g.grad_slot(ib)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*gb)[i] -= go[i];
    }
  });
}

Var mul(Var a, Var b) {
  const Var in[] = {a, b};
  require_same_graph(Op::Mul, in);
  const auto& va = a.value();
  const auto& vb = b.value();
  require_same_shape(Op::Mul, va, vb);
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
  const auto ia = a.id(), ib = b.id();
  return a.graph().record(Op::Mul, in, std::move(out), [ia, ib](Graph& g, const Tensor& go) {
    const auto& xa = g.value(ia);
    const auto& xb = g.value(ib);
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * xb[i];
    }
    if (auto* gb = g.grad_slot(ib)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*gb)[i] += go[i] * xa[i];
    }
  });
}

Var mul_const(Var a, const Tensor& c) {
  const auto& va = a.value();
  require_same_shape(Op::MulConst, va, c);
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::MulConst, in, std::move(out), [ia, c](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * c[i];
    }
  });
}

Var add_const(Var a, const Tensor& c) {
  const auto& va = a.value();
  require_same_shape(Op::AddConst, va, c);
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i];
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::AddConst, in, std::move(out), [ia](Graph& g, const Tensor& go) {
    accumulate(g.grad_slot(ia), go.data());
  });
}

Var scale(Var a, double factor) {
  Tensor out = map_values(a.value(), [factor](double x) { return x * factor; });
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::Scale, in, std::move(out), [ia, factor](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * factor;
    }
  });
}

Var one_minus(Var a) {
  Tensor out = map_values(a.value(), [](double x) { return 1.0 - x; });
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::OneMinus, in, std::move(out), [ia](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] -= go[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Linear algebra

Var matmul(Var a, Var b) {
  const Var in[] = {a, b};
  require_same_graph(Op::MatMul, in);
  const auto& va = a.value();
  const auto& vb = b.value();
  require_matrix(Op::MatMul, va);
  require_matrix(Op::MatMul, vb);
  const auto n = va.rows(), k = va.cols(), m = vb.cols();
  if (vb.rows() != k) {
    dim_error(Op::MatMul, "inner dimensions differ: " + shape_str(va.shape()) + " * " +
                              shape_str(vb.shape()));
  }
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double x = va[i * k + p];
      for (std::size_t j = 0; j < m; ++j) out[i * m + j] += x * vb[p * m + j];
    }
  }
  const auto ia = a.id(), ib = b.id();
  return a.graph().record(Op::MatMul, in, std::move(out),
                          [ia, ib, n, k, m](Graph& g, const Tensor& go) {
                            const auto& xa = g.value(ia);
                            const auto& xb = g.value(ib);
                            if (auto* ga = g.grad_slot(ia)) {
                              for (std::size_t i = 0; i < n; ++i)
                                for (std::size_t p = 0; p < k; ++p) {
                                  double acc = 0.0;
                                  for (std::size_t j = 0; j < m; ++j)
                                    acc += go[i * m + j] * xb[p * m + j];
                                  (*ga)[i * k + p] += acc;
                                }
                            }
                            if (auto* gb = g.grad_slot(ib)) {
                              for (std::size_t i = 0; i < n; ++i)
                                for (std::size_t p = 0; p < k; ++p) {
                                  const double x = xa[i * k + p];
                                  for (std::size_t j = 0; j < m; ++j)
                                    (*gb)[p * m + j] += x * go[i * m + j];
                                }
                            }
                          });
}

Var linear(Var x, Var weight, Var bias) {
  std::vector<Var> in{x, weight};
  if (bias.valid()) in.push_back(bias);
  require_same_graph(Op::Linear, in);
  const auto& vx = x.value();
  const auto& vw = weight.value();
  require_matrix(Op::Linear, vw);
  if (vx.rank() > 2) dim_error(Op::Linear, "input must be rank 1 or 2, got " + shape_str(vx.shape()));
  const auto n = vx.rows(), in_dim = vx.cols(), out_dim = vw.rows();
  if (vw.cols() != in_dim) {
    dim_error(Op::Linear, "weight " + shape_str(vw.shape()) + " does not accept input " +
                              shape_str(vx.shape()));
  }
  if (bias.valid() && bias.value().size() != out_dim) {
    dim_error(Op::Linear, "bias " + shape_str(bias.value().shape()) + " vs weight " +
                              shape_str(vw.shape()));
  }
  Tensor out(vx.rank() == 1 ? Shape{out_dim} : Shape{n, out_dim});
  for (std::size_t i = 0; i < n; ++i) {
    const double* xr = vx.data().data() + i * in_dim;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wr = vw.data().data() + o * in_dim;
      double acc = bias.valid() ? bias.value()[o] : 0.0;
      for (std::size_t p = 0; p < in_dim; ++p) acc += wr[p] * xr[p];
      out[i * out_dim + o] = acc;
    }
  }
  const auto ix = x.id(), iw = weight.id();
  const bool has_bias = bias.valid();
  const auto ib = has_bias ? bias.id() : 0;
  return x.graph().record(
      Op::Linear, in, std::move(out),
      [ix, iw, ib, has_bias, n, in_dim, out_dim](Graph& g, const Tensor& go) {
        const auto& xv = g.value(ix);
        const auto& wv = g.value(iw);
        if (auto* gx = g.grad_slot(ix)) {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < out_dim; ++o) {
              const double d = go[i * out_dim + o];
              if (d == 0.0) continue;
              for (std::size_t p = 0; p < in_dim; ++p) (*gx)[i * in_dim + p] += d * wv[o * in_dim + p];
            }
        }
        if (auto* gw = g.grad_slot(iw)) {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < out_dim; ++o) {
              const double d = go[i * out_dim + o];
              if (d == 0.0) continue;
              for (std::size_t p = 0; p < in_dim; ++p) (*gw)[o * in_dim + p] += d * xv[i * in_dim + p];
            }
        }
        if (has_bias) {
          if (auto* gb = g.grad_slot(ib)) {
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t o = 0; o < out_dim; ++o) (*gb)[o] += go[i * out_dim + o];
          }
        }
      });
}

Var transpose(Var a) {
  const auto& va = a.value();
  require_matrix(Op::Transpose, va);
  const auto r = va.rows(), c = va.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = va[i * c + j];
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::Transpose, in, std::move(out), [ia, r, c](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += go[j * r + i];
    }
  });
}

// ---------------------------------------------------------------------------
// Structural

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) dim_error(Op::ConcatCols, "no operands");
  require_same_graph(Op::ConcatCols, parts);
  const auto rows = parts.front().value().rows();
  bool any_matrix = false;
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    const auto& v = p.value();
    if (v.rank() > 2 || v.rows() != rows) {
      dim_error(Op::ConcatCols, "row count mismatch " + shape_str(parts.front().shape()) + " vs " +
                                    shape_str(v.shape()));
    }
    any_matrix = any_matrix || v.rank() == 2;
    widths.push_back(v.cols());
    total += v.cols();
  }
  Tensor out(any_matrix ? Shape{rows, total} : Shape{total});
  std::size_t offset = 0;
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < widths[k]; ++c) out[r * total + offset + c] = v[r * widths[k] + c];
    offset += widths[k];
    ids.push_back(parts[k].id());
  }
  return parts.front().graph().record(
      Op::ConcatCols, parts, std::move(out),
      [ids, widths, rows, total](Graph& g, const Tensor& go) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (auto* gk = g.grad_slot(ids[k])) {
            for (std::size_t r = 0; r < rows; ++r)
              for (std::size_t c = 0; c < widths[k]; ++c) (*gk)[r * widths[k] + c] += go[r * total + off + c];
          }
          off += widths[k];
        }
      });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const auto& va = a.value();
  const auto rows = va.rows(), cols = va.cols();
  if (count == 0 || begin + count > cols) {
    dim_error(Op::SliceCols, "columns [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                 ") out of range for " + shape_str(va.shape()));
  }
  Tensor out(va.rank() == 1 ? Shape{count} : Shape{rows, count});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out[r * count + c] = va[r * cols + begin + c];
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::SliceCols, in, std::move(out),
                          [ia, rows, cols, begin, count](Graph& g, const Tensor& go) {
                            if (auto* ga = g.grad_slot(ia)) {
                              for (std::size_t r = 0; r < rows; ++r)
                                for (std::size_t c = 0; c < count; ++c)
                                  (*ga)[r * cols + begin + c] += go[r * count + c];
                            }
                          });
}

Var row(Var a, std::size_t r) {
  const auto& va = a.value();
  if (r >= va.rows()) {
    dim_error(Op::Row, "row " + std::to_string(r) + " out of range for " + shape_str(va.shape()));
  }
  const auto cols = va.cols();
  auto src = va.row(r);
  Tensor out({cols}, std::vector<double>(src.begin(), src.end()));
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::Row, in, std::move(out), [ia, r, cols](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t c = 0; c < cols; ++c) (*ga)[r * cols + c] += go[c];
    }
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) dim_error(Op::StackRows, "no rows");
  require_same_graph(Op::StackRows, rows);
  const auto width = rows.front().value().size();
  Tensor out({rows.size(), width});
  std::vector<std::size_t> ids;
  ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& v = rows[r].value();
    if (v.size() != width || v.rows() != 1) {
      dim_error(Op::StackRows, "row " + std::to_string(r) + " has shape " + shape_str(v.shape()) +
                                   ", expected width " + std::to_string(width));
    }
    std::copy(v.data().begin(), v.data().end(), out.data().begin() + r * width);
    ids.push_back(rows[r].id());
  }
  return rows.front().graph().record(Op::StackRows, rows, std::move(out),
                                     [ids, width](Graph& g, const Tensor& go) {
                                       for (std::size_t r = 0; r < ids.size(); ++r) {
                                         accumulate(g.grad_slot(ids[r]), go.data().subspan(r * width, width));
                                       }
                                     });
}

Var repeat_row(Var v, std::size_t n) {
  const auto& vv = v.value();
  if (vv.rows() != 1 || n == 0) dim_error(Op::RepeatRow, "expected a single row, got " + shape_str(vv.shape()));
  const auto d = vv.size();
  Tensor out({n, d});
  for (std::size_t r = 0; r < n; ++r) std::copy(vv.data().begin(), vv.data().end(), out.data().begin() + r * d);
  const auto iv = v.id();
  const Var in[] = {v};
  return v.graph().record(Op::RepeatRow, in, std::move(out), [iv, n, d](Graph& g, const Tensor& go) {
    if (auto* gv = g.grad_slot(iv)) {
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) (*gv)[c] += go[r * d + c];
    }
  });
}

Var mean_rows(Var a) {
  const auto& va = a.value();
  const auto m = va.rows(), d = va.cols();
  Tensor out({d});
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < d; ++c) out[c] += va[r * d + c];
  for (std::size_t c = 0; c < d; ++c) out[c] /= static_cast<double>(m);
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::MeanRows, in, std::move(out), [ia, m, d](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < d; ++c) (*ga)[r * d + c] += go[c] / static_cast<double>(m);
    }
  });
}

Var gather_rows(Var table, std::span<const std::size_t> ids) {
  const auto& vt = table.value();
  require_matrix(Op::GatherRows, vt);
  if (ids.empty()) dim_error(Op::GatherRows, "no row ids");
  const auto d = vt.cols();
  Tensor out({ids.size(), d});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= vt.rows()) {
      dim_error(Op::GatherRows, "row id " + std::to_string(ids[r]) + " out of range for " +
                                    shape_str(vt.shape()));
    }
    auto src = vt.row(ids[r]);
    std::copy(src.begin(), src.end(), out.data().begin() + r * d);
  }
  const auto it = table.id();
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  const Var in[] = {table};
  return table.graph().record(Op::GatherRows, in, std::move(out),
                              [it, rows = std::move(rows), d](Graph& g, const Tensor& go) {
                                if (auto* gt = g.grad_slot(it)) {
                                  for (std::size_t r = 0; r < rows.size(); ++r)
                                    for (std::size_t c = 0; c < d; ++c) (*gt)[rows[r] * d + c] += go[r * d + c];
                                }
                              });
}

Var windows(Var a, std::size_t width) {
  const auto& va = a.value();
  const auto p = va.rows(), d = va.cols();
  if (width == 0 || p < width) {
    dim_error(Op::Windows, "sequence of " + std::to_string(p) + " rows is shorter than window " +
                               std::to_string(width));
  }
  const auto count = p - width + 1;
  const auto span_len = width * d;
  Tensor out({count, span_len});
  for (std::size_t w = 0; w < count; ++w) {
    std::copy(va.data().begin() + w * d, va.data().begin() + w * d + span_len,
              out.data().begin() + w * span_len);
  }
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::Windows, in, std::move(out),
                          [ia, count, span_len, d](Graph& g, const Tensor& go) {
                            if (auto* ga = g.grad_slot(ia)) {
                              for (std::size_t w = 0; w < count; ++w)
                                for (std::size_t j = 0; j < span_len; ++j) (*ga)[w * d + j] += go[w * span_len + j];
                            }
                          });
}

// ---------------------------------------------------------------------------
// Nonlinearities

Var sigmoid(Var a) {
  Tensor out = map_values(a.value(), stable_sigmoid);
  const auto ia = a.id();
  const Var in[] = {a};
  auto y = out;
  return a.graph().record(Op::Sigmoid, in, std::move(out), [ia, y = std::move(y)](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * y[i] * (1.0 - y[i]);
    }
  });
}

Var tanh(Var a) {
  Tensor out = map_values(a.value(), [](double x) { return std::tanh(x); });
  const auto ia = a.id();
  const Var in[] = {a};
  auto y = out;
  return a.graph().record(Op::Tanh, in, std::move(out), [ia, y = std::move(y)](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * (1.0 - y[i] * y[i]);
    }
  });
}

Var relu(Var a) {
  Tensor out = map_values(a.value(), [](double x) { return x > 0.0 ? x : 0.0; });
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::Relu, in, std::move(out), [ia](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      const auto& x = g.value(ia);
      for (std::size_t i = 0; i < go.size(); ++i) {
        if (x[i] > 0.0) (*ga)[i] += go[i];
      }
    }
  });
}

Var softmax(Var a) {
  const auto& va = a.value();
  const auto rows = va.rows(), cols = va.cols();
  Tensor out(va.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    auto src = va.row(r);
    auto dst = out.row(r);
    const double mx = *std::max_element(src.begin(), src.end());
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      dst[c] = std::exp(src[c] - mx);
      z += dst[c];
    }
    for (std::size_t c = 0; c < cols; ++c) dst[c] /= z;
  }
  const auto ia = a.id();
  const Var in[] = {a};
  auto y = out;
  return a.graph().record(Op::Softmax, in, std::move(out),
                          [ia, rows, cols, y = std::move(y)](Graph& g, const Tensor& go) {
                            if (auto* ga = g.grad_slot(ia)) {
                              for (std::size_t r = 0; r < rows; ++r) {
                                double dot = 0.0;
                                for (std::size_t c = 0; c < cols; ++c) dot += go[r * cols + c] * y[r * cols + c];
                                for (std::size_t c = 0; c < cols; ++c)
                                  (*ga)[r * cols + c] += y[r * cols + c] * (go[r * cols + c] - dot);
                              }
                            }
                          });
}

RowMaxResult row_max(Var a) {
  const auto& va = a.value();
  const auto rows = va.rows(), cols = va.cols();
  Tensor out({rows});
  std::vector<std::size_t> argmax(rows, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    auto src = va.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c) {
      if (src[c] > src[best]) best = c;
    }
    argmax[r] = best;
    out[r] = src[best];
  }
  const auto ia = a.id();
  const Var in[] = {a};
  auto var = a.graph().record(Op::RowMax, in, std::move(out),
                              [ia, cols, argmax](Graph& g, const Tensor& go) {
                                if (auto* ga = g.grad_slot(ia)) {
                                  for (std::size_t r = 0; r < argmax.size(); ++r) (*ga)[r * cols + argmax[r]] += go[r];
                                }
                              });
  return {var, std::move(argmax)};
}

Var scale_rows(Var a, std::span<const double> weights) {
  const auto& va = a.value();
  const auto rows = va.rows(), cols = va.cols();
  if (weights.size() != rows) {
    dim_error(Op::ScaleRows, std::to_string(weights.size()) + " weights for " + shape_str(va.shape()));
  }
  Tensor out = va;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= weights[r];
  const auto ia = a.id();
  std::vector<double> w(weights.begin(), weights.end());
  const Var in[] = {a};
  return a.graph().record(Op::ScaleRows, in, std::move(out),
                          [ia, cols, w = std::move(w)](Graph& g, const Tensor& go) {
                            if (auto* ga = g.grad_slot(ia)) {
                              for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * w[i / cols];
                            }
                          });
}

Var sum(Var a) {
  double acc = 0.0;
  for (double v : a.value().data()) acc += v;
  const auto ia = a.id();
  const Var in[] = {a};
  return a.graph().record(Op::Sum, in, Tensor::scalar(acc), [ia](Graph& g, const Tensor& go) {
    if (auto* ga = g.grad_slot(ia)) {
      for (double& x : ga->data()) x += go[0];
    }
  });
}

Var add_n(std::span<const Var> terms) {
  if (terms.empty()) dim_error(Op::AddN, "no terms");
  require_same_graph(Op::AddN, terms);
  Tensor out = terms.front().value();
  std::vector<std::size_t> ids{terms.front().id()};
  for (std::size_t k = 1; k < terms.size(); ++k) {
    const auto& v = terms[k].value();
    require_same_shape(Op::AddN, out, v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    ids.push_back(terms[k].id());
  }
  return terms.front().graph().record(Op::AddN, terms, std::move(out), [ids](Graph& g, const Tensor& go) {
    for (auto id : ids) accumulate(g.grad_slot(id), go.data());
  });
}

Var cross_entropy(Var logits, std::size_t gold) {
  const auto& v = logits.value();
  if (v.rows() != 1 || gold >= v.size()) {
    dim_error(Op::CrossEntropy, "gold index " + std::to_string(gold) + " for logits " + shape_str(v.shape()));
  }
  const double mx = *std::max_element(v.data().begin(), v.data().end());
  double z = 0.0;
  for (double x : v.data()) z += std::exp(x - mx);
  const double lse = mx + std::log(z);
  const double loss = lse - v[gold];
  std::vector<double> probs(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) probs[i] = std::exp(v[i] - lse);
  const auto il = logits.id();
  const Var in[] = {logits};
  return logits.graph().record(Op::CrossEntropy, in, Tensor::scalar(loss),
                               [il, gold, probs = std::move(probs)](Graph& g, const Tensor& go) {
                                 if (auto* gl = g.grad_slot(il)) {
                                   for (std::size_t i = 0; i < probs.size(); ++i)
                                     (*gl)[i] += go[0] * (probs[i] - (i == gold ? 1.0 : 0.0));
                                 }
                               });
}

}  // namespace tnet::ag
