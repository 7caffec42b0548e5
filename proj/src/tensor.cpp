// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

namespace haca::inline HACA_PRECISION_NS {

using detail::Node;

namespace {

thread_local ComputationRecord* g_active = nullptr;
thread_local std::uint64_t g_next_id = 1;
std::atomic<bool> g_finite_checks{false};

using NodePtr = std::shared_ptr<Node>;

[[noreturn]] void shape_fail(const char* op, const std::string& expected,
                             const std::string& actual) {
  std::ostringstream os;
  os << op << ": expected " << expected << ", got " << actual;
  throw ShapeError(os.str());
}

NodePtr new_node(Shape shape, std::vector<real> value) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->id = g_next_id++;
  return node;
}

// Finalizes a primitive's output: tracks it on the active record when any
// input is differentiable, otherwise drops the backward closure.
Tensor emit(const char* op, Shape shape, std::vector<real> value,
            std::vector<NodePtr> inputs, std::function<void(Node&)> backward) {
  if (g_finite_checks.load(std::memory_order_relaxed)) {
    for (real v : value) {
      if (!std::isfinite(v)) {
        throw std::domain_error(std::string(op) + ": non-finite output");
      }
    }
  }
  auto node = new_node(std::move(shape), std::move(value));
  ComputationRecord* rec = g_active;
  bool track = false;
  if (rec != nullptr) {
    for (const auto& in : inputs) {
      if (in->requires_grad) {
        track = true;
        break;
      }
    }
  }
  if (track) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
    rec->append(node);
  }
  return Tensor(std::move(node));
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ShapeError(std::string(op) + ": undefined tensor");
}

void require_matrix(const Tensor& t, const char* op) {
  require_defined(t, op);
  if (t.rank() != 2) shape_fail(op, "rank-2 tensor", shape_string(t.shape()));
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, real value) {
  std::size_t n = shape_size(shape);
  return constant(std::move(shape), std::vector<real>(n, value));
}

Tensor Tensor::constant(Shape shape, std::vector<real> values) {
  if (shape.empty()) throw ShapeError("tensor: empty shape");
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor: zero-sized dimension in " + shape_string(shape));
  }
  if (shape_size(shape) != values.size()) {
    shape_fail("tensor", std::to_string(shape_size(shape)) + " values for " + shape_string(shape),
               std::to_string(values.size()));
  }
  return Tensor(new_node(std::move(shape), std::move(values)));
}

Tensor Tensor::parameter(Shape shape, std::vector<real> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::row(std::vector<real> values) {
  std::size_t n = values.size();
  return constant({1, n}, std::move(values));
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->value.size(); }
std::size_t Tensor::cols() const { return node_->shape.back(); }
std::size_t Tensor::rows() const { return size() / cols(); }

std::span<const real> Tensor::values() const { return node_->value; }
std::span<real> Tensor::mutable_values() { return node_->value; }

real Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + shape_string(shape()) + " is not scalar");
  return node_->value[0];
}

real Tensor::at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::vector<real> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<real>(size(), 0.0);
  return node_->grad;
}

std::span<real> Tensor::mutable_grad() { return node_->grad_buffer(); }

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

std::uint64_t Tensor::id() const { return node_->id; }

// ---------------------------------------------------------------------------
// ComputationRecord

void ComputationRecord::append(std::shared_ptr<Node> node) {
  if (consumed_) throw GraphError("record: append after backward; call reset() first");
  nodes_.push_back(std::move(node));
}

bool ComputationRecord::contains(const Tensor& t) const {
  if (!t.defined()) return false;
  return std::find(nodes_.rbegin(), nodes_.rend(), t.node()) != nodes_.rend();
}

void ComputationRecord::backward(const Tensor& loss) {
  if (consumed_) throw GraphError("backward: record already consumed; call reset() first");
  if (!loss.defined() || loss.size() != 1) {
    throw GraphError("backward: loss must be a scalar, got " +
                     (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
  }
  if (!contains(loss)) throw GraphError("backward: loss was not produced under this record");
  consumed_ = true;
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& node = **it;
    if (node.grad.empty() || !node.backward) continue;
    node.backward(node);
  }
  // Intermediate buffers and closures are no longer needed.
  for (auto& node : nodes_) {
    node->backward = nullptr;
    node->inputs.clear();
  }
}

void ComputationRecord::reset() {
  nodes_.clear();
  consumed_ = false;
}

RecordScope::RecordScope(ComputationRecord& record) : previous_(g_active) { g_active = &record; }
RecordScope::~RecordScope() { g_active = previous_; }

NoRecordScope::NoRecordScope() : previous_(g_active) { g_active = nullptr; }
NoRecordScope::~NoRecordScope() { g_active = previous_; }

ComputationRecord* active_record() { return g_active; }

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks_enabled() { return g_finite_checks.load(); }

void backward(const Tensor& loss) {
  if (g_active == nullptr) throw GraphError("backward: no active computation record");
  g_active->backward(loss);
}

// ---------------------------------------------------------------------------
// Primitives

namespace ops {

namespace {

// Gradient buffer of an input, or null when it is not differentiable.
inline std::vector<real>* grad_of(const NodePtr& n) {
  return n->requires_grad ? &n->grad_buffer() : nullptr;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    shape_fail("matmul", "rhs with " + std::to_string(k) + " rows for lhs " + shape_string(a.shape()),
               shape_string(b.shape()));
  }
  std::vector<real> out(m * n, 0.0);
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const real aip = av[i * k + p];
      if (aip == 0.0) continue;
      const real* brow = &bv[p * n];
      real* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return emit("matmul", {m, n}, std::move(out), {a.node(), b.node()}, [m, k, n](Node& self) {
    const auto& g = self.grad;
    const auto& A = self.inputs[0];
    const auto& B = self.inputs[1];
    if (auto* ga = grad_of(A)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          real s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * B->value[p * n + j];
          (*ga)[i * k + p] += s;
        }
    }
    if (auto* gb = grad_of(B)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const real aip = A->value[i * k + p];
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += aip * g[i * n + j];
        }
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& w) {
  require_defined(x, "linear");
  require_matrix(w, "linear");
  const std::size_t r = x.rows(), in = x.cols(), out_dim = w.rows();
  if (w.cols() != in) {
    shape_fail("linear", "weight with " + std::to_string(in) + " columns for input " + shape_string(x.shape()),
               shape_string(w.shape()));
  }
  std::vector<real> out(r * out_dim);
  auto xv = x.values();
  auto wv = w.values();
  for (std::size_t i = 0; i < r; ++i) {
    const real* xr = &xv[i * in];
    for (std::size_t o = 0; o < out_dim; ++o) {
      const real* wr = &wv[o * in];
      real s = 0.0;
      for (std::size_t p = 0; p < in; ++p) s += xr[p] * wr[p];
      out[i * out_dim + o] = s;
    }
  }
  return emit("linear", {r, out_dim}, std::move(out), {x.node(), w.node()}, [r, in, out_dim](Node& self) {
    const auto& g = self.grad;
    const auto& X = self.inputs[0];
    const auto& W = self.inputs[1];
    if (auto* gx = grad_of(X)) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t o = 0; o < out_dim; ++o) {
          const real go = g[i * out_dim + o];
          if (go == 0.0) continue;
          const real* wr = &W->value[o * in];
          real* gxr = &(*gx)[i * in];
          for (std::size_t p = 0; p < in; ++p) gxr[p] += go * wr[p];
        }
    }
    if (auto* gw = grad_of(W)) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t o = 0; o < out_dim; ++o) {
          const real go = g[i * out_dim + o];
          if (go == 0.0) continue;
          const real* xr = &X->value[i * in];
          real* gwr = &(*gw)[o * in];
          for (std::size_t p = 0; p < in; ++p) gwr[p] += go * xr[p];
        }
    }
  });
}

namespace {

// Shared implementation of add/sub: sign applies to b.
Tensor add_signed(const char* op, const Tensor& a, const Tensor& b, real sign) {
  require_defined(a, op);
  require_defined(b, op);
  const bool broadcast = a.shape() != b.shape();
  if (broadcast && !(b.rows() == 1 && b.cols() == a.cols())) {
    shape_fail(op, shape_string(a.shape()) + " or a single row of width " + std::to_string(a.cols()),
               shape_string(b.shape()));
  }
  const std::size_t n = a.size(), c = a.cols();
  std::vector<real> out(n);
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = av[i] + sign * bv[broadcast ? i % c : i];
  return emit(op, a.shape(), std::move(out), {a.node(), b.node()}, [broadcast, n, c, sign](Node& self) {
    const auto& g = self.grad;
    if (auto* ga = grad_of(self.inputs[0]))
      for (std::size_t i = 0; i < n; ++i) (*ga)[i] += g[i];
    if (auto* gb = grad_of(self.inputs[1]))
      for (std::size_t i = 0; i < n; ++i) (*gb)[broadcast ? i % c : i] += sign * g[i];
  });
}

template <class Fwd, class Deriv>
Tensor unary(const char* op, const Tensor& a, Fwd fwd, Deriv deriv_from_output) {
  require_defined(a, op);
  std::vector<real> out(a.size());
  auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  return emit(op, a.shape(), std::move(out), {a.node()}, [deriv_from_output](Node& self) {
    if (auto* ga = grad_of(self.inputs[0])) {
      for (std::size_t i = 0; i < self.value.size(); ++i)
        (*ga)[i] += self.grad[i] * deriv_from_output(self.value[i]);
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_signed("add", a, b, 1.0); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_signed("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  if (a.shape() != b.shape()) shape_fail("mul", shape_string(a.shape()), shape_string(b.shape()));
  const std::size_t n = a.size();
  std::vector<real> out(n);
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = av[i] * bv[i];
  return emit("mul", a.shape(), std::move(out), {a.node(), b.node()}, [n](Node& self) {
    const auto& A = self.inputs[0];
    const auto& B = self.inputs[1];
    if (auto* ga = grad_of(A))
      for (std::size_t i = 0; i < n; ++i) (*ga)[i] += self.grad[i] * B->value[i];
    if (auto* gb = grad_of(B))
      for (std::size_t i = 0; i < n; ++i) (*gb)[i] += self.grad[i] * A->value[i];
  });
}

Tensor scale(const Tensor& a, real factor) {
  require_defined(a, "scale");
  std::vector<real> out(a.values().begin(), a.values().end());
  for (real& v : out) v *= factor;
  return emit("scale", a.shape(), std::move(out), {a.node()}, [factor](Node& self) {
    if (auto* ga = grad_of(self.inputs[0]))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += factor * self.grad[i];
  });
}

Tensor tanh(const Tensor& a) {
  return unary(
      "tanh", a, [](real x) { return std::tanh(x); }, [](real y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      "sigmoid", a,
      [](real x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const real e = std::exp(x);
        return e / (1.0 + e);
      },
      [](real y) { return y * (1.0 - y); });
}

Tensor softmax(const Tensor& a) {
  require_defined(a, "softmax");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<real> out(a.size());
  auto av = a.values();
  for (std::size_t i = 0; i < r; ++i) {
    const real* x = &av[i * c];
    real* y = &out[i * c];
    const real mx = *std::max_element(x, x + c);
    real z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < c; ++j) y[j] /= z;
  }
  return emit("softmax", a.shape(), std::move(out), {a.node()}, [r, c](Node& self) {
    if (auto* ga = grad_of(self.inputs[0])) {
      for (std::size_t i = 0; i < r; ++i) {
        const real* y = &self.value[i * c];
        const real* g = &self.grad[i * c];
        real dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += g[j] * y[j];
        for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += y[j] * (g[j] - dot);
      }
    }
  });
}

Tensor log_softmax(const Tensor& a) {
  require_defined(a, "log_softmax");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<real> out(a.size());
  auto av = a.values();
  for (std::size_t i = 0; i < r; ++i) {
    const real* x = &av[i * c];
    const real mx = *std::max_element(x, x + c);
    real z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(x[j] - mx);
    const real lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[j] - lse;
  }
  return emit("log_softmax", a.shape(), std::move(out), {a.node()}, [r, c](Node& self) {
    if (auto* ga = grad_of(self.inputs[0])) {
      for (std::size_t i = 0; i < r; ++i) {
        const real* y = &self.value[i * c];
        const real* g = &self.grad[i * c];
        real total = 0.0;
        for (std::size_t j = 0; j < c; ++j) total += g[j];
        for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += g[j] - std::exp(y[j]) * total;
      }
    }
  });
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  for (const auto& p : parts) require_defined(p, "concat");
  const std::size_t r = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  std::vector<NodePtr> inputs;
  for (const auto& p : parts) {
    if (p.rows() != r || p.rank() != parts[0].rank()) {
      shape_fail("concat", "leading shape matching " + shape_string(parts[0].shape()), shape_string(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
    inputs.push_back(p.node());
  }
  std::vector<real> out(r * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto pv = parts[k].values();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(&pv[i * widths[k]], widths[k], &out[i * total + offset]);
    offset += widths[k];
  }
  Shape shape = parts[0].shape();
  shape.back() = total;
  return emit("concat", std::move(shape), std::move(out), std::move(inputs),
              [r, total, widths = std::move(widths)](Node& self) {
                std::size_t off = 0;
                for (std::size_t k = 0; k < widths.size(); ++k) {
                  if (auto* gk = grad_of(self.inputs[k])) {
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < widths[k]; ++j)
                        (*gk)[i * widths[k] + j] += self.grad[i * total + off + j];
                  }
                  off += widths[k];
                }
              });
}

Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  for (const auto& p : rows) require_defined(p, "stack_rows");
  const std::size_t c = rows[0].cols();
  std::vector<real> out;
  std::vector<std::size_t> sizes;
  std::vector<NodePtr> inputs;
  for (const auto& p : rows) {
    if (p.cols() != c) shape_fail("stack_rows", "width " + std::to_string(c), shape_string(p.shape()));
    out.insert(out.end(), p.values().begin(), p.values().end());
    sizes.push_back(p.size());
    inputs.push_back(p.node());
  }
  const std::size_t total_rows = out.size() / c;
  return emit("stack_rows", {total_rows, c}, std::move(out), std::move(inputs),
              [sizes = std::move(sizes)](Node& self) {
                std::size_t off = 0;
                for (std::size_t k = 0; k < sizes.size(); ++k) {
                  if (auto* gk = grad_of(self.inputs[k]))
                    for (std::size_t i = 0; i < sizes[k]; ++i) (*gk)[i] += self.grad[off + i];
                  off += sizes[k];
                }
              });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice_rows");
  if (begin >= end || end > a.rows()) {
    shape_fail("slice_rows", "0 <= begin < end <= " + std::to_string(a.rows()),
               "[" + std::to_string(begin) + ", " + std::to_string(end) + ")");
  }
  const std::size_t c = a.cols();
  auto av = a.values();
  std::vector<real> out(av.begin() + begin * c, av.begin() + end * c);
  return emit("slice_rows", {end - begin, c}, std::move(out), {a.node()}, [begin, c](Node& self) {
    if (auto* ga = grad_of(self.inputs[0]))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[begin * c + i] += self.grad[i];
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_defined(a, "slice_cols");
  const std::size_t c = a.cols(), r = a.rows(), w = end - begin;
  if (begin >= end || end > c) {
    shape_fail("slice_cols", "0 <= begin < end <= " + std::to_string(c),
               "[" + std::to_string(begin) + ", " + std::to_string(end) + ")");
  }
  std::vector<real> out(r * w);
  auto av = a.values();
  for (std::size_t i = 0; i < r; ++i) std::copy_n(&av[i * c + begin], w, &out[i * w]);
  Shape shape = a.shape();
  shape.back() = w;
  return emit("slice_cols", std::move(shape), std::move(out), {a.node()}, [r, c, w, begin](Node& self) {
    if (auto* ga = grad_of(self.inputs[0]))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < w; ++j) (*ga)[i * c + begin + j] += self.grad[i * w + j];
  });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  require_matrix(table, "gather_rows");
  if (ids.empty()) throw ShapeError("gather_rows: no ids");
  const std::size_t v = table.rows(), d = table.cols();
  std::vector<real> out(ids.size() * d);
  auto tv = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= v) {
      throw std::out_of_range("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                              std::to_string(v) + " rows");
    }
    std::copy_n(&tv[ids[i] * d], d, &out[i * d]);
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return emit("gather_rows", {ids.size(), d}, std::move(out), {table.node()},
              [d, saved = std::move(saved)](Node& self) {
                if (auto* gt = grad_of(self.inputs[0]))
                  for (std::size_t i = 0; i < saved.size(); ++i)
                    for (std::size_t j = 0; j < d; ++j) (*gt)[saved[i] * d + j] += self.grad[i * d + j];
              });
}

Tensor weighted_sum(const Tensor& weights, std::span<const Tensor> parts) {
  if (weights.size() != parts.size()) {
    shape_fail("weighted_sum", std::to_string(parts.size()) + " weights", shape_string(weights.shape()));
  }
  return matmul(weights, stack_rows(parts));
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  real s = 0.0;
  for (real v : a.values()) s += v;
  return emit("sum", {1, 1}, {s}, {a.node()}, [](Node& self) {
    if (auto* ga = grad_of(self.inputs[0]))
      for (real& g : *ga) g += self.grad[0];
  });
}

Tensor dropout(const Tensor& a, real p, std::mt19937_64& rng) {
  require_defined(a, "dropout");
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must lie in [0, 1)");
  if (p == 0.0) return a;
  std::uniform_real_distribution<real> unif(0.0, 1.0);
  const real keep_scale = 1.0 / (1.0 - p);
  std::vector<real> mask(a.size());
  for (real& m : mask) m = unif(rng) < p ? 0.0 : keep_scale;
  std::vector<real> out(a.size());
  auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * mask[i];
  return emit("dropout", a.shape(), std::move(out), {a.node()}, [mask = std::move(mask)](Node& self) {
    if (auto* ga = grad_of(self.inputs[0]))
      for (std::size_t i = 0; i < mask.size(); ++i) (*ga)[i] += self.grad[i] * mask[i];
  });
}

Tensor nll(const Tensor& log_probs, std::span<const int> targets) {
  require_defined(log_probs, "nll");
  const std::size_t r = log_probs.rows(), c = log_probs.cols();
  if (targets.size() != r) {
    shape_fail("nll", std::to_string(r) + " targets", std::to_string(targets.size()));
  }
  real s = 0.0;
  auto lv = log_probs.values();
  for (std::size_t i = 0; i < r; ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= c) {
      throw std::out_of_range("nll: target " + std::to_string(targets[i]) + " outside vocabulary of " +
                              std::to_string(c));
    }
    s -= lv[i * c + targets[i]];
  }
  std::vector<int> saved(targets.begin(), targets.end());
  return emit("nll", {1, 1}, {s}, {log_probs.node()}, [c, saved = std::move(saved)](Node& self) {
    if (auto* gl = grad_of(self.inputs[0]))
      for (std::size_t i = 0; i < saved.size(); ++i) (*gl)[i * c + saved[i]] -= self.grad[0];
  });
}

}  // namespace ops

}  // namespace haca
