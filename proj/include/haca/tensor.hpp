// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// Dense tensors over `real` (binary64 by default) with reverse-mode automatic differentiation.
//
// Every primitive either records itself onto the thread's active
// ComputationRecord (when one is installed via RecordScope and at least one
// input requires a gradient) or runs as a plain constant computation. The
// record is rebuilt for every forward pass.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "haca/precision.hpp"

namespace haca::inline HACA_PRECISION_NS {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<real> value;
  std::vector<real> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::vector<real>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, real value);
  static Tensor constant(Shape shape, std::vector<real> values);
  // A differentiable leaf. Gradients accumulate across records until
  // zero_grad() is called.
  static Tensor parameter(Shape shape, std::vector<real> values);
  static Tensor row(std::vector<real> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t rank() const { return shape().size(); }
  // Matrix view: cols is the last axis, rows the product of the rest.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const real> values() const;
  std::span<real> mutable_values();
  real item() const;
  real at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  bool has_grad() const;
  // Zeros when nothing has been accumulated yet.
  std::vector<real> grad() const;
  std::span<real> mutable_grad();
  void zero_grad();

  std::uint64_t id() const;

  // Same storage identity (not value equality).
  bool same(const Tensor& other) const { return node_ == other.node_; }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Ordered log of recorded primitive applications. Inputs always precede
// their consumers, so a reverse sweep is a valid backward schedule.
class ComputationRecord {
 public:
  ComputationRecord() = default;
  ComputationRecord(const ComputationRecord&) = delete;
  ComputationRecord& operator=(const ComputationRecord&) = delete;

  void append(std::shared_ptr<detail::Node> node);
  std::size_t size() const { return nodes_.size(); }
  bool contains(const Tensor& t) const;

  // Accumulates dLoss/dLeaf into every differentiable leaf reachable from
  // `loss`. May be called once per record.
  void backward(const Tensor& loss);

  void reset();

 private:
  std::vector<std::shared_ptr<detail::Node>> nodes_;
  bool consumed_ = false;
};

// Installs a record as the active one for the current thread.
class RecordScope {
 public:
  explicit RecordScope(ComputationRecord& record);
  ~RecordScope();
  RecordScope(const RecordScope&) = delete;
  RecordScope& operator=(const RecordScope&) = delete;

 private:
  ComputationRecord* previous_;
};

// Suspends recording for the current thread (inference-only evaluation).
class NoRecordScope {
 public:
  NoRecordScope();
  ~NoRecordScope();
  NoRecordScope(const NoRecordScope&) = delete;
  NoRecordScope& operator=(const NoRecordScope&) = delete;

 private:
  ComputationRecord* previous_;
};

ComputationRecord* active_record();

// When enabled, every primitive verifies that its output is finite.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

// Backpropagates `loss` through the active record.
void backward(const Tensor& loss);

namespace ops {

Tensor matmul(const Tensor& a, const Tensor& b);
// x [r x in], w [out x in] -> x * w^T [r x out]
Tensor linear(const Tensor& x, const Tensor& w);
// Same shape, or b is a single row broadcast over the rows of a.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, real factor);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);
Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);
Tensor stack_rows(std::span<const Tensor> rows);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor gather_rows(const Tensor& table, std::span<const int> ids);
// weights [1 x k], parts k tensors of shape [1 x d] -> [1 x d]
Tensor weighted_sum(const Tensor& weights, std::span<const Tensor> parts);
Tensor sum(const Tensor& a);
// Inverted dropout; identity when p == 0.
Tensor dropout(const Tensor& a, real p, std::mt19937_64& rng);
// -sum_r logp[r, target_r]
Tensor nll(const Tensor& log_probs, std::span<const int> targets);

}  // namespace ops

}  // namespace haca
