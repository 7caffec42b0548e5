// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/lstm.hpp"

#include <stdexcept>
#include <vector>

namespace haca::inline HACA_PRECISION_NS {

namespace {

void check_dims(const char* op, const Tensor& x, const Tensor& h, const Tensor& c, const LstmParams& p) {
  auto fail = [&](const std::string& what, std::size_t want, std::size_t got) {
    throw ShapeError(std::string(op) + ": " + what + " width expected " + std::to_string(want) + ", got " +
                     std::to_string(got));
  };
  if (x.cols() != p.input_dim) fail("input", p.input_dim, x.cols());
  if (h.cols() != p.hidden_dim) fail("hidden", p.hidden_dim, h.cols());
  if (c.cols() != p.hidden_dim) fail("cell", p.hidden_dim, c.cols());
}

// Gate pre-activations for the input term are computed by the caller so
// sequence runners can project all steps at once.
LstmStep cell(const Tensor& input_gates, const Tensor& h_prev, const Tensor& c_prev, const LstmParams& p) {
  const std::size_t h = p.hidden_dim;
  Tensor gates = ops::add(ops::add(input_gates, ops::linear(h_prev, p.hidden_weights)), p.bias);
  Tensor in_gate = ops::sigmoid(ops::slice_cols(gates, 0, h));
  Tensor forget_gate = ops::sigmoid(ops::slice_cols(gates, h, 2 * h));
  Tensor candidate = ops::tanh(ops::slice_cols(gates, 2 * h, 3 * h));
  Tensor out_gate = ops::sigmoid(ops::slice_cols(gates, 3 * h, 4 * h));
  Tensor c = ops::add(ops::mul(forget_gate, c_prev), ops::mul(in_gate, candidate));
  Tensor hidden = ops::mul(out_gate, ops::tanh(c));
  return {hidden, hidden, c};
}

std::vector<Tensor> run_direction(const Tensor& projected, const LstmParams& p, bool reverse) {
  const std::size_t n = projected.rows();
  std::vector<Tensor> outputs(n);
  Tensor h = Tensor::zeros({1, p.hidden_dim});
  Tensor c = h;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    LstmStep step = cell(ops::slice_rows(projected, t, t + 1), h, c, p);
    h = step.hidden;
    c = step.cell;
    outputs[t] = step.output;
  }
  return outputs;
}

void check_sequence(const char* op, const Tensor& sequence, const LstmParams& p) {
  if (!sequence.defined() || sequence.rank() != 2) throw ShapeError(std::string(op) + ": expected [n x d] sequence");
  if (sequence.cols() != p.input_dim) {
    throw ShapeError(std::string(op) + ": feature width expected " + std::to_string(p.input_dim) + ", got " +
                     std::to_string(sequence.cols()));
  }
}

}  // namespace

LstmParams LstmParams::create(ParameterFactory& factory, const std::string& prefix, std::size_t input_dim,
                              std::size_t hidden_dim) {
  if (input_dim == 0 || hidden_dim == 0) throw std::invalid_argument(prefix + ": LSTM dims must be positive");
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.input_weights = factory.uniform(prefix + ".W", {4 * hidden_dim, input_dim});
  p.hidden_weights = factory.uniform(prefix + ".U", {4 * hidden_dim, hidden_dim});
  p.bias = factory.uniform(prefix + ".b", {1, 4 * hidden_dim});
  auto b = p.bias.mutable_values();
  for (std::size_t i = hidden_dim; i < 2 * hidden_dim; ++i) b[i] = 1.0;
  return p;
}

LstmStep lstm_step(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev, const LstmParams& params) {
  check_dims("lstm_step", x, h_prev, c_prev, params);
  return cell(ops::linear(x, params.input_weights), h_prev, c_prev, params);
}

Tensor lstm_run(const Tensor& sequence, const LstmParams& params) {
  check_sequence("lstm_run", sequence, params);
  auto outputs = run_direction(ops::linear(sequence, params.input_weights), params, false);
  return ops::stack_rows(outputs);
}

Tensor bilstm_run(const Tensor& sequence, const LstmParams& fwd, const LstmParams& bwd) {
  check_sequence("bilstm_run", sequence, fwd);
  check_sequence("bilstm_run", sequence, bwd);
  auto forward = run_direction(ops::linear(sequence, fwd.input_weights), fwd, false);
  auto backward = run_direction(ops::linear(sequence, bwd.input_weights), bwd, true);
  return ops::concat({ops::stack_rows(forward), ops::stack_rows(backward)});
}

}  // namespace haca
