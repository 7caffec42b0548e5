// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// Standard LSTM cell and sequence runners. Vectors are [1 x d] rows and
// sequences are [n x d] matrices, one step per row.
//
// Gate blocks in W, U and b are laid out as: input, forget, cell candidate,
// output.

#pragma once

#include <string>

#include "haca/parameters.hpp"
#include "haca/tensor.hpp"

namespace haca::inline HACA_PRECISION_NS {

struct LstmParams {
  Tensor input_weights;   // [4h x in]
  Tensor hidden_weights;  // [4h x h]
  Tensor bias;            // [1 x 4h]
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  // Uniform init everywhere, then the forget-gate bias block is set to 1.
  static LstmParams create(ParameterFactory& factory, const std::string& prefix, std::size_t input_dim,
                           std::size_t hidden_dim);
};

struct LstmStep {
  Tensor output;
  Tensor hidden;  // identical to output
  Tensor cell;
};

LstmStep lstm_step(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev, const LstmParams& params);

// Unidirectional pass from zero state; returns [n x h].
Tensor lstm_run(const Tensor& sequence, const LstmParams& params);

// Row t of the result is [forward_t, backward_t]; result is [n x 2h].
Tensor bilstm_run(const Tensor& sequence, const LstmParams& fwd, const LstmParams& bwd);

}  // namespace haca
