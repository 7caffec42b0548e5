// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// Additive (Bahdanau) soft attention and the cross-modal fusion built on it.
//
//   score_k = v . tanh(W_f feature_k + W_q query)
//   alpha   = softmax(score)
//   context = sum_k alpha_k feature_k

#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "haca/parameters.hpp"
#include "haca/tensor.hpp"

namespace haca::inline HACA_PRECISION_NS {

struct SoftAttentionParams {
  Tensor feature_proj;  // W_f [a x feature_dim]
  Tensor query_proj;    // W_q [a x query_dim]
  Tensor score;         // v   [1 x a]

  std::size_t feature_dim() const { return feature_proj.cols(); }
  std::size_t query_dim() const { return query_proj.cols(); }

  static SoftAttentionParams create(ParameterFactory& factory, const std::string& prefix, std::size_t feature_dim,
                                    std::size_t query_dim, std::size_t attention_dim);
};

struct AttentionResult {
  Tensor context;  // [1 x feature_dim]
  Tensor weights;  // [1 x k]
};

// W_f applied to every feature row. Depends only on the features, so callers
// that attend to the same sequence many times compute it once.
Tensor attention_keys(const SoftAttentionParams& params, const Tensor& features);

// features [k x d], keys = attention_keys(params, features).
AttentionResult attend(const SoftAttentionParams& params, const Tensor& query, const Tensor& features,
                       const Tensor& keys);

AttentionResult soft_attention(const Tensor& query, const Tensor& features, const SoftAttentionParams& params);

struct CrossModalParams {
  std::vector<Tensor> projections;  // one [fusion_dim x context_dim_m] per term
  Tensor bias;                      // [1 x fusion_dim]
  SoftAttentionParams scorer;       // over projected contexts, queried by the decoder hidden

  std::size_t fusion_dim() const { return bias.cols(); }
  std::size_t arity() const { return projections.size(); }

  static CrossModalParams create(ParameterFactory& factory, const std::string& prefix,
                                 std::span<const std::size_t> context_dims, std::size_t fusion_dim,
                                 std::size_t query_dim, std::size_t attention_dim);
};

struct FusionResult {
  Tensor context;  // c_f [1 x fusion_dim], entries in (-1, 1)
  Tensor beta;     // [1 x arity], on the simplex
};

// c_f = tanh(sum_m beta_m W_m c_m + b), beta scored over the projected
// contexts W_m c_m with `query` as the attention query.
FusionResult cross_modal_fuse(std::span<const Tensor> contexts, const Tensor& query, const CrossModalParams& params);

// Observer for attention weights; set per thread. Receives a tag naming the
// attention site and the weight row.
using AttentionObserver = std::function<void(std::string_view site, std::span<const real> weights)>;

class AttentionTraceScope {
 public:
  explicit AttentionTraceScope(AttentionObserver observer);
  ~AttentionTraceScope();
  AttentionTraceScope(const AttentionTraceScope&) = delete;
  AttentionTraceScope& operator=(const AttentionTraceScope&) = delete;

 private:
  AttentionObserver previous_;
};

bool attention_trace_active();
// No-op unless an observer is installed.
void report_attention(std::string_view site, const Tensor& weights);

}  // namespace haca
