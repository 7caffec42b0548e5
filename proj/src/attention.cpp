// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/attention.hpp"

#include <stdexcept>

namespace haca::inline HACA_PRECISION_NS {

namespace {

thread_local AttentionObserver g_observer;

}  // namespace

SoftAttentionParams SoftAttentionParams::create(ParameterFactory& factory, const std::string& prefix,
                                                std::size_t feature_dim, std::size_t query_dim,
                                                std::size_t attention_dim) {
  SoftAttentionParams p;
  p.feature_proj = factory.uniform(prefix + ".W_f", {attention_dim, feature_dim});
  p.query_proj = factory.uniform(prefix + ".W_q", {attention_dim, query_dim});
  p.score = factory.uniform(prefix + ".v", {1, attention_dim});
  return p;
}

Tensor attention_keys(const SoftAttentionParams& params, const Tensor& features) {
  if (!features.defined()) throw std::invalid_argument("soft_attention: empty feature list");
  return ops::linear(features, params.feature_proj);
}

AttentionResult attend(const SoftAttentionParams& params, const Tensor& query, const Tensor& features,
                       const Tensor& keys) {
  if (!features.defined()) throw std::invalid_argument("soft_attention: empty feature list");
  if (query.cols() != params.query_dim()) {
    throw ShapeError("soft_attention: query width expected " + std::to_string(params.query_dim()) + ", got " +
                     std::to_string(query.cols()));
  }
  Tensor hidden = ops::tanh(ops::add(keys, ops::linear(query, params.query_proj)));
  Tensor weights = ops::softmax(ops::linear(params.score, hidden));  // [1 x k]
  return {ops::matmul(weights, features), weights};
}

AttentionResult soft_attention(const Tensor& query, const Tensor& features, const SoftAttentionParams& params) {
  return attend(params, query, features, attention_keys(params, features));
}

CrossModalParams CrossModalParams::create(ParameterFactory& factory, const std::string& prefix,
                                          std::span<const std::size_t> context_dims, std::size_t fusion_dim,
                                          std::size_t query_dim, std::size_t attention_dim) {
  if (context_dims.empty()) throw std::invalid_argument(prefix + ": fusion needs at least one context");
  CrossModalParams p;
  for (std::size_t m = 0; m < context_dims.size(); ++m) {
    p.projections.push_back(factory.uniform(prefix + ".W" + std::to_string(m), {fusion_dim, context_dims[m]}));
  }
  p.bias = factory.uniform(prefix + ".b", {1, fusion_dim});
  p.scorer = SoftAttentionParams::create(factory, prefix + ".beta", fusion_dim, query_dim, attention_dim);
  return p;
}

FusionResult cross_modal_fuse(std::span<const Tensor> contexts, const Tensor& query, const CrossModalParams& params) {
  if (contexts.size() != params.arity()) {
    throw ShapeError("cross_modal_fuse: expected " + std::to_string(params.arity()) + " contexts, got " +
                     std::to_string(contexts.size()));
  }
  std::vector<Tensor> projected;
  projected.reserve(contexts.size());
  for (std::size_t m = 0; m < contexts.size(); ++m) {
    if (contexts[m].cols() != params.projections[m].cols()) {
      throw ShapeError("cross_modal_fuse: context " + std::to_string(m) + " width expected " +
                       std::to_string(params.projections[m].cols()) + ", got " + std::to_string(contexts[m].cols()));
    }
    projected.push_back(ops::linear(contexts[m], params.projections[m]));
  }
  AttentionResult mix = soft_attention(query, ops::stack_rows(projected), params.scorer);
  return {ops::tanh(ops::add(mix.context, params.bias)), mix.weights};
}

AttentionTraceScope::AttentionTraceScope(AttentionObserver observer) : previous_(std::move(g_observer)) {
  g_observer = std::move(observer);
}

AttentionTraceScope::~AttentionTraceScope() { g_observer = std::move(previous_); }

bool attention_trace_active() { return static_cast<bool>(g_observer); }

void report_attention(std::string_view site, const Tensor& weights) {
  if (g_observer) g_observer(site, weights.values());
}

}  // namespace haca
