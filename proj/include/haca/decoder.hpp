// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// Cross-modal attentive decoders.
//
// Every decoder step reads attention contexts over encoder output sequences,
// optionally attends over its own previous hidden states, fuses the contexts
// through cross-modal attention and advances an LSTM. The aligned variant
// runs two decoders per step: the global one over high-level encoder outputs,
// and the local one over low-level outputs plus the global decoder's output.
// All attention queries are the querying decoder's previous hidden state.

#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "haca/attention.hpp"
#include "haca/config.hpp"
#include "haca/encoder.hpp"
#include "haca/lstm.hpp"

namespace haca::inline HACA_PRECISION_NS {

// An encoder output sequence read by one decoder attention.
struct ContextSource {
  std::size_t modality = 0;
  bool high = false;
};

struct DecoderLayout {
  std::vector<ContextSource> sources;
  bool self_attention = false;
  bool fusion = false;
  bool takes_global_output = false;
  std::size_t hidden = 0;
  std::string name;  // "global" or "local"
};

struct ModalityDims {
  std::string name;
  std::size_t low = 0;
  std::size_t high = 0;  // 0 for flat encoders
};

struct DecoderConfig {
  ModelVariant variant = ModelVariant::kHaca;
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 0;
  std::size_t global_hidden = 0;
  std::size_t local_hidden = 0;
  std::size_t attention_dim = 0;  // 0 -> querying decoder's hidden dim
};

struct AttentiveDecoderParams {
  DecoderLayout layout;
  std::vector<SoftAttentionParams> source_attention;
  std::optional<SoftAttentionParams> self_attention;
  std::optional<CrossModalParams> fusion;
  LstmParams lstm;

  std::size_t context_dim() const;
};

struct DecoderParams {
  Tensor embedding;  // [V x embed_dim], shared by both decoders
  std::optional<AttentiveDecoderParams> global;
  AttentiveDecoderParams local;  // the single decoder for non-aligned variants
  Tensor projection;             // W_p [V x local_hidden], no bias

  static DecoderParams create(ParameterFactory& factory, const DecoderConfig& config,
                              std::span<const ModalityDims> modalities);
};

struct DecoderState {
  Tensor global_hidden;
  Tensor global_cell;
  Tensor local_hidden;
  Tensor local_cell;
  std::vector<Tensor> global_history;  // post-step hidden states h_1 .. h_{t-1}
  std::vector<Tensor> local_history;
  int prev_word = kBos;
  std::size_t step = 0;  // completed steps
};

DecoderState initial_decoder_state(const DecoderParams& params);

struct PreparedSource {
  Tensor features;
  Tensor keys;
  std::string site;
};

// Encoder outputs with per-attention keys computed once per sample.
struct DecodingContext {
  std::vector<PreparedSource> global;
  std::vector<PreparedSource> local;
};

DecodingContext prepare_decoding(const DecoderParams& params, std::span<const EncodedModality> encoded);

// Training-time dropout on decoder LSTM inputs and on the local output.
struct DropoutContext {
  real p = 0.0;
  std::mt19937_64* rng = nullptr;

  bool active() const { return rng != nullptr && p > 0.0; }
};

// Weighted sum over `history`; zero vector of `dim` when history is empty.
Tensor decoder_self_attention(std::span<const Tensor> history, const Tensor& query,
                              const SoftAttentionParams& params, std::size_t dim);

struct DecoderOutput {
  Tensor output;
  Tensor hidden;
  Tensor cell;
};

// One step of the global decoder; appends to state.global_history.
Tensor global_step(DecoderState& state, const DecodingContext& context, int prev_word, const DecoderParams& params,
                   const DropoutContext& dropout = {});
// One step of the local (or single) decoder; appends to state.local_history.
Tensor local_step(DecoderState& state, const DecodingContext& context, int prev_word, const Tensor& global_output,
                  const DecoderParams& params, const DropoutContext& dropout = {});

// softmax(W_p o)
Tensor project_vocab(const Tensor& output, const Tensor& projection);

struct StepOutput {
  Tensor logits;     // [1 x V]
  Tensor log_probs;  // log_softmax(logits)
  DecoderState state;
};

StepOutput decode_step(const DecoderState& state, const DecodingContext& context, int prev_word,
                       const DecoderParams& params, const DropoutContext& dropout = {});

}  // namespace haca
