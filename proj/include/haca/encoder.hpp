// Copyright 2026 The haca Authors. Apache 2.0 License.
//
// Hierarchical attentive encoder: a bidirectional low-level LSTM over raw
// frames, and a high-level LSTM that advances once per chunk of `chunk`
// low-level steps. Its input at chunk j is an attention summary of that
// chunk's low-level outputs, queried by the previous high-level hidden state.
// A final partial chunk is attended as a shorter chunk.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "haca/attention.hpp"
#include "haca/lstm.hpp"
#include "haca/sample.hpp"

namespace haca::inline HACA_PRECISION_NS {

struct HierEncoderConfig {
  std::string modality;
  std::size_t input_dim = 0;
  std::size_t low_hidden = 0;  // per direction
  std::size_t high_hidden = 0;
  std::size_t chunk = 1;
  bool bidirectional = true;
  // false: only the low-level pass runs (flat encoder used by the baselines)
  bool hierarchical = true;
  std::size_t attention_dim = 0;  // 0 -> high_hidden

  std::size_t low_output_dim() const { return bidirectional ? 2 * low_hidden : low_hidden; }
  void validate() const;
};

struct HierEncoderParams {
  LstmParams low_fwd;
  LstmParams low_bwd;  // unused when not bidirectional
  LstmParams high;
  SoftAttentionParams chunk_attention;

  static HierEncoderParams create(ParameterFactory& factory, const std::string& prefix,
                                  const HierEncoderConfig& config);
};

struct EncodedModality {
  std::string modality;
  Tensor low;   // [n x low_output_dim]
  Tensor high;  // [ceil(n / chunk) x high_hidden]; undefined for flat encoders
  std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges;  // [begin, end) into low
  std::vector<std::vector<real>> chunk_weights;
};

// [length x dim] constant tensor of the stream's frames.
Tensor to_tensor(const ModalityStream& stream);

std::size_t chunk_count(std::size_t length, std::size_t chunk);
std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t length, std::size_t chunk);

EncodedModality encode(const ModalityStream& features, const HierEncoderConfig& config,
                       const HierEncoderParams& params);
// Same, over a [n x input_dim] tensor that may itself be differentiable.
EncodedModality encode(const Tensor& frames, const HierEncoderConfig& config, const HierEncoderParams& params);

// Per-thread counters of recurrent steps taken by encoders.
struct EncoderCounters {
  std::size_t low_steps = 0;
  std::size_t high_steps = 0;
};
EncoderCounters& encoder_counters();

}  // namespace haca
