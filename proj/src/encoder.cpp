// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/encoder.hpp"

#include <stdexcept>

namespace haca::inline HACA_PRECISION_NS {

namespace {

thread_local EncoderCounters g_counters;

}  // namespace

void HierEncoderConfig::validate() const {
  const std::string who = "encoder '" + modality + "'";
  if (input_dim == 0 || low_hidden == 0) throw std::invalid_argument(who + ": dims must be positive");
  if (hierarchical && (high_hidden == 0 || chunk == 0)) {
    throw std::invalid_argument(who + ": high-level dim and chunk size must be positive");
  }
}

HierEncoderParams HierEncoderParams::create(ParameterFactory& factory, const std::string& prefix,
                                            const HierEncoderConfig& config) {
  config.validate();
  HierEncoderParams p;
  p.low_fwd = LstmParams::create(factory, prefix + ".low.fwd", config.input_dim, config.low_hidden);
  if (config.bidirectional) {
    p.low_bwd = LstmParams::create(factory, prefix + ".low.bwd", config.input_dim, config.low_hidden);
  }
  if (config.hierarchical) {
    const std::size_t att = config.attention_dim ? config.attention_dim : config.high_hidden;
    p.chunk_attention = SoftAttentionParams::create(factory, prefix + ".chunk_attention", config.low_output_dim(),
                                                    config.high_hidden, att);
    p.high = LstmParams::create(factory, prefix + ".high", config.low_output_dim(), config.high_hidden);
  }
  return p;
}

Tensor to_tensor(const ModalityStream& stream) {
  if (stream.length == 0) throw std::invalid_argument("modality '" + stream.name + "': empty feature sequence");
  return Tensor::constant({stream.length, stream.dim}, std::vector<real>(stream.values.begin(), stream.values.end()));
}

std::size_t chunk_count(std::size_t length, std::size_t chunk) {
  if (chunk == 0) throw std::invalid_argument("chunk size must be positive");
  return (length + chunk - 1) / chunk;
}

std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t length, std::size_t chunk) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  ranges.reserve(chunk_count(length, chunk));
  for (std::size_t begin = 0; begin < length; begin += chunk) {
    ranges.emplace_back(begin, std::min(begin + chunk, length));
  }
  return ranges;
}

EncodedModality encode(const ModalityStream& features, const HierEncoderConfig& config,
                       const HierEncoderParams& params) {
  if (features.length == 0) throw std::invalid_argument("encode: empty feature sequence for '" + config.modality + "'");
  return encode(to_tensor(features), config, params);
}

EncodedModality encode(const Tensor& frames, const HierEncoderConfig& config, const HierEncoderParams& params) {
  if (!frames.defined() || frames.rows() == 0) {
    throw std::invalid_argument("encode: empty feature sequence for '" + config.modality + "'");
  }
  if (frames.cols() != config.input_dim) {
    throw ShapeError("encode: '" + config.modality + "' feature dim expected " + std::to_string(config.input_dim) +
                     ", got " + std::to_string(frames.cols()));
  }
  const std::size_t length = frames.rows();
  EncodedModality out;
  out.modality = config.modality;
  out.low = config.bidirectional ? bilstm_run(frames, params.low_fwd, params.low_bwd)
                                 : lstm_run(frames, params.low_fwd);
  g_counters.low_steps += length;
  if (!config.hierarchical) return out;

  Tensor keys = attention_keys(params.chunk_attention, out.low);
  Tensor h = Tensor::zeros({1, config.high_hidden});
  Tensor c = h;
  std::vector<Tensor> high;
  out.chunk_ranges = chunk_ranges(length, config.chunk);
  for (auto [begin, end] : out.chunk_ranges) {
    AttentionResult summary = attend(params.chunk_attention, h, ops::slice_rows(out.low, begin, end),
                                     ops::slice_rows(keys, begin, end));
    if (attention_trace_active()) report_attention("encoder." + config.modality + ".chunk", summary.weights);
    out.chunk_weights.emplace_back(summary.weights.values().begin(), summary.weights.values().end());
    LstmStep step = lstm_step(summary.context, h, c, params.high);
    h = step.hidden;
    c = step.cell;
    high.push_back(step.output);
    ++g_counters.high_steps;
  }
  out.high = ops::stack_rows(high);
  return out;
}

EncoderCounters& encoder_counters() { return g_counters; }

}  // namespace haca
