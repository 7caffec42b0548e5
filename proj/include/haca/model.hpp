// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "haca/config.hpp"
#include "haca/decoder.hpp"
#include "haca/encoder.hpp"
#include "haca/parameters.hpp"
#include "haca/sample.hpp"

namespace haca::inline HACA_PRECISION_NS {

class Model {
 public:
  // Parameters are drawn from `rng` in a fixed creation order: encoders
  // (visual, then audio), embedding, global decoder, local decoder,
  // projection.
  static Model build(const HacaConfig& config, std::mt19937_64& rng);
  static Model build(const HacaConfig& config);

  Model(Model&&) = default;
  Model& operator=(Model&&) = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const HacaConfig& config() const { return config_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  const DecoderParams& decoder() const { return decoder_; }
  const std::vector<HierEncoderConfig>& encoder_configs() const { return encoder_configs_; }

  std::vector<EncodedModality> encode(const Sample& sample) const;
  DecodingContext prepare(const Sample& sample) const;
  DecoderState initial_state() const { return initial_decoder_state(decoder_); }
  StepOutput step(const DecodingContext& context, const DecoderState& state, int prev_word,
                  const DropoutContext& dropout = {}) const;

  // Parameter table: name, shape, count.
  std::string describe() const;

 private:
  Model() = default;

  HacaConfig config_;
  ParameterStore params_;
  std::vector<HierEncoderConfig> encoder_configs_;
  std::vector<HierEncoderParams> encoders_;
  DecoderParams decoder_;
};

// Chooses the word fed at step t (1-based, t >= 2) given the ground-truth
// previous word and the model's distribution at step t - 1.
using InputPolicy = std::function<int(std::size_t t, int gold_prev, const Tensor& prev_log_probs)>;

struct ForwardOptions {
  DropoutContext dropout;
  InputPolicy input_policy;  // empty -> teacher forcing
};

// Encodes both modalities and unrolls one decoder step per target token.
// Returns the per-step log-distributions over the vocabulary.
std::vector<Tensor> forward_teacher_forced(const Model& model, const Sample& sample, std::span<const int> targets,
                                           const ForwardOptions& options = {});

// Summed negative log-likelihood of `targets` under teacher forcing (or the
// configured input policy). Targets are EOS-terminated token ids.
Tensor sequence_nll(const Model& model, const Sample& sample, std::span<const int> targets,
                    const ForwardOptions& options = {});

// Token-normalized cross-entropy over a batch, each sample scored against its
// first reference.
Tensor batch_loss(const Model& model, std::span<const Sample> batch, const ForwardOptions& options = {});

}  // namespace haca
