// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/model.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace haca::inline HACA_PRECISION_NS {

Model Model::build(const HacaConfig& config, std::mt19937_64& rng) {
  config.validate();
  Model model;
  model.config_ = config;
  ParameterFactory factory(model.params_, rng, config.init_range);
  std::vector<ModalityDims> dims;
  for (const auto& m : config.modalities()) {
    HierEncoderConfig enc;
    enc.modality = m.name;
    enc.input_dim = m.input_dim;
    enc.low_hidden = m.low_hidden;
    enc.high_hidden = m.high_hidden;
    enc.chunk = m.chunk;
    enc.hierarchical = variant_is_hierarchical(config.variant);
    enc.attention_dim = config.attention_dim;
    model.encoders_.push_back(HierEncoderParams::create(factory, "encoder." + m.name, enc));
    model.encoder_configs_.push_back(enc);
    dims.push_back({m.name, enc.low_output_dim(), enc.hierarchical ? enc.high_hidden : 0});
  }
  DecoderConfig dec;
  dec.variant = config.variant;
  dec.vocab_size = config.vocab_size;
  dec.embed_dim = config.embed_dim;
  dec.global_hidden = config.global_hidden;
  dec.local_hidden = config.local_hidden;
  dec.attention_dim = config.attention_dim;
  model.decoder_ = DecoderParams::create(factory, dec, dims);
  return model;
}

Model Model::build(const HacaConfig& config) {
  std::mt19937_64 rng(config.seed);
  return build(config, rng);
}

std::vector<EncodedModality> Model::encode(const Sample& sample) const {
  std::vector<EncodedModality> out;
  const auto modalities = config_.modalities();
  for (std::size_t i = 0; i < encoders_.size(); ++i) {
    const ModalityStream& stream = sample.stream(modalities[i].name);
    if (modalities[i].max_length && stream.length > modalities[i].max_length) {
      throw std::invalid_argument("sample '" + sample.id + "': " + stream.name + " length " +
                                  std::to_string(stream.length) + " exceeds maximum " +
                                  std::to_string(modalities[i].max_length));
    }
    out.push_back(haca::encode(stream, encoder_configs_[i], encoders_[i]));
  }
  return out;
}

DecodingContext Model::prepare(const Sample& sample) const { return prepare_decoding(decoder_, encode(sample)); }

StepOutput Model::step(const DecodingContext& context, const DecoderState& state, int prev_word,
                       const DropoutContext& dropout) const {
  return decode_step(state, context, prev_word, decoder_, dropout);
}

std::string Model::describe() const {
  std::ostringstream os;
  std::size_t width = 4;
  for (const auto& e : params_.entries()) width = std::max(width, e.name.size());
  os << "variant: " << variant_name(config_.variant) << '\n';
  os << std::left << std::setw(static_cast<int>(width)) << "name" << "  " << std::setw(14) << "shape"
     << "  count\n";
  for (const auto& e : params_.entries()) {
    os << std::left << std::setw(static_cast<int>(width)) << e.name << "  " << std::setw(14)
       << shape_string(e.tensor.shape()) << "  " << e.tensor.size() << '\n';
  }
  os << "total parameters: " << params_.scalar_count() << '\n';
  return os.str();
}

std::vector<Tensor> forward_teacher_forced(const Model& model, const Sample& sample, std::span<const int> targets,
                                           const ForwardOptions& options) {
  if (targets.empty()) throw std::invalid_argument("forward_teacher_forced: empty target sequence");
  DecodingContext context = model.prepare(sample);
  DecoderState state = model.initial_state();
  std::vector<Tensor> out;
  out.reserve(targets.size());
  int prev = kBos;
  for (std::size_t t = 1; t <= targets.size(); ++t) {
    if (t >= 2) {
      prev = options.input_policy ? options.input_policy(t, targets[t - 2], out.back()) : targets[t - 2];
    }
    StepOutput step = model.step(context, state, prev, options.dropout);
    state = std::move(step.state);
    out.push_back(step.log_probs);
  }
  return out;
}

Tensor sequence_nll(const Model& model, const Sample& sample, std::span<const int> targets,
                    const ForwardOptions& options) {
  const auto vocab = static_cast<int>(model.config().vocab_size);
  for (int id : targets) {
    if (id < 0 || id >= vocab) {
      throw std::out_of_range("sample '" + sample.id + "': target id " + std::to_string(id) + " outside vocabulary of " +
                              std::to_string(vocab));
    }
  }
  std::vector<Tensor> steps = forward_teacher_forced(model, sample, targets, options);
  std::vector<Tensor> terms;
  terms.reserve(steps.size());
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const int id[] = {targets[t]};
    terms.push_back(ops::nll(steps[t], id));
  }
  return ops::sum(ops::concat(terms));
}

Tensor batch_loss(const Model& model, std::span<const Sample> batch, const ForwardOptions& options) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  std::vector<Tensor> terms;
  std::size_t tokens = 0;
  for (const Sample& s : batch) {
    if (s.references.empty()) throw std::invalid_argument("sample '" + s.id + "' has no reference caption");
    terms.push_back(sequence_nll(model, s, s.references.front(), options));
    tokens += s.references.front().size();
  }
  return ops::scale(ops::sum(ops::concat(terms)), real(1) / static_cast<real>(tokens));
}

}  // namespace haca
