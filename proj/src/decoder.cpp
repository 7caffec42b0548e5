// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/decoder.hpp"

#include <stdexcept>

namespace haca::inline HACA_PRECISION_NS {

namespace {

std::string source_label(const ContextSource& s, std::span<const ModalityDims> modalities) {
  return modalities[s.modality].name + (s.high ? "_high" : "_low");
}

std::size_t source_dim(const ContextSource& s, std::span<const ModalityDims> modalities) {
  const auto& m = modalities[s.modality];
  const std::size_t d = s.high ? m.high : m.low;
  if (d == 0) throw std::invalid_argument("decoder: modality '" + m.name + "' has no " + (s.high ? "high" : "low") +
                                          "-level outputs");
  return d;
}

// Decoder wiring for each variant. Sources are listed modality by modality.
std::vector<DecoderLayout> layouts_for(const DecoderConfig& config, std::size_t modality_count) {
  auto sources = [&](bool high, bool low) {
    std::vector<ContextSource> out;
    for (std::size_t m = 0; m < modality_count; ++m) {
      if (high) out.push_back({m, true});
      if (low) out.push_back({m, false});
    }
    return out;
  };
  DecoderLayout local;
  local.name = "local";
  local.hidden = config.local_hidden;
  switch (config.variant) {
    case ModelVariant::kAttV:
      local.sources = {{0, false}};
      return {local};
    case ModelVariant::kCmAttVa:
      local.sources = sources(false, true);
      local.fusion = true;
      return {local};
    case ModelVariant::kCmAttVad:
      local.sources = sources(false, true);
      local.fusion = true;
      local.self_attention = true;
      return {local};
    case ModelVariant::kHacaNoAlign:
      local.sources = sources(true, true);
      local.fusion = true;
      local.self_attention = true;
      return {local};
    case ModelVariant::kHaca: {
      DecoderLayout global;
      global.name = "global";
      global.hidden = config.global_hidden;
      global.sources = sources(true, false);
      global.fusion = true;
      global.self_attention = true;
      local.sources = sources(false, true);
      local.fusion = true;
      local.self_attention = true;
      local.takes_global_output = true;
      return {global, local};
    }
  }
  throw std::invalid_argument("unknown model variant");
}

AttentiveDecoderParams create_decoder(ParameterFactory& factory, const DecoderLayout& layout,
                                      const DecoderConfig& config, std::span<const ModalityDims> modalities) {
  const std::string prefix = "decoder." + layout.name;
  const std::size_t att = config.attention_dim ? config.attention_dim : layout.hidden;
  AttentiveDecoderParams p;
  p.layout = layout;
  std::vector<std::size_t> context_dims;
  for (const auto& s : layout.sources) {
    const std::size_t d = source_dim(s, modalities);
    p.source_attention.push_back(SoftAttentionParams::create(
        factory, prefix + ".attention." + source_label(s, modalities), d, layout.hidden, att));
    context_dims.push_back(d);
  }
  if (layout.self_attention) {
    p.self_attention =
        SoftAttentionParams::create(factory, prefix + ".self_attention", layout.hidden, layout.hidden, att);
    context_dims.push_back(layout.hidden);
  }
  if (layout.fusion) {
    p.fusion = CrossModalParams::create(factory, prefix + ".fusion", context_dims, layout.hidden, layout.hidden, att);
  }
  std::size_t input_dim = p.context_dim() + config.embed_dim;
  if (layout.takes_global_output) input_dim += config.global_hidden;
  p.lstm = LstmParams::create(factory, prefix + ".lstm", input_dim, layout.hidden);
  return p;
}

DecoderOutput run_decoder(const AttentiveDecoderParams& p, std::span<const PreparedSource> sources,
                          const Tensor& h_prev, const Tensor& c_prev, std::span<const Tensor> history,
                          const Tensor& embedded, const Tensor* extra, const DropoutContext& dropout) {
  const bool tracing = attention_trace_active();
  std::vector<Tensor> contexts;
  contexts.reserve(sources.size() + 1);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    AttentionResult r = attend(p.source_attention[i], h_prev, sources[i].features, sources[i].keys);
    if (tracing) report_attention(sources[i].site, r.weights);
    contexts.push_back(r.context);
  }
  if (p.self_attention) {
    if (history.empty()) {
      contexts.push_back(Tensor::zeros({1, p.layout.hidden}));
    } else {
      AttentionResult r = soft_attention(h_prev, ops::stack_rows(history), *p.self_attention);
      if (tracing) report_attention("decoder." + p.layout.name + ".self", r.weights);
      contexts.push_back(r.context);
    }
  }
  Tensor context;
  if (p.fusion) {
    FusionResult fused = cross_modal_fuse(contexts, h_prev, *p.fusion);
    if (tracing) report_attention("decoder." + p.layout.name + ".beta", fused.beta);
    context = fused.context;
  } else {
    context = ops::concat(contexts);
  }
  Tensor input = extra ? ops::concat({context, embedded, *extra}) : ops::concat({context, embedded});
  if (dropout.active()) input = ops::dropout(input, dropout.p, *dropout.rng);
  LstmStep step = lstm_step(input, h_prev, c_prev, p.lstm);
  return {step.output, step.hidden, step.cell};
}

Tensor embed(const DecoderParams& params, int word) {
  const int ids[] = {word};
  return ops::gather_rows(params.embedding, ids);
}

}  // namespace

std::size_t AttentiveDecoderParams::context_dim() const {
  if (fusion) return fusion->fusion_dim();
  std::size_t d = 0;
  for (const auto& a : source_attention) d += a.feature_dim();
  if (self_attention) d += layout.hidden;
  return d;
}

DecoderParams DecoderParams::create(ParameterFactory& factory, const DecoderConfig& config,
                                    std::span<const ModalityDims> modalities) {
  if (config.vocab_size == 0 || config.embed_dim == 0 || config.local_hidden == 0) {
    throw std::invalid_argument("decoder: vocab size, embedding and local hidden dims must be positive");
  }
  if (modalities.size() < variant_modalities(config.variant)) {
    throw std::invalid_argument("decoder: variant " + std::string(variant_name(config.variant)) + " needs " +
                                std::to_string(variant_modalities(config.variant)) + " modalities, got " +
                                std::to_string(modalities.size()));
  }
  if (config.variant == ModelVariant::kHaca && config.global_hidden == 0) {
    throw std::invalid_argument("decoder: global hidden dim must be positive for haca");
  }
  DecoderParams p;
  p.embedding = factory.uniform("decoder.embedding", {config.vocab_size, config.embed_dim});
  auto layouts = layouts_for(config, modalities.size());
  for (const auto& layout : layouts) {
    if (layout.name == "global") {
      p.global = create_decoder(factory, layout, config, modalities);
    } else {
      p.local = create_decoder(factory, layout, config, modalities);
    }
  }
  p.projection = factory.uniform("decoder.projection", {config.vocab_size, config.local_hidden});
  return p;
}

DecoderState initial_decoder_state(const DecoderParams& params) {
  DecoderState s;
  if (params.global) {
    s.global_hidden = Tensor::zeros({1, params.global->layout.hidden});
    s.global_cell = s.global_hidden;
  }
  s.local_hidden = Tensor::zeros({1, params.local.layout.hidden});
  s.local_cell = s.local_hidden;
  return s;
}

DecodingContext prepare_decoding(const DecoderParams& params, std::span<const EncodedModality> encoded) {
  auto prepare = [&](const AttentiveDecoderParams& dec) {
    std::vector<PreparedSource> out;
    for (std::size_t i = 0; i < dec.layout.sources.size(); ++i) {
      const auto& s = dec.layout.sources[i];
      if (s.modality >= encoded.size()) throw std::invalid_argument("prepare_decoding: missing encoded modality");
      const EncodedModality& m = encoded[s.modality];
      const Tensor& features = s.high ? m.high : m.low;
      if (!features.defined()) {
        throw std::invalid_argument("prepare_decoding: modality '" + m.modality + "' lacks " +
                                    (s.high ? "high" : "low") + "-level outputs");
      }
      out.push_back({features, attention_keys(dec.source_attention[i], features),
                     "decoder." + dec.layout.name + "." + m.modality + (s.high ? "_high" : "_low")});
    }
    return out;
  };
  DecodingContext ctx;
  if (params.global) ctx.global = prepare(*params.global);
  ctx.local = prepare(params.local);
  return ctx;
}

Tensor decoder_self_attention(std::span<const Tensor> history, const Tensor& query, const SoftAttentionParams& params,
                              std::size_t dim) {
  if (history.empty()) return Tensor::zeros({1, dim});
  return soft_attention(query, ops::stack_rows(history), params).context;
}

Tensor global_step(DecoderState& state, const DecodingContext& context, int prev_word, const DecoderParams& params,
                   const DropoutContext& dropout) {
  if (!params.global) throw std::logic_error("global_step: model has no global decoder");
  DecoderOutput out = run_decoder(*params.global, context.global, state.global_hidden, state.global_cell,
                                  state.global_history, embed(params, prev_word), nullptr, dropout);
  state.global_hidden = out.hidden;
  state.global_cell = out.cell;
  state.global_history.push_back(out.hidden);
  return out.output;
}

Tensor local_step(DecoderState& state, const DecodingContext& context, int prev_word, const Tensor& global_output,
                  const DecoderParams& params, const DropoutContext& dropout) {
  const bool wants_global = params.local.layout.takes_global_output;
  if (wants_global && !global_output.defined()) throw std::logic_error("local_step: global output required");
  DecoderOutput out = run_decoder(params.local, context.local, state.local_hidden, state.local_cell,
                                  state.local_history, embed(params, prev_word),
                                  wants_global ? &global_output : nullptr, dropout);
  state.local_hidden = out.hidden;
  state.local_cell = out.cell;
  state.local_history.push_back(out.hidden);
  return out.output;
}

Tensor project_vocab(const Tensor& output, const Tensor& projection) {
  return ops::softmax(ops::linear(output, projection));
}

StepOutput decode_step(const DecoderState& state, const DecodingContext& context, int prev_word,
                       const DecoderParams& params, const DropoutContext& dropout) {
  StepOutput out{Tensor(), Tensor(), state};
  Tensor global_output;
  if (params.global) global_output = global_step(out.state, context, prev_word, params, dropout);
  Tensor local_output = local_step(out.state, context, prev_word, global_output, params, dropout);
  if (dropout.active()) local_output = ops::dropout(local_output, dropout.p, *dropout.rng);
  out.logits = ops::linear(local_output, params.projection);
  out.log_probs = ops::log_softmax(out.logits);
  out.state.prev_word = prev_word;
  ++out.state.step;
  return out;
}

}  // namespace haca
