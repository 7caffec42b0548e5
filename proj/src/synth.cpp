// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/synth.hpp"

#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

namespace haca {

namespace {

constexpr int kRedraws = 64;

std::size_t uniform_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

SynthProgram draw_program(const SynthSpec& spec, std::mt19937_64& rng) {
  SynthProgram p;
  p.modifier = static_cast<int>(uniform_size(rng, 0, spec.modifiers - 1));
  const std::size_t k = uniform_size(rng, spec.min_events, spec.max_events);
  for (std::size_t i = 0; i < k; ++i) p.events.push_back(static_cast<int>(uniform_size(rng, 0, spec.events - 1)));
  return p;
}

void render(std::vector<double>& frames, std::size_t dim, std::size_t hot, std::size_t count, double sigma,
            std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
  for (std::size_t f = 0; f < count; ++f) {
    for (std::size_t j = 0; j < dim; ++j) {
      double v = j == hot ? 1.0 : 0.0;
      if (sigma > 0) v += noise(rng);
      frames.push_back(v);
    }
  }
}

Sample render_sample(const SynthSpec& spec, const SynthProgram& p, const std::string& id, std::mt19937_64& rng) {
  Sample s;
  s.id = id;
  std::vector<double> visual;
  for (int e : p.events) {
    render(visual, spec.visual_dim, static_cast<std::size_t>(e), uniform_size(rng, spec.min_segment, spec.max_segment),
           spec.sigma, rng);
  }
  std::vector<double> audio;
  const std::size_t audio_len = uniform_size(rng, spec.min_audio, spec.max_audio);
  render(audio, spec.audio_dim, static_cast<std::size_t>(p.modifier), audio_len, spec.sigma, rng);
  const std::size_t visual_len = visual.size() / spec.visual_dim;
  s.streams.emplace_back("visual", visual_len, spec.visual_dim, std::move(visual));
  s.streams.emplace_back("audio", audio_len, spec.audio_dim, std::move(audio));
  std::vector<int> caption{modifier_word(static_cast<std::size_t>(p.modifier))};
  for (int e : p.events) caption.push_back(event_word(spec.modifiers, static_cast<std::size_t>(e)));
  caption.push_back(kEos);
  s.references.push_back(std::move(caption));
  return s;
}

}  // namespace

void SynthSpec::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("synth: " + m); };
  if (events == 0 || modifiers == 0) fail("events and modifiers must be positive");
  if (visual_dim < events) fail("visual_dim " + std::to_string(visual_dim) + " < events " + std::to_string(events));
  if (audio_dim < modifiers) {
    fail("audio_dim " + std::to_string(audio_dim) + " < modifiers " + std::to_string(modifiers));
  }
  if (min_events == 0 || min_events > max_events) fail("need 1 <= min_events <= max_events");
  if (min_segment == 0 || min_segment > max_segment) fail("need 1 <= min_segment <= max_segment");
  if (min_audio == 0 || min_audio > max_audio) fail("need 1 <= min_audio <= max_audio");
  if (!(sigma >= 0.0)) fail("sigma must be nonnegative");
  if (train_samples + val_samples + test_samples == 0) fail("no samples requested");
}

std::size_t SynthSpec::program_count() const {
  std::size_t total = 0, power = 1;
  for (std::size_t k = 1; k <= max_events; ++k) {
    power *= events;
    if (k >= min_events) total += power;
  }
  return total * modifiers;
}

int modifier_word(std::size_t modifier) { return kReservedTokens + static_cast<int>(modifier); }

int event_word(std::size_t modifiers, std::size_t event) {
  return kReservedTokens + static_cast<int>(modifiers + event);
}

SynthDataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  SynthDataset data;
  for (std::size_t m = 0; m < spec.modifiers; ++m) data.vocab.add("mod" + std::to_string(m));
  for (std::size_t e = 0; e < spec.events; ++e) data.vocab.add("evt" + std::to_string(e));

  std::mt19937_64 rng(spec.seed);
  std::vector<std::set<SynthProgram>> used(3);
  const std::pair<SynthSplit*, std::size_t> splits[] = {
      {&data.train, spec.train_samples}, {&data.val, spec.val_samples}, {&data.test, spec.test_samples}};
  const char* names[] = {"train", "val", "test"};
  for (std::size_t split = 0; split < 3; ++split) {
    auto [out, count] = splits[split];
    for (std::size_t i = 0; i < count; ++i) {
      SynthProgram p = draw_program(spec, rng);
      for (int attempt = 0; attempt < kRedraws; ++attempt) {
        bool taken = false;
        for (std::size_t other = 0; other < 3; ++other) taken = taken || (other != split && used[other].count(p));
        if (!taken) break;
        p = draw_program(spec, rng);
      }
      used[split].insert(p);
      char id[32];
      std::snprintf(id, sizeof id, "%s-%04zu", names[split], i);
      out->samples.push_back(render_sample(spec, p, id, rng));
      out->programs.push_back(std::move(p));
    }
  }
  return data;
}

void write_synth_dataset(const std::filesystem::path& dir, const SynthDataset& data) {
  const std::pair<const char*, const SynthSplit*> splits[] = {
      {"train.txt", &data.train}, {"val.txt", &data.val}, {"test.txt", &data.test}};
  for (auto [manifest, split] : splits) save_dataset(dir, manifest, Dataset{data.vocab, split->samples});
}

}  // namespace haca
