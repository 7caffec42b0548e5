// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "haca/dataset.hpp"

namespace haca {

// Generator settings for the synthetic audio-visual captioning task.
//
// A latent program is one modifier and 2-4 events. Each event is rendered
// into the visual stream as a segment of repeated one-hot frames; the
// modifier is rendered the same way into the audio stream only. The caption
// is "mod<m> evt<e1> ... evt<ek>".
struct SynthSpec {
  std::size_t train_samples = 512;
  std::size_t val_samples = 128;
  std::size_t test_samples = 128;
  std::size_t events = 4;     // E
  std::size_t modifiers = 3;  // M
  std::size_t visual_dim = 8;
  std::size_t audio_dim = 4;
  double sigma = 0.05;
  std::size_t min_events = 2;
  std::size_t max_events = 4;
  std::size_t min_segment = 2;  // visual frames per event
  std::size_t max_segment = 4;
  std::size_t min_audio = 4;  // audio frames
  std::size_t max_audio = 8;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t program_count() const;
};

struct SynthProgram {
  int modifier = 0;
  std::vector<int> events;
  bool operator==(const SynthProgram&) const = default;
  auto operator<=>(const SynthProgram&) const = default;
};

struct SynthSplit {
  std::vector<Sample> samples;
  std::vector<SynthProgram> programs;  // parallel to samples
};

struct SynthDataset {
  Vocabulary vocab;
  SynthSplit train, val, test;
};

// Word ids: modifiers first, then events.
int modifier_word(std::size_t modifier);
int event_word(std::size_t modifiers, std::size_t event);

// Deterministic in `spec.seed`. Splits are disjoint by program unless the
// program space is too small.
SynthDataset synth_dataset(const SynthSpec& spec);

// vocab.txt, train.txt, val.txt, test.txt plus feature and caption files.
void write_synth_dataset(const std::filesystem::path& dir, const SynthDataset& data);

}  // namespace haca
