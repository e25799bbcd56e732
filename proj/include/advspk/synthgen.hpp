/* Copyright 2026 The advspk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Synthetic labeled corpus with independent speaker and depression cues.
//
// Speaker identity lives in static spectral structure: the fundamental f0,
// two resonance bands shaping the harmonic amplitudes, and loudness.
// The depression cue lives in modulation dynamics: depressed speakers get
// shallow vibrato (1 % of f0) and slow amplitude modulation (1 Hz); others
// get 6 % vibrato and 4 Hz modulation.

#ifndef ADVSPK_SYNTHGEN_HPP_
#define ADVSPK_SYNTHGEN_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "advspk/corpus.hpp"
#include "advspk/features.hpp"

namespace advspk {

struct SynthSpeakerProfile {
  double f0 = 150.0;                              // Hz
  std::array<double, 2> resonance_freqs{700.0, 1800.0};  // Hz
  double amplitude_scale = 0.8;                   // output peak
};

struct SynthCorpusConfig {
  int n_speakers = 16;
  int utterances_per_speaker = 4;
  double utterance_seconds = 8.0;
  double depressed_fraction = 0.5;
  // Share of speakers (per class) held out for evaluation.
  double eval_fraction = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr double kDepressedVibratoDepth = 0.01;
inline constexpr double kHealthyVibratoDepth = 0.06;
inline constexpr double kDepressedAmRate = 1.0;  // Hz
inline constexpr double kHealthyAmRate = 4.0;    // Hz
inline constexpr double kMinF0Separation = 5.0;  // Hz

// Speaker profiles with pairwise f0 distance >= 5 Hz. f0 spans 90-300 Hz,
// widened upwards when n is too large to fit.
std::vector<SynthSpeakerProfile> draw_speaker_profiles(int n, std::uint64_t seed);

std::vector<double> synth_samples(const SynthSpeakerProfile& profile, bool depressed,
                                  double seconds, std::uint64_t seed);

AudioUtterance synth_utterance(const SynthSpeakerProfile& profile, bool depressed,
                               std::uint64_t seed, double seconds = 8.0);

struct SynthCorpus {
  Manifest manifest;
  std::vector<SynthSpeakerProfile> profiles;  // by speaker number
  std::vector<int> speaker_labels;            // by speaker number
  std::filesystem::path manifest_path;
};

// Writes "<out_dir>/wav/<utterance_id>.wav" and "<out_dir>/manifest.csv".
// Depression labels are assigned per speaker by a permutation drawn
// independently of the profiles; train/eval is split by speaker with an
// equal number of held-out speakers from each class.
SynthCorpus synth_corpus(const SynthCorpusConfig& config, const std::filesystem::path& out_dir);

}  // namespace advspk

#endif  // ADVSPK_SYNTHGEN_HPP_
