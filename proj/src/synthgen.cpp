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

#include "advspk/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "advspk/error.hpp"
#include "advspk/segmentation.hpp"
#include "advspk/wav.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "synthgen";
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kVibratoRate = 5.0;  // Hz
constexpr double kAmDepth = 0.6;
constexpr double kNoiseStd = 0.02;
constexpr double kMaxHarmonicHz = 4000.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

double bump(double f, double center, double width) {
  const double z = (f - center) / width;
  return std::exp(-z * z);
}

std::string speaker_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%03d", i);
  return buf;
}

}  // namespace

void SynthCorpusConfig::validate() const {
  if (n_speakers < 4) throw ValidationError(kModule, "n_speakers must be >= 4");
  if (utterances_per_speaker < 1) {
    throw ValidationError(kModule, "utterances_per_speaker must be >= 1");
  }
  const double min_seconds = 2.0 * static_cast<double>(kRawSegmentSamples) / kSampleRate;
  if (utterance_seconds < min_seconds - 1e-9) {
    throw ValidationError(kModule, "utterance_seconds must be >= 7.68");
  }
  if (!(depressed_fraction > 0.0 && depressed_fraction < 1.0)) {
    throw ValidationError(kModule, "depressed_fraction must lie in (0, 1)");
  }
  if (!(eval_fraction >= 0.0 && eval_fraction < 1.0)) {
    throw ValidationError(kModule, "eval_fraction must lie in [0, 1)");
  }
}

std::vector<SynthSpeakerProfile> draw_speaker_profiles(int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError(kModule, "need >= 1 speaker");
  std::mt19937_64 rng(derive(seed, 0x70f1));
  const double lo = 90.0;
  const double hi = std::max(300.0, lo + 2.0 * kMinF0Separation * n);
  // Uniform points on the shrunken interval, sorted, then spread by the
  // minimum gap; yields sorted f0s with pairwise distance >= 5 Hz.
  const double free_span = (hi - lo) - kMinF0Separation * (n - 1);
  std::uniform_real_distribution<double> u(0.0, free_span);
  std::vector<double> f0(static_cast<std::size_t>(n));
  for (double& v : f0) v = u(rng);
  std::sort(f0.begin(), f0.end());
  for (int i = 0; i < n; ++i) f0[static_cast<std::size_t>(i)] += lo + kMinF0Separation * i;
  std::shuffle(f0.begin(), f0.end(), rng);

  std::uniform_real_distribution<double> r1(500.0, 1000.0);
  std::uniform_real_distribution<double> r2(1200.0, 2500.0);
  std::uniform_real_distribution<double> amp(0.5, 0.95);
  std::vector<SynthSpeakerProfile> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& p = out[static_cast<std::size_t>(i)];
    p.f0 = f0[static_cast<std::size_t>(i)];
    p.resonance_freqs = {r1(rng), r2(rng)};
    p.amplitude_scale = amp(rng);
  }
  return out;
}

std::vector<double> synth_samples(const SynthSpeakerProfile& profile, bool depressed,
                                  double seconds, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * kSampleRate));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::normal_distribution<double> noise(0.0, kNoiseStd);

  const double depth = depressed ? kDepressedVibratoDepth : kHealthyVibratoDepth;
  const double am_rate = depressed ? kDepressedAmRate : kHealthyAmRate;
  const double vib_phase = phase(rng);
  const double am_phase = phase(rng);

  const int n_harm = std::max(1, static_cast<int>(kMaxHarmonicHz / profile.f0));
  std::vector<double> amps(static_cast<std::size_t>(n_harm));
  std::vector<double> phases(static_cast<std::size_t>(n_harm));
  for (int k = 1; k <= n_harm; ++k) {
    const double f = k * profile.f0;
    amps[static_cast<std::size_t>(k - 1)] =
        (1.0 + 0.8 * bump(f, profile.resonance_freqs[0], 150.0) +
         0.6 * bump(f, profile.resonance_freqs[1], 250.0)) /
        k;
    phases[static_cast<std::size_t>(k - 1)] = phase(rng);
  }

  std::vector<double> out(n);
  const double dt = 1.0 / kSampleRate;
  // Closed-form phase of f0 * (1 + depth * sin(2 pi r t + phi)).
  const double vib_coeff = profile.f0 * depth / kVibratoRate;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double theta =
        kTwoPi * profile.f0 * t -
        vib_coeff * (std::cos(kTwoPi * kVibratoRate * t + vib_phase) - std::cos(vib_phase));
    double s = 0.0;
    for (int k = 0; k < n_harm; ++k) {
      s += amps[static_cast<std::size_t>(k)] *
           std::sin((k + 1) * theta + phases[static_cast<std::size_t>(k)]);
    }
    const double env = 1.0 + kAmDepth * std::sin(kTwoPi * am_rate * t + am_phase);
    out[i] = env * s + noise(rng);
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? std::min(profile.amplitude_scale, 1.0) / peak : 0.0;
  for (double& v : out) v *= scale;
  return out;
}

AudioUtterance synth_utterance(const SynthSpeakerProfile& profile, bool depressed,
                               std::uint64_t seed, double seconds) {
  AudioUtterance u;
  u.depression_label = depressed ? 1 : 0;
  u.samples = synth_samples(profile, depressed, seconds, seed);
  return u;
}

SynthCorpus synth_corpus(const SynthCorpusConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) throw RuntimeFailure(kModule, "cannot create " + (out_dir / "wav").string());

  SynthCorpus corpus;
  corpus.profiles = draw_speaker_profiles(config.n_speakers, config.seed);

  // Labels and partitions come from their own stream, independent of the
  // profile draws.
  std::mt19937_64 label_rng(derive(config.seed, 0x1abe1));
  std::vector<int> order(static_cast<std::size_t>(config.n_speakers));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), label_rng);
  const int n_dep = std::clamp(
      static_cast<int>(std::lround(config.depressed_fraction * config.n_speakers)), 1,
      config.n_speakers - 1);
  corpus.speaker_labels.assign(static_cast<std::size_t>(config.n_speakers), 0);
  for (int i = 0; i < n_dep; ++i) corpus.speaker_labels[static_cast<std::size_t>(order[i])] = 1;

  std::vector<Partition> partition(static_cast<std::size_t>(config.n_speakers), Partition::kTrain);
  for (int label : {0, 1}) {
    std::vector<int> members;
    for (int s = 0; s < config.n_speakers; ++s) {
      if (corpus.speaker_labels[static_cast<std::size_t>(s)] == label) members.push_back(s);
    }
    std::shuffle(members.begin(), members.end(), label_rng);
    const int n_class = static_cast<int>(members.size());
    int n_eval = static_cast<int>(std::lround(config.eval_fraction * n_class));
    if (config.eval_fraction > 0.0) n_eval = std::max(n_eval, 1);
    n_eval = std::min(n_eval, n_class - 1);
    for (int i = 0; i < n_eval; ++i) {
      partition[static_cast<std::size_t>(members[static_cast<std::size_t>(i)])] = Partition::kEval;
    }
  }

  Manifest& m = corpus.manifest;
  m.base_dir = out_dir;
  for (int s = 0; s < config.n_speakers; ++s) {
    const bool depressed = corpus.speaker_labels[static_cast<std::size_t>(s)] == 1;
    for (int u = 0; u < config.utterances_per_speaker; ++u) {
      UtteranceRecord r;
      r.speaker_id = speaker_name(s);
      char utt[16];
      std::snprintf(utt, sizeof(utt), "_u%02d", u);
      r.utterance_id = r.speaker_id + utt;
      r.audio_path = std::filesystem::path("wav") / (r.utterance_id + ".wav");
      r.depression_label = depressed ? 1 : 0;
      r.partition = partition[static_cast<std::size_t>(s)];
      const auto samples =
          synth_samples(corpus.profiles[static_cast<std::size_t>(s)], depressed,
                        config.utterance_seconds,
                        derive(config.seed, static_cast<std::uint64_t>(s) + 1,
                               static_cast<std::uint64_t>(u) + 1));
      write_wav(out_dir / r.audio_path, samples);
      m.records.push_back(std::move(r));
    }
  }
  validate_manifest(m);
  corpus.manifest_path = out_dir / "manifest.csv";
  write_manifest(corpus.manifest_path, m);
  return corpus;
}

}  // namespace advspk
