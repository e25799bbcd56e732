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

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>
#include <gtest/gtest.h>

#include "advspk/corpus.hpp"
#include "advspk/error.hpp"
#include "advspk/synthgen.hpp"
#include "advspk/wav.hpp"
#include "test_util.hpp"

namespace advspk {
namespace {

using testing::TempDir;

// Peak of the Hann-windowed 1024-point power spectrum averaged over
// non-overlapping frames, in Hz.
double welch_peak_hz(const std::vector<double>& x) {
  const int n = 1024;
  Eigen::FFT<double> fft;
  std::vector<double> frame(n);
  std::vector<std::complex<double>> spec;
  std::vector<double> acc(n / 2 + 1, 0.0);
  for (std::size_t start = 0; start + n <= x.size(); start += n) {
    for (int i = 0; i < n; ++i) {
      frame[static_cast<std::size_t>(i)] =
          x[start + static_cast<std::size_t>(i)] * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n));
    }
    fft.fwd(spec, frame);
    for (int k = 0; k <= n / 2; ++k) acc[static_cast<std::size_t>(k)] += std::norm(spec[static_cast<std::size_t>(k)]);
  }
  const auto it = std::max_element(acc.begin() + 1, acc.end());
  return static_cast<double>(it - acc.begin()) * 16000.0 / n;
}

TEST(Synth, Deterministic) {
  const auto p = draw_speaker_profiles(4, 9);
  const auto a = synth_samples(p[1], true, 1.0, 77);
  const auto b = synth_samples(p[1], true, 1.0, 77);
  const auto c = synth_samples(p[1], true, 1.0, 78);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.size(), 16000u);
  const auto u = synth_utterance(p[1], true, 77);
  EXPECT_EQ(u.samples.size(), 8u * 16000u);
  EXPECT_EQ(u.depression_label, 1);
}

TEST(Synth, PeakNormalized) {
  const auto profiles = draw_speaker_profiles(12, 3);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto x = synth_samples(profiles[i], i % 2 == 0, 2.0, i);
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    EXPECT_LE(peak, 1.0);
    EXPECT_NEAR(peak, profiles[i].amplitude_scale, 1e-12);
  }
}

TEST(Synth, SpectralPeakAtF0) {
  const auto profiles = draw_speaker_profiles(16, 5);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (bool depressed : {false, true}) {
      const auto x = synth_samples(profiles[i], depressed, 4.0, 100 + i);
      EXPECT_LE(std::abs(welch_peak_hz(x) - profiles[i].f0), 15.625)
          << "f0 " << profiles[i].f0 << " depressed " << depressed;
    }
  }
}

TEST(Synth, ProfilesSeparatedAndInRange) {
  for (int n : {4, 16, 43, 100}) {
    const auto p = draw_speaker_profiles(n, static_cast<std::uint64_t>(n));
    std::vector<double> f0;
    for (const auto& s : p) {
      f0.push_back(s.f0);
      EXPECT_GE(s.amplitude_scale, 0.5);
      EXPECT_LE(s.amplitude_scale, 0.95);
      EXPECT_LT(s.resonance_freqs[0], s.resonance_freqs[1]);
    }
    std::sort(f0.begin(), f0.end());
    EXPECT_GE(f0.front(), 90.0);
    if (n <= 21) EXPECT_LE(f0.back(), 300.0);
    for (std::size_t i = 1; i < f0.size(); ++i) EXPECT_GE(f0[i] - f0[i - 1], 5.0 - 1e-9);
  }
}

TEST(SynthCorpus, SmallCorpusCounts) {
  TempDir dir;
  SynthCorpusConfig cfg;
  cfg.n_speakers = 4;
  cfg.utterances_per_speaker = 2;
  cfg.seed = 1;
  const auto c = synth_corpus(cfg, dir.path());
  EXPECT_EQ(c.manifest.records.size(), 8u);
  int wavs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "wav")) wavs += e.path().extension() == ".wav";
  EXPECT_EQ(wavs, 8);
  const Manifest m = load_manifest(c.manifest_path);
  EXPECT_EQ(m.records, c.manifest.records);
  for (const auto& r : m.records) {
    const auto info = read_wav_info(m.resolve_audio(r));
    EXPECT_EQ(info.sample_rate, 16000);
    EXPECT_EQ(info.bits_per_sample, 16);
  }
}

TEST(SynthCorpus, BalancedLabelsAndSplit) {
  TempDir dir;
  SynthCorpusConfig cfg;
  cfg.n_speakers = 16;
  cfg.utterances_per_speaker = 1;
  cfg.utterance_seconds = 7.68;
  cfg.seed = 2;
  const auto c = synth_corpus(cfg, dir.path());
  EXPECT_EQ(std::count(c.speaker_labels.begin(), c.speaker_labels.end(), 1), 8);
  int eval_d = 0, eval_nd = 0, train_d = 0, train_nd = 0;
  for (const auto& r : c.manifest.records) {
    if (r.partition == Partition::kEval) {
      (r.depression_label ? eval_d : eval_nd)++;
    } else {
      (r.depression_label ? train_d : train_nd)++;
    }
  }
  EXPECT_EQ(eval_d, 2);
  EXPECT_EQ(eval_nd, 2);
  EXPECT_EQ(train_d, 6);
  EXPECT_EQ(train_nd, 6);
}

TEST(SynthCorpus, LabelsIndependentOfF0) {
  TempDir dir;
  SynthCorpusConfig cfg;
  cfg.n_speakers = 100;
  cfg.utterances_per_speaker = 1;
  cfg.utterance_seconds = 7.68;
  cfg.seed = 3;
  const auto c = synth_corpus(cfg, dir.path());
  double mf = 0.0, ml = 0.0;
  for (int i = 0; i < 100; ++i) {
    mf += c.profiles[static_cast<std::size_t>(i)].f0 / 100.0;
    ml += c.speaker_labels[static_cast<std::size_t>(i)] / 100.0;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double dx = c.profiles[static_cast<std::size_t>(i)].f0 - mf;
    const double dy = c.speaker_labels[static_cast<std::size_t>(i)] - ml;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.3);
}

TEST(SynthCorpus, Validation) {
  TempDir dir;
  SynthCorpusConfig cfg;
  cfg.n_speakers = 3;
  EXPECT_THROW(synth_corpus(cfg, dir.path()), ValidationError);
  cfg = SynthCorpusConfig{};
  cfg.utterance_seconds = 5.0;
  EXPECT_THROW(synth_corpus(cfg, dir.path()), ValidationError);
  cfg = SynthCorpusConfig{};
  cfg.depressed_fraction = 1.0;
  EXPECT_THROW(synth_corpus(cfg, dir.path()), ValidationError);
}

}  // namespace
}  // namespace advspk
