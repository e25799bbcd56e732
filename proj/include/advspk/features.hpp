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

// Feature front-ends: log mel-spectrograms, raw sample streams and
// precomputed self-supervised hidden states (".ftr" files).

#ifndef ADVSPK_FEATURES_HPP_
#define ADVSPK_FEATURES_HPP_

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace advspk {

enum class FeatureKind { kMel, kRaw, kSsl };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view name);

// One participant recording.
struct AudioUtterance {
  std::string utterance_id;
  std::string speaker_id;
  int depression_label = 0;
  std::vector<double> samples;  // 16 kHz
};

// Rows are frames, columns are feature dimensions.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  FeatureKind kind = FeatureKind::kMel;
  int frame_hop = 512;  // samples per frame step
  std::string utterance_id;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index dims() const { return values.cols(); }
};

struct MelConfig {
  int n_mels = 40;
  int window_length = 1024;  // Hann window, 64 ms
  int hop_length = 512;      // 32 ms
  int sample_rate = 16000;
  double log_floor = 1e-10;

  void validate() const;
};

inline constexpr int kRawHop = 1;
inline constexpr int kSslNominalHop = 320;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Centre frequencies (Hz) of the triangular filters, ascending.
std::vector<double> mel_center_frequencies(const MelConfig& config);

// [n_mels x (window_length/2 + 1)] triangular filters, equally spaced on the
// mel scale between 0 Hz and Nyquist.
Eigen::MatrixXd mel_filterbank(const MelConfig& config);

// frames = floor(L / hop); the signal is end-padded with (window - hop) zeros.
FeatureMatrix extract_mel(const AudioUtterance& utterance, const MelConfig& config = {});

FeatureMatrix prepare_raw(const AudioUtterance& utterance);

// Reads "<feature_dir>/<utterance_id>.ftr"; dims must be 768 or 1024.
FeatureMatrix load_ssl_features(const std::string& utterance_id,
                                const std::filesystem::path& feature_dir);

// Generic .ftr I/O. The first line is "frames dims feature_kind", followed by
// one whitespace-separated row per frame.
FeatureMatrix read_ftr(const std::filesystem::path& path);
void write_ftr(const std::filesystem::path& path, const FeatureMatrix& m);

// Per-utterance, per-dimension z-scoring with population variance. Columns
// with variance below 1e-12 become zero.
FeatureMatrix mean_variance_normalize(const FeatureMatrix& m);

}  // namespace advspk

#endif  // ADVSPK_FEATURES_HPP_
