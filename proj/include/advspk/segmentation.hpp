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

// Random cropping, fixed-length segmenting and class-balanced subsampling of
// training material. Segments are 3.84 s: 120 mel frames, 61440 raw samples
// or 200 SSL frames.

#ifndef ADVSPK_SEGMENTATION_HPP_
#define ADVSPK_SEGMENTATION_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advspk/features.hpp"

namespace advspk {

inline constexpr long kMelSegmentFrames = 120;
inline constexpr long kRawSegmentSamples = 61440;
inline constexpr long kSslSegmentFrames = 200;

long segment_length(FeatureKind kind);

struct Segment {
  Eigen::MatrixXd values;  // [seg_len x dims]
  int speaker_index = -1;  // class in [0, N_train) for train speakers, else -1
  int depression_label = 0;
  std::string utterance_id;
  std::string speaker_id;
};

// Labels attached to a FeatureMatrix when it is cut into segments.
struct SegmentLabels {
  int speaker_index = -1;
  int depression_label = 0;
  std::string speaker_id;
};

struct SamplingPlan {
  bool use_random_crop = false;
  bool use_balanced_subsample = false;
  int n_ensemble_models = 1;
  std::uint64_t seed = 0;

  static SamplingPlan daic_style(std::uint64_t seed = 0) { return {true, true, 5, seed}; }
  static SamplingPlan converge_style(std::uint64_t seed = 0) { return {false, false, 1, seed}; }

  void validate() const;
};

// Crops every matrix to the global minimum frame count with a uniformly drawn
// contiguous window.
std::vector<FeatureMatrix> random_crop(std::span<const FeatureMatrix> features,
                                       std::uint64_t seed);

// Crop offsets drawn by random_crop for the given frame counts.
std::vector<long> crop_offsets(std::span<const long> frame_counts, std::uint64_t seed);

// Non-overlapping segments from frame 0; the remainder is dropped.
std::vector<Segment> make_segments(const FeatureMatrix& m, const SegmentLabels& labels);
std::vector<Segment> make_segments(const FeatureMatrix& m, const SegmentLabels& labels,
                                   long seg_len);

// k = min(#D, #ND) segments of each class, drawn without replacement and
// returned in shuffled order.
std::vector<Segment> balanced_subsample(std::span<const Segment> segments, std::uint64_t seed);

// Index form of balanced_subsample, for callers that avoid copying.
std::vector<std::size_t> balanced_subsample_indices(std::span<const int> labels,
                                                    std::uint64_t seed);

}  // namespace advspk

#endif  // ADVSPK_SEGMENTATION_HPP_
