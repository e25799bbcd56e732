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

#include "advspk/segmentation.hpp"

#include <algorithm>
#include <random>

#include "advspk/error.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "segmentation";

}  // namespace

long segment_length(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMel:
      return kMelSegmentFrames;
    case FeatureKind::kRaw:
      return kRawSegmentSamples;
    case FeatureKind::kSsl:
      return kSslSegmentFrames;
  }
  throw ValidationError(kModule, "unknown feature kind");
}

void SamplingPlan::validate() const {
  if (n_ensemble_models < 1) throw ValidationError(kModule, "n_ensemble_models must be >= 1");
}

std::vector<long> crop_offsets(std::span<const long> frame_counts, std::uint64_t seed) {
  if (frame_counts.empty()) throw ValidationError(kModule, "random_crop on an empty list");
  const long min_frames = *std::min_element(frame_counts.begin(), frame_counts.end());
  std::mt19937_64 rng(seed);
  std::vector<long> offsets;
  offsets.reserve(frame_counts.size());
  for (long frames : frame_counts) {
    std::uniform_int_distribution<long> pick(0, frames - min_frames);
    offsets.push_back(pick(rng));
  }
  return offsets;
}

std::vector<FeatureMatrix> random_crop(std::span<const FeatureMatrix> features,
                                       std::uint64_t seed) {
  if (features.empty()) throw ValidationError(kModule, "random_crop on an empty list");
  std::vector<long> counts;
  counts.reserve(features.size());
  for (const auto& f : features) counts.push_back(static_cast<long>(f.frames()));
  const long min_frames = *std::min_element(counts.begin(), counts.end());
  const std::vector<long> offsets = crop_offsets(counts, seed);

  std::vector<FeatureMatrix> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    FeatureMatrix m;
    m.kind = features[i].kind;
    m.frame_hop = features[i].frame_hop;
    m.utterance_id = features[i].utterance_id;
    m.values = features[i].values.middleRows(offsets[i], min_frames);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Segment> make_segments(const FeatureMatrix& m, const SegmentLabels& labels) {
  return make_segments(m, labels, segment_length(m.kind));
}

std::vector<Segment> make_segments(const FeatureMatrix& m, const SegmentLabels& labels,
                                   long seg_len) {
  if (seg_len < 1) throw ValidationError(kModule, "segment length must be positive");
  if (m.frames() < seg_len) {
    throw ValidationError(kModule, "'" + m.utterance_id + "' has " +
                                       std::to_string(m.frames()) +
                                       " frames, fewer than one segment of " +
                                       std::to_string(seg_len));
  }
  const long count = static_cast<long>(m.frames()) / seg_len;
  std::vector<Segment> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long s = 0; s < count; ++s) {
    Segment seg;
    seg.values = m.values.middleRows(s * seg_len, seg_len);
    seg.speaker_index = labels.speaker_index;
    seg.depression_label = labels.depression_label;
    seg.utterance_id = m.utterance_id;
    seg.speaker_id = labels.speaker_id;
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<std::size_t> balanced_subsample_indices(std::span<const int> labels,
                                                    std::uint64_t seed) {
  std::vector<std::size_t> dep, nondep;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      dep.push_back(i);
    } else if (labels[i] == 0) {
      nondep.push_back(i);
    } else {
      throw ValidationError(kModule, "non-binary depression label");
    }
  }
  if (dep.empty() || nondep.empty()) {
    throw ValidationError(kModule, "balanced sampling needs both classes (D=" +
                                       std::to_string(dep.size()) +
                                       ", ND=" + std::to_string(nondep.size()) + ")");
  }
  const std::size_t k = std::min(dep.size(), nondep.size());
  std::mt19937_64 rng(seed);
  std::shuffle(dep.begin(), dep.end(), rng);
  std::shuffle(nondep.begin(), nondep.end(), rng);
  std::vector<std::size_t> picked(dep.begin(), dep.begin() + static_cast<long>(k));
  picked.insert(picked.end(), nondep.begin(), nondep.begin() + static_cast<long>(k));
  std::shuffle(picked.begin(), picked.end(), rng);
  return picked;
}

std::vector<Segment> balanced_subsample(std::span<const Segment> segments, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(segments.size());
  for (const auto& s : segments) labels.push_back(s.depression_label);
  std::vector<Segment> out;
  for (std::size_t i : balanced_subsample_indices(labels, seed)) out.push_back(segments[i]);
  return out;
}

}  // namespace advspk
