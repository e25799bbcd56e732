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

// Class separability of hidden representations.
//
//   S_W = (1/N) sum_i R_i                         (R_i: covariance of class i)
//   S_B = (1/N) sum_i (M_i - M_o)(M_i - M_o)^T    (M_o: mean of class means)
//   J   = trace[(S_W + S_B)^-1 S_B]               0 <= J <= d
//
// Covariances use population normalization. Both scatters are averaged over
// the N classes.

#ifndef ADVSPK_SEPARABILITY_HPP_
#define ADVSPK_SEPARABILITY_HPP_

#include <Eigen/Dense>
#include <span>
#include <string_view>
#include <vector>

namespace advspk {

class Model;
struct Segment;

struct LabeledVectors {
  std::vector<Eigen::VectorXd> vectors;
  std::vector<int> class_ids;  // parallel to vectors

  // Throws unless every class has >= 2 vectors of one common dimension.
  void validate() const;
  Eigen::Index dim() const { return vectors.empty() ? 0 : vectors.front().size(); }
};

enum class ClassKind { kSpeaker, kDepression };

std::string_view to_string(ClassKind kind);
ClassKind parse_class_kind(std::string_view name);

struct SeparabilityReport {
  std::vector<double> per_layer;
  double mean = 0.0;
  ClassKind class_kind = ClassKind::kSpeaker;
  int d = 0;
};

Eigen::MatrixXd scatter_within(const LabeledVectors& data);
Eigen::MatrixXd scatter_between(const LabeledVectors& data);

// Ridge eps*I with eps = 1e-8 * trace(S_W + S_B) / d is added when the
// condition number of S_W + S_B exceeds kMaxCondition.
inline constexpr double kMaxCondition = 1e12;
double j_ratio(const Eigen::MatrixXd& s_w, const Eigen::MatrixXd& s_b);
double j_ratio(const LabeledVectors& data);

// Time-mean of a [time x H] state sequence.
Eigen::VectorXd pool_hidden_states(const Eigen::MatrixXd& states);

// Eval-mode forward over the segments, time-mean pooling of each LSTM
// layer's states, one J per layer grouped by speaker_id or depression label.
SeparabilityReport layer_jratios(const Model& model, std::span<const Segment> segments,
                                 ClassKind class_kind);

}  // namespace advspk

#endif  // ADVSPK_SEPARABILITY_HPP_
