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

// Speaker-adversarial training.
//
// The trainer minimizes a single combined objective over every parameter
// (trunk and both heads):
//
//   L_total = L_MDD - lambda * L_SPK
//
// where L_MDD is binary cross-entropy on the depression probability and
// L_SPK is softmax cross-entropy on the raw speaker scores. Minimizing the
// negated speaker term means the speaker head and the shared trunk both
// ascend the speaker loss. lambda = 0 is the plain depression classifier.

#ifndef ADVSPK_ADVERSARIAL_HPP_
#define ADVSPK_ADVERSARIAL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advspk/model.hpp"
#include "advspk/segmentation.hpp"

namespace advspk {

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

// -(1/N) sum [y log p + (1 - y) log(1 - p)]
double loss_mdd(std::span<const double> p, std::span<const int> y);

// Mean over rows of -log softmax(scores.row(n))[spk[n]].
double loss_spk(const Eigen::MatrixXd& scores, std::span<const int> spk);

// l_mdd - lambda * l_spk
double loss_total(double l_mdd, double l_spk, double lambda);

enum class OptimizerKind { kSgd, kMomentum, kAdam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct AdversarialConfig {
  double lambda = 0.0;
  double learning_rate = 0.05;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double momentum = 0.9;  // kMomentum only

  void validate() const;
};

// kBaseline drops the speaker head from the backward pass entirely; its loss
// is still reported.
enum class Objective { kAdversarial, kBaseline };

struct EpochLosses {
  double mdd = 0.0;
  double spk = 0.0;
  double total = 0.0;

  bool operator==(const EpochLosses&) const = default;
};

// Held-out speakers have no speaker class, so the speaker terms are present
// only when at least one held-out segment belongs to a training speaker.
struct HeldOutLosses {
  double mdd = 0.0;
  std::optional<double> spk;
  std::optional<double> total;

  bool operator==(const HeldOutLosses&) const = default;
};

struct TrainHistory {
  std::vector<EpochLosses> train;
  std::vector<HeldOutLosses> valid;

  bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

// Weights of the two loss terms for a gradient evaluation. An empty `spk`
// detaches the speaker head (no gradient flows from it).
struct LossWeights {
  double mdd = 1.0;
  std::optional<double> spk;

  static LossWeights adversarial(double lambda) { return {1.0, -lambda}; }
  static LossWeights baseline() { return {1.0, std::nullopt}; }
  static LossWeights speaker_only() { return {0.0, 1.0}; }
};

struct BatchLoss {
  double mdd = 0.0;
  double spk = 0.0;
  std::size_t n = 0;
};

// Losses of a batch and the gradient of  w.mdd * L_MDD + w.spk * L_SPK.
// grad is overwritten. Segments must carry valid speaker indices.
BatchLoss batch_gradient(const Model& model, std::span<const Segment> batch,
                         const LossWeights& weights, bool train_mode, std::mt19937_64* rng,
                         Eigen::VectorXd& grad);

// Eval-mode losses without gradients.
HeldOutLosses evaluate_losses(const Model& model, std::span<const Segment> segments,
                              double lambda);

// Mini-batch training. When plan.use_balanced_subsample is set, the training
// set is first reduced to a class-balanced subset seeded by plan.seed;
// config.seed drives batch order and dropout.
// Throws RuntimeFailure on a non-finite loss or gradient.
TrainResult train(Model model, std::span<const Segment> train_segments,
                  std::span<const Segment> valid_segments, const AdversarialConfig& config,
                  const SamplingPlan& plan, Objective objective = Objective::kAdversarial);

struct UtteranceProbability {
  std::string utterance_id;
  double probability = 0.0;
  int truth = 0;
};

// Eval-mode depression probability for every segment.
std::vector<double> segment_probabilities(const Model& model, std::span<const Segment> segments);

// Per-segment probabilities averaged over models, then over each
// utterance's segments. Sorted by utterance_id.
std::vector<UtteranceProbability> ensemble_predict(std::span<const Model> models,
                                                   std::span<const Segment> segments);

}  // namespace advspk

#endif  // ADVSPK_ADVERSARIAL_HPP_
