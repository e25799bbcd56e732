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

#include "advspk/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "advspk/error.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "adversarial";

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

// -log softmax(row)[target] via log-sum-exp.
double nll_row(const Eigen::Ref<const Eigen::VectorXd>& scores, int target) {
  const double m = scores.maxCoeff();
  const double lse = m + std::log((scores.array() - m).exp().sum());
  return lse - scores(target);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  const double m = scores.maxCoeff();
  Eigen::VectorXd e = (scores.array() - m).exp().matrix();
  return e / e.sum();
}

class Optimizer {
 public:
  Optimizer(const AdversarialConfig& c, Eigen::Index n) : config_(c) {
    if (c.optimizer != OptimizerKind::kSgd) velocity_ = Eigen::VectorXd::Zero(n);
    if (c.optimizer == OptimizerKind::kAdam) second_ = Eigen::VectorXd::Zero(n);
  }

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    const double lr = config_.learning_rate;
    switch (config_.optimizer) {
      case OptimizerKind::kSgd:
        params.noalias() -= lr * grad;
        break;
      case OptimizerKind::kMomentum:
        velocity_ = config_.momentum * velocity_ + grad;
        params.noalias() -= lr * velocity_;
        break;
      case OptimizerKind::kAdam: {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++t_;
        velocity_ = b1 * velocity_ + (1.0 - b1) * grad;
        second_ = b2 * second_ + (1.0 - b2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(b1, t_);
        const double c2 = 1.0 - std::pow(b2, t_);
        params.array() -=
            lr * (velocity_.array() / c1) / ((second_.array() / c2).sqrt() + eps);
        break;
      }
    }
  }

 private:
  AdversarialConfig config_;
  Eigen::VectorXd velocity_;
  Eigen::VectorXd second_;
  int t_ = 0;
};

}  // namespace

double loss_mdd(std::span<const double> p, std::span<const int> y) {
  if (p.size() != y.size() || p.empty()) {
    throw ValidationError(kModule, "loss_mdd needs equal, non-zero lengths");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      throw ValidationError(kModule, "probability outside [0, 1]: " + std::to_string(p[i]));
    }
    if (y[i] != 0 && y[i] != 1) throw ValidationError(kModule, "non-binary depression label");
    const double q = clamp_prob(p[i]);
    sum += y[i] == 1 ? std::log(q) : std::log(1.0 - q);
  }
  return -sum / static_cast<double>(p.size());
}

double loss_spk(const Eigen::MatrixXd& scores, std::span<const int> spk) {
  if (scores.rows() != static_cast<Eigen::Index>(spk.size()) || spk.empty()) {
    throw ValidationError(kModule, "loss_spk needs one speaker index per score row");
  }
  if (scores.cols() < 2) throw ValidationError(kModule, "loss_spk needs >= 2 speakers");
  double sum = 0.0;
  for (Eigen::Index n = 0; n < scores.rows(); ++n) {
    const int target = spk[static_cast<std::size_t>(n)];
    if (target < 0 || target >= scores.cols()) {
      throw ValidationError(kModule, "speaker index " + std::to_string(target) +
                                         " out of range [0, " + std::to_string(scores.cols()) +
                                         ")");
    }
    sum += nll_row(scores.row(n).transpose(), target);
  }
  return sum / static_cast<double>(spk.size());
}

double loss_total(double l_mdd, double l_spk, double lambda) { return l_mdd - lambda * l_spk; }

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd:
      return "sgd";
    case OptimizerKind::kMomentum:
      return "momentum";
    case OptimizerKind::kAdam:
      return "adam";
  }
  return "unknown";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "momentum") return OptimizerKind::kMomentum;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ValidationError(kModule, "unknown optimizer '" + std::string(name) + "'");
}

void AdversarialConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError(kModule, "lambda must be a finite value >= 0");
  }
  if (!(learning_rate > 0.0)) throw ValidationError(kModule, "learning_rate must be positive");
  if (epochs < 1) throw ValidationError(kModule, "epochs must be >= 1");
  if (batch_size < 1) throw ValidationError(kModule, "batch_size must be >= 1");
}

BatchLoss batch_gradient(const Model& model, std::span<const Segment> batch,
                         const LossWeights& weights, bool train_mode, std::mt19937_64* rng,
                         Eigen::VectorXd& grad) {
  grad = Eigen::VectorXd::Zero(model.parameter_count());
  BatchLoss loss;
  loss.n = batch.size();
  if (batch.empty()) return loss;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const int n_spk = model.config().n_speakers;

  ForwardCache cache;
  Eigen::VectorXd d_scores;
  for (const Segment& seg : batch) {
    if (seg.speaker_index < 0 || seg.speaker_index >= n_spk) {
      throw ValidationError(kModule, "segment of '" + seg.utterance_id +
                                         "' has no training speaker index");
    }
    const ForwardOutput out = model.forward(seg.values, train_mode, rng, &cache);
    const double p = out.p_mdd;
    const double q = clamp_prob(p);
    loss.mdd -= seg.depression_label == 1 ? std::log(q) : std::log(1.0 - q);
    loss.spk += nll_row(out.spk_scores, seg.speaker_index);

    // d/dz of BCE(sigmoid(z)) is p - y; zero where the clamp is active.
    const double d_logit = (p == q) ? weights.mdd * (p - seg.depression_label) * inv_b : 0.0;
    if (weights.spk) {
      d_scores = softmax(out.spk_scores);
      d_scores(seg.speaker_index) -= 1.0;
      d_scores *= *weights.spk * inv_b;
    } else {
      d_scores.resize(0);
    }
    model.backward(out, cache, d_logit, d_scores, grad);
  }
  loss.mdd *= inv_b;
  loss.spk *= inv_b;
  return loss;
}

HeldOutLosses evaluate_losses(const Model& model, std::span<const Segment> segments,
                              double lambda) {
  HeldOutLosses r;
  if (segments.empty()) return r;
  double mdd = 0.0, spk = 0.0;
  std::size_t n_spk = 0;
  for (const Segment& seg : segments) {
    const ForwardOutput out = model.forward(seg.values, false, nullptr);
    const double q = clamp_prob(out.p_mdd);
    mdd -= seg.depression_label == 1 ? std::log(q) : std::log(1.0 - q);
    if (seg.speaker_index >= 0 && seg.speaker_index < model.config().n_speakers) {
      spk += nll_row(out.spk_scores, seg.speaker_index);
      ++n_spk;
    }
  }
  r.mdd = mdd / static_cast<double>(segments.size());
  if (n_spk > 0) {
    r.spk = spk / static_cast<double>(n_spk);
    r.total = loss_total(r.mdd, *r.spk, lambda);
  }
  return r;
}

TrainResult train(Model model, std::span<const Segment> train_segments,
                  std::span<const Segment> valid_segments, const AdversarialConfig& config,
                  const SamplingPlan& plan, Objective objective) {
  config.validate();
  plan.validate();
  if (train_segments.empty()) throw ValidationError(kModule, "no training segments");
  {
    std::vector<int> speakers;
    bool has_d = false, has_nd = false;
    for (const auto& s : train_segments) {
      speakers.push_back(s.speaker_index);
      has_d |= s.depression_label == 1;
      has_nd |= s.depression_label == 0;
    }
    std::sort(speakers.begin(), speakers.end());
    if (std::unique(speakers.begin(), speakers.end()) - speakers.begin() < 2 || !has_d || !has_nd) {
      throw ValidationError(kModule,
                            "training needs segments from >= 2 speakers and both classes");
    }
  }

  std::vector<std::size_t> pool;
  if (plan.use_balanced_subsample) {
    std::vector<int> labels;
    for (const auto& s : train_segments) labels.push_back(s.depression_label);
    pool = balanced_subsample_indices(labels, plan.seed);
  } else {
    pool.resize(train_segments.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
  }

  const LossWeights weights = objective == Objective::kAdversarial
                                  ? LossWeights::adversarial(config.lambda)
                                  : LossWeights::baseline();
  std::mt19937_64 rng(config.seed);
  Optimizer optimizer(config, model.parameter_count());
  TrainHistory history;
  Eigen::VectorXd grad;
  std::vector<Segment> batch;
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(pool.begin(), pool.end(), rng);
    double sum_mdd = 0.0, sum_spk = 0.0;
    for (std::size_t start = 0; start < pool.size(); start += batch_size) {
      const std::size_t end = std::min(pool.size(), start + batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(train_segments[pool[k]]);
      const BatchLoss bl = batch_gradient(model, batch, weights, true, &rng, grad);
      if (!std::isfinite(bl.mdd) || !std::isfinite(bl.spk) || !grad.allFinite()) {
        throw RuntimeFailure(kModule, "training diverged at epoch " + std::to_string(epoch) +
                                          ", batch starting at " + std::to_string(start) +
                                          " (L_MDD=" + std::to_string(bl.mdd) +
                                          ", L_SPK=" + std::to_string(bl.spk) + ")");
      }
      optimizer.step(model.parameters(), grad);
      sum_mdd += bl.mdd * static_cast<double>(bl.n);
      sum_spk += bl.spk * static_cast<double>(bl.n);
    }
    EpochLosses e;
    e.mdd = sum_mdd / static_cast<double>(pool.size());
    e.spk = sum_spk / static_cast<double>(pool.size());
    e.total = loss_total(e.mdd, e.spk, objective == Objective::kAdversarial ? config.lambda : 0.0);
    history.train.push_back(e);
    history.valid.push_back(evaluate_losses(model, valid_segments, config.lambda));
  }
  return {std::move(model), std::move(history)};
}

std::vector<double> segment_probabilities(const Model& model, std::span<const Segment> segments) {
  std::vector<double> p;
  p.reserve(segments.size());
  for (const auto& s : segments) p.push_back(model.forward(s.values, false, nullptr).p_mdd);
  return p;
}

std::vector<UtteranceProbability> ensemble_predict(std::span<const Model> models,
                                                   std::span<const Segment> segments) {
  if (models.empty()) throw ValidationError(kModule, "ensemble_predict needs >= 1 model");
  const FeatureKind kind = models.front().config().feature_kind;
  for (const auto& m : models) {
    if (m.config().feature_kind != kind) {
      throw ValidationError(kModule, "ensemble members disagree on feature kind");
    }
  }
  std::vector<double> seg_mean(segments.size(), 0.0);
  for (const auto& m : models) {
    const std::vector<double> p = segment_probabilities(m, segments);
    for (std::size_t i = 0; i < p.size(); ++i) seg_mean[i] += p[i];
  }
  for (double& v : seg_mean) v /= static_cast<double>(models.size());

  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
    int truth = 0;
  };
  std::map<std::string, Acc> by_utt;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    Acc& a = by_utt[segments[i].utterance_id];
    a.sum += seg_mean[i];
    ++a.n;
    a.truth = segments[i].depression_label;
  }
  std::vector<UtteranceProbability> out;
  out.reserve(by_utt.size());
  for (const auto& [id, a] : by_utt) {
    out.push_back({id, a.sum / static_cast<double>(a.n), a.truth});
  }
  return out;
}

}  // namespace advspk
