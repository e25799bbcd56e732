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

#include "advspk/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "advspk/error.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "evaluation";

void check_binary(std::span<const int> labels, const char* what) {
  for (int v : labels) {
    if (v != 0 && v != 1) {
      throw ValidationError(kModule, std::string(what) + " contains non-binary label " +
                                         std::to_string(v));
    }
  }
}

// Returns (f1, undefined).
std::pair<double, bool> f1_for(std::span<const int> pred, std::span<const int> truth,
                               int positive) {
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == positive;
    const bool t = truth[i] == positive;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  const long denom = 2 * tp + fp + fn;
  if (denom == 0) return {0.0, true};
  return {2.0 * static_cast<double>(tp) / static_cast<double>(denom), false};
}

}  // namespace

F1Scores f1_scores(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw ValidationError(kModule, "prediction/truth length mismatch (" +
                                       std::to_string(pred.size()) + " vs " +
                                       std::to_string(truth.size()) + ")");
  }
  if (pred.empty()) throw ValidationError(kModule, "empty prediction set");
  check_binary(pred, "predictions");
  check_binary(truth, "truth");

  F1Scores s;
  std::tie(s.f1_nd, s.nd_undefined) = f1_for(pred, truth, 0);
  std::tie(s.f1_d, s.d_undefined) = f1_for(pred, truth, 1);
  s.f1_avg = (s.f1_nd + s.f1_d) / 2.0;
  return s;
}

double mcnemar_exact(int b, int c) {
  if (b < 0 || c < 0) throw ValidationError(kModule, "negative discordant count");
  const int n = b + c;
  if (n == 0) return 1.0;
  const int k_max = std::min(b, c);
  // Sum of C(n, k) 0.5^n in log space; stays finite for large n.
  const double log_half_n = -n * std::numbers::ln2;
  const double lg_n1 = std::lgamma(n + 1.0);
  double tail = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    tail += std::exp(lg_n1 - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + log_half_n);
  }
  return std::min(1.0, 2.0 * tail);
}

double mcnemar_test(std::span<const int> pred_a, std::span<const int> pred_b,
                    std::span<const int> truth) {
  if (pred_a.size() != truth.size() || pred_b.size() != truth.size()) {
    throw ValidationError(kModule, "McNemar inputs differ in length");
  }
  check_binary(pred_a, "pred_a");
  check_binary(pred_b, "pred_b");
  check_binary(truth, "truth");
  int b = 0, c = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool a_ok = pred_a[i] == truth[i];
    const bool b_ok = pred_b[i] == truth[i];
    b += a_ok && !b_ok;
    c += !a_ok && b_ok;
  }
  return mcnemar_exact(b, c);
}

std::vector<int> utterance_labels(std::span<const double> probs, double threshold) {
  std::vector<int> labels(probs.size());
  std::transform(probs.begin(), probs.end(), labels.begin(),
                 [threshold](double p) { return p >= threshold ? 1 : 0; });
  return labels;
}

EvaluationReport evaluate(std::span<const int> pred, std::span<const int> truth,
                          double threshold) {
  const F1Scores s = f1_scores(pred, truth);
  EvaluationReport r;
  r.f1_nd = s.f1_nd;
  r.f1_d = s.f1_d;
  r.f1_avg = s.f1_avg;
  r.n_eval = static_cast<int>(pred.size());
  r.threshold = threshold;
  return r;
}

}  // namespace advspk
