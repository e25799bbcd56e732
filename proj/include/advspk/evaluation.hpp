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

#ifndef ADVSPK_EVALUATION_HPP_
#define ADVSPK_EVALUATION_HPP_

#include <optional>
#include <span>
#include <vector>

namespace advspk {

struct F1Scores {
  double f1_nd = 0.0;  // class 0 as positive
  double f1_d = 0.0;   // class 1 as positive
  double f1_avg = 0.0;
  // Set when a class appears in neither predictions nor truth; its F1 is 0.
  bool nd_undefined = false;
  bool d_undefined = false;
};

struct EvaluationReport {
  double f1_nd = 0.0;
  double f1_d = 0.0;
  double f1_avg = 0.0;
  int n_eval = 0;
  double threshold = 0.5;
  std::optional<double> mcnemar_p;
};

// F1 = 2TP / (2TP + FP + FN), per class.
F1Scores f1_scores(std::span<const int> pred, std::span<const int> truth);

// Exact two-sided McNemar test on the discordant counts.
// b: A right and B wrong, c: A wrong and B right.
double mcnemar_exact(int b, int c);
double mcnemar_test(std::span<const int> pred_a, std::span<const int> pred_b,
                    std::span<const int> truth);

// label = 1 iff probability >= threshold.
std::vector<int> utterance_labels(std::span<const double> probs, double threshold = 0.5);

EvaluationReport evaluate(std::span<const int> pred, std::span<const int> truth,
                          double threshold = 0.5);

}  // namespace advspk

#endif  // ADVSPK_EVALUATION_HPP_
