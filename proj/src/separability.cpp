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

#include "advspk/separability.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "advspk/error.hpp"
#include "advspk/model.hpp"
#include "advspk/segmentation.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "separability";

struct ClassStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Per-class mean and population covariance, ordered by class id.
std::vector<ClassStats> class_stats(const LabeledVectors& data) {
  data.validate();
  std::map<int, std::vector<const Eigen::VectorXd*>> groups;
  for (std::size_t i = 0; i < data.vectors.size(); ++i) {
    groups[data.class_ids[i]].push_back(&data.vectors[i]);
  }
  const Eigen::Index d = data.dim();
  std::vector<ClassStats> out;
  for (const auto& [id, members] : groups) {
    ClassStats s;
    s.mean = Eigen::VectorXd::Zero(d);
    for (const auto* v : members) s.mean += *v;
    s.mean /= static_cast<double>(members.size());
    s.cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto* v : members) {
      const Eigen::VectorXd dv = *v - s.mean;
      s.cov.noalias() += dv * dv.transpose();
    }
    s.cov /= static_cast<double>(members.size());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void LabeledVectors::validate() const {
  if (vectors.size() != class_ids.size()) {
    throw ValidationError(kModule, "vectors and class ids differ in length");
  }
  if (vectors.empty()) throw ValidationError(kModule, "no vectors");
  const Eigen::Index d = dim();
  if (d < 1) throw ValidationError(kModule, "zero-dimensional vectors");
  std::map<int, int> counts;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != d) throw ValidationError(kModule, "vectors differ in dimension");
    if (!vectors[i].allFinite()) throw ValidationError(kModule, "non-finite vector");
    ++counts[class_ids[i]];
  }
  for (const auto& [id, n] : counts) {
    if (n < 2) {
      throw ValidationError(kModule, "class " + std::to_string(id) + " has " + std::to_string(n) +
                                         " vector(s); covariance needs >= 2");
    }
  }
}

std::string_view to_string(ClassKind kind) {
  return kind == ClassKind::kSpeaker ? "speaker" : "depression";
}

ClassKind parse_class_kind(std::string_view name) {
  if (name == "speaker") return ClassKind::kSpeaker;
  if (name == "depression") return ClassKind::kDepression;
  throw ValidationError(kModule, "unknown class kind '" + std::string(name) + "'");
}

Eigen::MatrixXd scatter_within(const LabeledVectors& data) {
  const auto stats = class_stats(data);
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(data.dim(), data.dim());
  for (const auto& s : stats) sw += s.cov;
  sw /= static_cast<double>(stats.size());
  return (sw + sw.transpose()) / 2.0;
}

Eigen::MatrixXd scatter_between(const LabeledVectors& data) {
  const auto stats = class_stats(data);
  const Eigen::Index d = data.dim();
  Eigen::VectorXd grand = Eigen::VectorXd::Zero(d);
  for (const auto& s : stats) grand += s.mean;
  grand /= static_cast<double>(stats.size());
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : stats) {
    const Eigen::VectorXd dm = s.mean - grand;
    sb.noalias() += dm * dm.transpose();
  }
  sb /= static_cast<double>(stats.size());
  return (sb + sb.transpose()) / 2.0;
}

double j_ratio(const Eigen::MatrixXd& s_w, const Eigen::MatrixXd& s_b) {
  if (s_w.rows() != s_w.cols() || s_b.rows() != s_b.cols() || s_w.rows() != s_b.rows() ||
      s_w.rows() == 0) {
    throw ValidationError(kModule, "scatter matrices must be square and of equal size");
  }
  if (!s_w.allFinite() || !s_b.allFinite()) {
    throw ValidationError(kModule, "non-finite scatter matrix");
  }
  const Eigen::Index d = s_w.rows();
  if (s_b.isZero(0.0)) return 0.0;

  Eigen::MatrixXd total = s_w + s_b;
  total = (total + total.transpose()) / 2.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(total, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    const double eps = 1e-8 * total.trace() / static_cast<double>(d);
    total.diagonal().array() += eps;
  }
  const Eigen::MatrixXd x = total.ldlt().solve(s_b);
  const double j = x.trace();
  return std::clamp(j, 0.0, static_cast<double>(d));
}

double j_ratio(const LabeledVectors& data) {
  return j_ratio(scatter_within(data), scatter_between(data));
}

Eigen::VectorXd pool_hidden_states(const Eigen::MatrixXd& states) {
  if (states.rows() < 1) throw ValidationError(kModule, "empty hidden-state sequence");
  return states.colwise().mean().transpose();
}

SeparabilityReport layer_jratios(const Model& model, std::span<const Segment> segments,
                                 ClassKind class_kind) {
  const int n_layers = model.config().lstm_layers;
  std::vector<LabeledVectors> per_layer(static_cast<std::size_t>(n_layers));
  std::map<std::string, int> speaker_ids;
  for (const auto& s : segments) speaker_ids.emplace(s.speaker_id, 0);
  int next = 0;
  for (auto& [name, id] : speaker_ids) id = next++;

  for (const auto& s : segments) {
    const ForwardOutput out = model.forward(s.values, false, nullptr);
    const int cls = class_kind == ClassKind::kSpeaker ? speaker_ids.at(s.speaker_id)
                                                      : s.depression_label;
    for (int l = 0; l < n_layers; ++l) {
      auto& lv = per_layer[static_cast<std::size_t>(l)];
      lv.vectors.push_back(pool_hidden_states(out.hidden_states[static_cast<std::size_t>(l)]));
      lv.class_ids.push_back(cls);
    }
  }
  std::set<int> classes;
  for (int id : per_layer.front().class_ids) classes.insert(id);
  const std::size_t n_classes = classes.size();
  if (n_classes < 2) {
    throw ValidationError(kModule, std::string("J-ratio needs >= 2 ") +
                                       std::string(to_string(class_kind)) + " classes");
  }

  SeparabilityReport report;
  report.class_kind = class_kind;
  report.d = model.config().lstm_hidden;
  for (const auto& lv : per_layer) report.per_layer.push_back(j_ratio(lv));
  double sum = 0.0;
  for (double j : report.per_layer) sum += j;
  report.mean = sum / static_cast<double>(report.per_layer.size());
  return report;
}

}  // namespace advspk
