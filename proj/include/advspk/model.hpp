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

// Conv-LSTM backend: [Conv1D -> ReLU -> dropout -> max-pool]* followed
// by a stack of unidirectional LSTMs and two linear heads (depression logit,
// speaker scores) fed from the last time step of the top LSTM.
//
// All parameters live in one flat vector; named tensors are views into it.
// Gradients use the same layout, so optimizers and finite-difference checks
// work on plain vectors.

#ifndef ADVSPK_MODEL_HPP_
#define ADVSPK_MODEL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advspk/features.hpp"
#include "json.hpp"

namespace advspk {

struct Segment;

struct ConvSpec {
  int kernel = 3;
  int stride = 1;
  int out_channels = 128;

  bool operator==(const ConvSpec&) const = default;
};

struct ModelConfig {
  FeatureKind feature_kind = FeatureKind::kMel;
  int input_dims = 40;
  std::vector<ConvSpec> conv_layers;
  int lstm_layers = 1;
  int lstm_hidden = 128;
  double dropout_p = 0.05;
  int n_speakers = 2;
  int pool_kernel = 3;
  std::optional<std::string> preset_name;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// The six published configurations: daic-mel, daic-raw, daic-ssl,
// conv-mel, conv-raw, conv-ssl. input_dims defaults to 40 (mel), 1 (raw),
// 768 (daic-ssl) or 1024 (conv-ssl).
ModelConfig preset(std::string_view name, int n_speakers,
                   std::optional<int> input_dims = std::nullopt);
const std::vector<std::string>& preset_names();

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Sequence length after each conv+pool block, starting with the input
// length. Conv: floor((T - K) / S) + 1; pool: floor(T / pool_kernel).
// Throws ValidationError if any stage leaves fewer than one step.
std::vector<long> time_steps(const ModelConfig& config, long input_frames);

struct TensorInfo {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;

  Eigen::Index size() const { return rows * cols; }
};

struct ForwardOutput {
  double mdd_logit = 0.0;
  double p_mdd = 0.5;                      // sigmoid(mdd_logit)
  Eigen::VectorXd spk_scores;              // raw scores, length n_speakers
  std::vector<Eigen::MatrixXd> hidden_states;  // one [time x H] per LSTM layer
};

// Intermediates kept by a forward pass for backpropagation.
struct ForwardCache {
  struct Conv {
    Eigen::MatrixXd patches;      // [T' x K*Cin]
    Eigen::MatrixXd pre;          // [T' x Cout] before ReLU
    Eigen::MatrixXd dropout_mask; // empty when dropout is inactive
    std::vector<Eigen::Index> argmax;  // pooled row -> source row, per (t, c)
    Eigen::Index in_rows = 0;
  };
  struct Lstm {
    Eigen::MatrixXd input;  // [T x D]
    Eigen::MatrixXd i, f, g, o, c, tanh_c, h;  // [T x H]
  };
  std::vector<Conv> conv;
  std::vector<Lstm> lstm;
};

class Model {
 public:
  Model() = default;

  // Fan-in uniform initialization, deterministic per seed.
  static Model build(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  const TensorInfo& tensor(std::string_view name) const;

  Eigen::Map<Eigen::MatrixXd> view(const TensorInfo& t);
  Eigen::Map<const Eigen::MatrixXd> view(const TensorInfo& t) const;

  // [offset, offset + size) of the parameters used only by the speaker head.
  std::pair<Eigen::Index, Eigen::Index> speaker_head_range() const;

  // x is [frames x input_dims]. Dropout is applied only when train_mode is
  // set, in which case rng must be non-null if dropout_p > 0.
  ForwardOutput forward(const Eigen::MatrixXd& x, bool train_mode, std::mt19937_64* rng,
                        ForwardCache* cache = nullptr) const;

  // Accumulates into grad the parameter gradient of a loss whose partial
  // derivatives at the heads are d_logit (w.r.t. mdd_logit) and d_scores
  // (w.r.t. spk_scores). An empty d_scores detaches the speaker head.
  void backward(const ForwardOutput& out, const ForwardCache& cache, double d_logit,
                const Eigen::VectorXd& d_scores, Eigen::VectorXd& grad) const;

 private:
  void layout();

  ModelConfig config_;
  std::uint64_t seed_ = 0;
  Eigen::VectorXd params_;
  std::vector<TensorInfo> tensors_;
};

// Closed-form parameter count for a configuration.
Eigen::Index expected_parameter_count(const ModelConfig& config);

std::vector<ForwardOutput> forward(const Model& model, std::span<const Segment> batch,
                                   bool train_mode, std::mt19937_64* rng = nullptr);

// Binary container: magic line, JSON metadata (config, seed, tensor table),
// then little-endian float64 parameters.
void save_checkpoint(const std::filesystem::path& path, const Model& model);

// Rejects files whose stored config differs from `expected` when given.
Model load_checkpoint(const std::filesystem::path& path,
                      const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace advspk

#endif  // ADVSPK_MODEL_HPP_
