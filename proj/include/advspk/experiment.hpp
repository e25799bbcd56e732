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

// Experiment runner: features -> segments -> (ensemble) training ->
// evaluation -> separability analysis -> results.json.
//
// Seed derivation from the master seed S, for ensemble member i:
//   subset (crop + balanced sampling)  S + i
//   parameter initialization           S + 100 + i
//   batch order and dropout            S + 200 + i

#ifndef ADVSPK_EXPERIMENT_HPP_
#define ADVSPK_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "advspk/adversarial.hpp"
#include "advspk/corpus.hpp"
#include "advspk/model.hpp"
#include "advspk/segmentation.hpp"
#include "json.hpp"

namespace advspk {

inline constexpr std::uint64_t kInitSeedOffset = 100;
inline constexpr std::uint64_t kTrainSeedOffset = 200;
inline constexpr const char* kCacheEnvVar = "ADVSPK_CACHE_DIR";

// Flat "[section]" / "key = value" text. '#' starts a comment.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  // Keys that were never read through get(); used to reject typos.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> value
  mutable std::map<std::string, bool> used_;
};

struct ModelOverrides {
  std::optional<std::vector<ConvSpec>> conv_layers;
  std::optional<int> lstm_layers;
  std::optional<int> lstm_hidden;
  std::optional<double> dropout_p;
  std::optional<int> input_dims;
};

struct ExperimentConfig {
  std::filesystem::path manifest_path;
  FeatureKind feature_kind = FeatureKind::kMel;
  std::string model_preset = "custom";  // one of preset_names() or "custom"
  ModelOverrides model;
  AdversarialConfig adversarial;
  SamplingPlan sampling;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";
  std::optional<std::filesystem::path> feature_dir;  // ssl .ftr files
  std::optional<std::filesystem::path> cache_dir;
  bool normalize = true;  // mel and raw only
  double threshold = 0.5;
  Partition speaker_jratio_partition = Partition::kTrain;
  std::optional<std::filesystem::path> baseline_results;

  void validate() const;
};

// Relative paths are resolved against `base_dir`.
ExperimentConfig parse_experiment_config(const ConfigFile& file,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

// Preset or custom architecture sized for the manifest's speaker count.
ModelConfig resolve_model_config(const ExperimentConfig& config, int n_speakers);

// Feature matrix for one record, normalized as configured, read from or
// written to the cache directory when one is set.
FeatureMatrix utterance_features(const ExperimentConfig& config, const Manifest& manifest,
                                 const UtteranceRecord& record);

// Cache directory in effect: config.cache_dir, else $ADVSPK_CACHE_DIR, else none.
std::optional<std::filesystem::path> effective_cache_dir(const ExperimentConfig& config);

struct PreparedData {
  Manifest manifest;
  std::vector<FeatureMatrix> train_features;
  std::vector<SegmentLabels> train_labels;
  std::vector<Segment> train_segments;  // uncropped, for analysis
  std::vector<Segment> eval_segments;
};

PreparedData prepare_data(const ExperimentConfig& config);

// Training set of ensemble member `member` (crop and segmenting seeded by
// seed + member).
std::vector<Segment> member_training_segments(const ExperimentConfig& config,
                                              const PreparedData& data, int member);

struct TrainedEnsemble {
  std::vector<Model> models;
  std::vector<TrainHistory> histories;
};

TrainedEnsemble train_ensemble(const ExperimentConfig& config, const PreparedData& data);

std::vector<std::filesystem::path> checkpoint_paths(const ExperimentConfig& config);

ExperimentResults evaluate_ensemble(const ExperimentConfig& config, const PreparedData& data,
                                    std::span<const Model> models);

// McNemar p between two result files' predictions, matched by utterance id.
double compare_results(const ExperimentResults& a, const ExperimentResults& b);

// Subcommand bodies. Each returns the path of the file it wrote.
std::filesystem::path run_features(const ExperimentConfig& config);
std::filesystem::path run_train(const ExperimentConfig& config);
std::filesystem::path run_eval(const ExperimentConfig& config);
// Per-layer J-ratios of the saved checkpoints, written to jratio.json.
std::filesystem::path run_jratio(const ExperimentConfig& config);
std::filesystem::path run_experiment(const ExperimentConfig& config);
std::filesystem::path run_experiment(const std::filesystem::path& config_path);

}  // namespace advspk

#endif  // ADVSPK_EXPERIMENT_HPP_
