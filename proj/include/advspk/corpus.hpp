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

// Manifest parsing, label bookkeeping and persistence of experiment results.
//
// Manifest CSV header:
//   utterance_id,speaker_id,audio_path,depression_label,partition
// Relative audio paths are resolved against the manifest's directory.
// Sessions that should not be used are simply left out of the file.

#ifndef ADVSPK_CORPUS_HPP_
#define ADVSPK_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advspk/evaluation.hpp"
#include "advspk/features.hpp"
#include "advspk/separability.hpp"
#include "json.hpp"

namespace advspk {

enum class Partition { kTrain, kEval };

std::string_view to_string(Partition p);

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::filesystem::path audio_path;  // as written in the manifest
  int depression_label = 0;
  Partition partition = Partition::kTrain;

  bool operator==(const UtteranceRecord&) const = default;
};

struct Manifest {
  std::vector<UtteranceRecord> records;
  int sample_rate = 16000;
  std::optional<std::filesystem::path> feature_dir;
  std::filesystem::path base_dir;  // directory of the manifest file

  // Train speakers in lexicographic order; index i is speaker class i.
  std::vector<std::string> train_speakers;
  std::map<std::string, int> speaker_index;

  int n_train_speakers() const { return static_cast<int>(train_speakers.size()); }

  // Speaker class for a train speaker, -1 otherwise.
  int index_of(const std::string& speaker_id) const;

  std::filesystem::path resolve_audio(const UtteranceRecord& r) const;

  std::vector<const UtteranceRecord*> partition(Partition p) const;
};

struct LoadOptions {
  // When set, SSL features are read from "<feature_dir>/<utterance_id>.ftr"
  // and those files (instead of the WAVs) must exist.
  std::optional<std::filesystem::path> feature_dir;
  // Open every audio file and check it is 16 kHz mono 16-bit PCM.
  bool check_files = true;
};

// Parses and validates a manifest: unique utterance ids, one label per
// speaker, disjoint partitions, at least two train speakers, readable
// 16 kHz payloads.
Manifest load_manifest(const std::filesystem::path& path, const LoadOptions& options = {});

// Builds the speaker index and runs the in-memory invariant checks.
void validate_manifest(Manifest& manifest);

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

AudioUtterance load_utterance(const Manifest& manifest, const UtteranceRecord& record);

struct UtterancePrediction {
  std::string utterance_id;
  int truth = 0;
  double probability = 0.0;
  int label = 0;
};

// Everything a run writes to results.json.
struct ExperimentResults {
  nlohmann::json config = nlohmann::json::object();
  EvaluationReport evaluation;
  SeparabilityReport speaker;
  std::optional<SeparabilityReport> depression;
  std::uint64_t seed = 0;
  std::vector<UtterancePrediction> predictions;
  std::vector<std::string> checkpoints;
};

nlohmann::json to_json(const ExperimentResults& results);
ExperimentResults results_from_json(const nlohmann::json& j);

// Writes "<out_dir>/results.json" and returns the path. Output is a pure
// function of the report, so re-running overwrites byte-identically.
std::filesystem::path persist_results(const ExperimentResults& results,
                                      const std::filesystem::path& out_dir);

ExperimentResults read_results(const std::filesystem::path& path);

}  // namespace advspk

#endif  // ADVSPK_CORPUS_HPP_
