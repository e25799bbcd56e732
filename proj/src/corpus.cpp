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

#include "advspk/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "advspk/error.hpp"
#include "advspk/wav.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "corpus";
constexpr const char* kHeader = "utterance_id,speaker_id,audio_path,depression_label,partition";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Partition parse_partition(const std::string& s, int line_no) {
  if (s == "train") return Partition::kTrain;
  if (s == "eval") return Partition::kEval;
  throw ValidationError(kModule, "line " + std::to_string(line_no) + ": unknown partition '" + s +
                                     "'");
}

nlohmann::json report_json(const SeparabilityReport& r) {
  return {{"class_kind", std::string(to_string(r.class_kind))},
          {"per_layer", r.per_layer},
          {"mean", r.mean},
          {"d", r.d}};
}

SeparabilityReport report_from_json(const nlohmann::json& j) {
  SeparabilityReport r;
  r.class_kind = parse_class_kind(j.at("class_kind").get<std::string>());
  r.per_layer = j.at("per_layer").get<std::vector<double>>();
  r.mean = j.at("mean").get<double>();
  r.d = j.at("d").get<int>();
  return r;
}

}  // namespace

std::string_view to_string(Partition p) { return p == Partition::kTrain ? "train" : "eval"; }

int Manifest::index_of(const std::string& speaker_id) const {
  const auto it = speaker_index.find(speaker_id);
  return it == speaker_index.end() ? -1 : it->second;
}

std::filesystem::path Manifest::resolve_audio(const UtteranceRecord& r) const {
  return r.audio_path.is_absolute() ? r.audio_path : base_dir / r.audio_path;
}

std::vector<const UtteranceRecord*> Manifest::partition(Partition p) const {
  std::vector<const UtteranceRecord*> out;
  for (const auto& r : records) {
    if (r.partition == p) out.push_back(&r);
  }
  return out;
}

void validate_manifest(Manifest& manifest) {
  if (manifest.sample_rate != kSampleRate) {
    throw ValidationError(kModule, "sample_rate must be 16000, got " +
                                       std::to_string(manifest.sample_rate));
  }
  std::set<std::string> ids;
  std::map<std::string, int> label_of;
  std::map<std::string, Partition> partition_of;
  for (const auto& r : manifest.records) {
    if (r.utterance_id.empty() || r.speaker_id.empty()) {
      throw ValidationError(kModule, "empty utterance or speaker id");
    }
    if (!ids.insert(r.utterance_id).second) {
      throw ValidationError(kModule, "duplicate utterance_id '" + r.utterance_id + "'");
    }
    if (r.depression_label != 0 && r.depression_label != 1) {
      throw ValidationError(kModule, "depression_label must be 0 or 1 for '" + r.utterance_id + "'");
    }
    const auto [lit, new_label] = label_of.emplace(r.speaker_id, r.depression_label);
    if (!new_label && lit->second != r.depression_label) {
      throw ValidationError(kModule, "inconsistent label for speaker '" + r.speaker_id + "'");
    }
    const auto [pit, new_part] = partition_of.emplace(r.speaker_id, r.partition);
    if (!new_part && pit->second != r.partition) {
      throw ValidationError(kModule, "speaker '" + r.speaker_id +
                                         "' appears in both train and eval partitions");
    }
  }
  manifest.train_speakers.clear();
  manifest.speaker_index.clear();
  for (const auto& [spk, part] : partition_of) {
    if (part == Partition::kTrain) manifest.train_speakers.push_back(spk);
  }
  for (std::size_t i = 0; i < manifest.train_speakers.size(); ++i) {
    manifest.speaker_index[manifest.train_speakers[i]] = static_cast<int>(i);
  }
  if (manifest.n_train_speakers() < 2) {
    throw ValidationError(kModule, "need >= 2 distinct train speakers, found " +
                                       std::to_string(manifest.n_train_speakers()));
  }
}

Manifest load_manifest(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError(kModule, "cannot open manifest " + path.string());
  Manifest m;
  m.base_dir = path.parent_path();
  m.feature_dir = options.feature_dir;

  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      if (t != kHeader) {
        throw ValidationError(kModule, "manifest header must be '" + std::string(kHeader) +
                                           "', got '" + t + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv(t);
    if (f.size() != 5) {
      throw ValidationError(kModule, "line " + std::to_string(line_no) + ": expected 5 fields, got " +
                                         std::to_string(f.size()));
    }
    UtteranceRecord r;
    r.utterance_id = f[0];
    r.speaker_id = f[1];
    r.audio_path = f[2];
    if (f[3] == "0") {
      r.depression_label = 0;
    } else if (f[3] == "1") {
      r.depression_label = 1;
    } else {
      throw ValidationError(kModule, "line " + std::to_string(line_no) +
                                         ": depression_label must be 0 or 1");
    }
    r.partition = parse_partition(f[4], line_no);
    m.records.push_back(std::move(r));
  }
  if (!header_seen) throw ValidationError(kModule, "empty manifest " + path.string());
  validate_manifest(m);

  if (options.check_files) {
    for (const auto& r : m.records) {
      if (m.feature_dir) {
        const auto ftr = *m.feature_dir / (r.utterance_id + ".ftr");
        if (!std::filesystem::is_regular_file(ftr)) {
          throw ValidationError(kModule, "missing feature file " + ftr.string());
        }
        continue;
      }
      const auto audio = m.resolve_audio(r);
      if (!std::filesystem::is_regular_file(audio)) {
        throw ValidationError(kModule, "missing audio file " + audio.string());
      }
      const WavInfo info = read_wav_info(audio);
      if (info.sample_rate != kSampleRate) {
        throw ValidationError(kModule, audio.string() + ": sample_rate " +
                                           std::to_string(info.sample_rate) + " != 16000");
      }
      if (info.channels != 1 || info.bits_per_sample != 16) {
        throw ValidationError(kModule, audio.string() + ": expected 16-bit mono PCM");
      }
    }
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure(kModule, "cannot write manifest " + path.string());
  out << kHeader << '\n';
  for (const auto& r : manifest.records) {
    out << r.utterance_id << ',' << r.speaker_id << ',' << r.audio_path.generic_string() << ','
        << r.depression_label << ',' << to_string(r.partition) << '\n';
  }
  if (!out) throw RuntimeFailure(kModule, "manifest write failed: " + path.string());
}

AudioUtterance load_utterance(const Manifest& manifest, const UtteranceRecord& record) {
  AudioUtterance u;
  u.utterance_id = record.utterance_id;
  u.speaker_id = record.speaker_id;
  u.depression_label = record.depression_label;
  u.samples = read_wav(manifest.resolve_audio(record));
  return u;
}

nlohmann::json to_json(const ExperimentResults& r) {
  nlohmann::json j;
  j["config"] = r.config;
  j["seed"] = r.seed;
  j["f1_nd"] = r.evaluation.f1_nd;
  j["f1_d"] = r.evaluation.f1_d;
  j["f1_avg"] = r.evaluation.f1_avg;
  j["n_eval"] = r.evaluation.n_eval;
  j["threshold"] = r.evaluation.threshold;
  j["mcnemar_p"] = r.evaluation.mcnemar_p ? nlohmann::json(*r.evaluation.mcnemar_p)
                                          : nlohmann::json();
  j["jratio_per_layer"] = r.speaker.per_layer;
  j["jratio_mean"] = r.speaker.mean;
  j["jratio_speaker"] = report_json(r.speaker);
  j["jratio_depression"] = r.depression ? report_json(*r.depression) : nlohmann::json();
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : r.predictions) {
    preds.push_back({{"utterance_id", p.utterance_id},
                     {"truth", p.truth},
                     {"probability", p.probability},
                     {"label", p.label}});
  }
  j["predictions"] = preds;
  j["checkpoints"] = r.checkpoints;
  return j;
}

ExperimentResults results_from_json(const nlohmann::json& j) {
  try {
    ExperimentResults r;
    r.config = j.at("config");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.evaluation.f1_nd = j.at("f1_nd").get<double>();
    r.evaluation.f1_d = j.at("f1_d").get<double>();
    r.evaluation.f1_avg = j.at("f1_avg").get<double>();
    r.evaluation.n_eval = j.value("n_eval", 0);
    r.evaluation.threshold = j.value("threshold", 0.5);
    if (!j.at("mcnemar_p").is_null()) r.evaluation.mcnemar_p = j["mcnemar_p"].get<double>();
    if (j.contains("jratio_speaker") && !j["jratio_speaker"].is_null()) {
      r.speaker = report_from_json(j["jratio_speaker"]);
    } else {
      r.speaker.per_layer = j.at("jratio_per_layer").get<std::vector<double>>();
    }
    if (j.contains("jratio_depression") && !j["jratio_depression"].is_null()) {
      r.depression = report_from_json(j["jratio_depression"]);
    }
    for (const auto& p : j.value("predictions", nlohmann::json::array())) {
      r.predictions.push_back({p.at("utterance_id").get<std::string>(), p.at("truth").get<int>(),
                               p.at("probability").get<double>(), p.at("label").get<int>()});
    }
    r.checkpoints = j.value("checkpoints", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, std::string("malformed results file: ") + e.what());
  }
}

std::filesystem::path persist_results(const ExperimentResults& results,
                                      const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto path = out_dir / "results.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure(kModule, "cannot write " + path.string());
  out << to_json(results).dump(2) << '\n';
  if (!out) throw RuntimeFailure(kModule, "write failed: " + path.string());
  return path;
}

ExperimentResults read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(kModule, "cannot open results file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, "results file is not JSON: " + std::string(e.what()));
  }
  return results_from_json(j);
}

}  // namespace advspk
