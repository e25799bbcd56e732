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

#include "advspk/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "advspk/error.hpp"
#include "advspk/evaluation.hpp"
#include "advspk/separability.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "cli";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ValidationError(kModule, key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ValidationError(kModule, key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(kModule, key + ": expected true/false, got '" + v + "'");
}

// "3:1:128, 3:1:128" -> two ConvSpecs; "none" or "" -> no conv layers.
std::vector<ConvSpec> parse_conv_list(const std::string& v) {
  std::vector<ConvSpec> out;
  if (v.empty() || v == "none") return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    int k = 0, s = 0, c = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> k >> c1 >> s >> c2 >> c) || c1 != ':' || c2 != ':' || !is.eof()) {
      throw ValidationError(kModule, "model.conv: expected 'K:S:channels', got '" + item + "'");
    }
    out.push_back({k, s, c});
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  return p.is_absolute() || base.empty() ? p : base / p;
}

std::string cache_subdir(const ExperimentConfig& c) {
  std::string name(to_string(c.feature_kind));
  if (c.feature_kind != FeatureKind::kSsl && c.normalize) name += "_mvn";
  return name;
}

SegmentLabels labels_for(const Manifest& m, const UtteranceRecord& r) {
  return {m.index_of(r.speaker_id), r.depression_label, r.speaker_id};
}

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = std::min<int>(n, static_cast<int>(hw));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> mean_per_layer(const std::vector<SeparabilityReport>& reports) {
  std::vector<double> out(reports.front().per_layer.size(), 0.0);
  for (const auto& r : reports) {
    for (std::size_t l = 0; l < out.size(); ++l) out[l] += r.per_layer[l];
  }
  for (double& v : out) v /= static_cast<double>(reports.size());
  return out;
}

SeparabilityReport ensemble_jratios(std::span<const Model> models,
                                    std::span<const Segment> segments, ClassKind kind) {
  std::vector<SeparabilityReport> reports;
  for (const auto& m : models) reports.push_back(layer_jratios(m, segments, kind));
  SeparabilityReport r = reports.front();
  r.per_layer = mean_per_layer(reports);
  double sum = 0.0;
  for (double v : r.per_layer) sum += v;
  r.mean = sum / static_cast<double>(r.per_layer.size());
  return r;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile f;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ValidationError(kModule, "config line " + std::to_string(line_no) +
                                           ": unterminated section header");
      }
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(kModule, "config line " + std::to_string(line_no) +
                                         ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(t).substr(eq + 1)));
    const std::string full = section.empty() ? key : section + "." + key;
    if (!f.values_.emplace(full, value).second) {
      throw ValidationError(kModule, "config key '" + full + "' given twice");
    }
    f.used_[full] = false;
  }
  return f;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(kModule, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
  const std::string full = section + "." + key;
  const auto it = values_.find(full);
  if (it == values_.end()) return std::nullopt;
  used_[full] = true;
  return it->second;
}

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, used] : used_) {
    if (!used) out.push_back(k);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (manifest_path.empty()) throw ValidationError(kModule, "experiment.manifest is required");
  if (model_preset != "custom") {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), model_preset) == names.end()) {
      throw ValidationError(kModule, "unknown preset '" + model_preset + "'");
    }
  }
  adversarial.validate();
  sampling.validate();
  if (feature_kind == FeatureKind::kSsl && !feature_dir) {
    throw ValidationError(kModule, "ssl features need experiment.feature_dir");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError(kModule, "threshold must lie in [0, 1]");
  }
}

ExperimentConfig parse_experiment_config(const ConfigFile& file,
                                         const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  auto str = [&](const char* sec, const char* key) { return file.get(sec, key); };
  auto full = [](const char* sec, const char* key) { return std::string(sec) + "." + key; };

  if (auto v = str("experiment", "manifest")) c.manifest_path = resolve(base_dir, *v);
  if (auto v = str("experiment", "feature_kind")) c.feature_kind = parse_feature_kind(*v);
  if (auto v = str("experiment", "preset")) c.model_preset = *v;
  if (auto v = str("experiment", "seed")) {
    c.seed = static_cast<std::uint64_t>(to_int(full("experiment", "seed"), *v));
  }
  if (auto v = str("experiment", "output_dir")) c.output_dir = resolve(base_dir, *v);
  if (auto v = str("experiment", "feature_dir")) c.feature_dir = resolve(base_dir, *v);
  if (auto v = str("experiment", "cache_dir")) c.cache_dir = resolve(base_dir, *v);
  if (auto v = str("experiment", "normalize")) c.normalize = to_bool("experiment.normalize", *v);
  if (auto v = str("experiment", "threshold")) {
    c.threshold = to_double("experiment.threshold", *v);
  }
  if (auto v = str("experiment", "baseline_results")) c.baseline_results = resolve(base_dir, *v);

  if (auto v = str("model", "conv")) c.model.conv_layers = parse_conv_list(*v);
  if (auto v = str("model", "lstm_layers")) {
    c.model.lstm_layers = static_cast<int>(to_int("model.lstm_layers", *v));
  }
  if (auto v = str("model", "lstm_hidden")) {
    c.model.lstm_hidden = static_cast<int>(to_int("model.lstm_hidden", *v));
  }
  if (auto v = str("model", "dropout")) c.model.dropout_p = to_double("model.dropout", *v);
  if (auto v = str("model", "input_dims")) {
    c.model.input_dims = static_cast<int>(to_int("model.input_dims", *v));
  }

  if (auto v = str("adversarial", "lambda")) c.adversarial.lambda = to_double("adversarial.lambda", *v);
  if (auto v = str("adversarial", "learning_rate")) {
    c.adversarial.learning_rate = to_double("adversarial.learning_rate", *v);
  }
  if (auto v = str("adversarial", "epochs")) {
    c.adversarial.epochs = static_cast<int>(to_int("adversarial.epochs", *v));
  }
  if (auto v = str("adversarial", "batch_size")) {
    c.adversarial.batch_size = static_cast<int>(to_int("adversarial.batch_size", *v));
  }
  if (auto v = str("adversarial", "optimizer")) c.adversarial.optimizer = parse_optimizer(*v);
  if (auto v = str("adversarial", "momentum")) {
    c.adversarial.momentum = to_double("adversarial.momentum", *v);
  }

  if (auto v = str("sampling", "style")) {
    if (*v == "daic") {
      c.sampling = SamplingPlan::daic_style();
    } else if (*v == "converge") {
      c.sampling = SamplingPlan::converge_style();
    } else {
      throw ValidationError(kModule, "sampling.style must be 'daic' or 'converge'");
    }
  }
  if (auto v = str("sampling", "random_crop")) {
    c.sampling.use_random_crop = to_bool("sampling.random_crop", *v);
  }
  if (auto v = str("sampling", "balanced_subsample")) {
    c.sampling.use_balanced_subsample = to_bool("sampling.balanced_subsample", *v);
  }
  if (auto v = str("sampling", "ensemble_models")) {
    c.sampling.n_ensemble_models = static_cast<int>(to_int("sampling.ensemble_models", *v));
  }

  if (auto v = str("analysis", "speaker_jratio_partition")) {
    if (*v == "train") {
      c.speaker_jratio_partition = Partition::kTrain;
    } else if (*v == "eval") {
      c.speaker_jratio_partition = Partition::kEval;
    } else {
      throw ValidationError(kModule, "analysis.speaker_jratio_partition must be train or eval");
    }
  }

  const auto unused = file.unused_keys();
  if (!unused.empty()) throw ValidationError(kModule, "unknown config key '" + unused.front() + "'");
  c.sampling.seed = c.seed;
  c.adversarial.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(ConfigFile::load(path), path.parent_path());
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json conv = nullptr;
  if (c.model.conv_layers) {
    conv = nlohmann::json::array();
    for (const auto& s : *c.model.conv_layers) {
      conv.push_back({{"kernel", s.kernel}, {"stride", s.stride}, {"out_channels", s.out_channels}});
    }
  }
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(); };
  auto opt_path = [](const std::optional<std::filesystem::path>& p) {
    return p ? nlohmann::json(p->generic_string()) : nlohmann::json();
  };
  return {
      {"manifest", c.manifest_path.generic_string()},
      {"feature_kind", std::string(to_string(c.feature_kind))},
      {"preset", c.model_preset},
      {"seed", c.seed},
      {"output_dir", c.output_dir.generic_string()},
      {"feature_dir", opt_path(c.feature_dir)},
      {"normalize", c.normalize},
      {"threshold", c.threshold},
      {"baseline_results", opt_path(c.baseline_results)},
      {"model",
       {{"conv", conv},
        {"lstm_layers", opt(c.model.lstm_layers)},
        {"lstm_hidden", opt(c.model.lstm_hidden)},
        {"dropout", opt(c.model.dropout_p)},
        {"input_dims", opt(c.model.input_dims)}}},
      {"adversarial",
       {{"lambda", c.adversarial.lambda},
        {"learning_rate", c.adversarial.learning_rate},
        {"epochs", c.adversarial.epochs},
        {"batch_size", c.adversarial.batch_size},
        {"optimizer", std::string(to_string(c.adversarial.optimizer))},
        {"momentum", c.adversarial.momentum}}},
      {"sampling",
       {{"random_crop", c.sampling.use_random_crop},
        {"balanced_subsample", c.sampling.use_balanced_subsample},
        {"ensemble_models", c.sampling.n_ensemble_models}}},
      {"analysis", {{"speaker_jratio_partition", std::string(to_string(c.speaker_jratio_partition))}}},
  };
}

ModelConfig resolve_model_config(const ExperimentConfig& config, int n_speakers) {
  ModelConfig m;
  if (config.model_preset != "custom") {
    m = preset(config.model_preset, n_speakers, config.model.input_dims);
    if (m.feature_kind != config.feature_kind) {
      throw ValidationError(kModule, "preset '" + config.model_preset + "' expects " +
                                         std::string(to_string(m.feature_kind)) + " features");
    }
  } else {
    m.feature_kind = config.feature_kind;
    m.n_speakers = n_speakers;
    m.input_dims = config.model.input_dims.value_or(
        config.feature_kind == FeatureKind::kMel   ? 40
        : config.feature_kind == FeatureKind::kRaw ? 1
                                                   : 768);
  }
  if (config.model.conv_layers) m.conv_layers = *config.model.conv_layers;
  if (config.model.lstm_layers) m.lstm_layers = *config.model.lstm_layers;
  if (config.model.lstm_hidden) m.lstm_hidden = *config.model.lstm_hidden;
  if (config.model.dropout_p) m.dropout_p = *config.model.dropout_p;
  m.validate();
  return m;
}

std::optional<std::filesystem::path> effective_cache_dir(const ExperimentConfig& config) {
  if (config.cache_dir) return config.cache_dir;
  if (const char* env = std::getenv(kCacheEnvVar); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

FeatureMatrix utterance_features(const ExperimentConfig& config, const Manifest& manifest,
                                 const UtteranceRecord& record) {
  const auto cache = effective_cache_dir(config);
  std::filesystem::path cached;
  if (cache) {
    cached = *cache / cache_subdir(config) / (record.utterance_id + ".ftr");
    if (std::filesystem::is_regular_file(cached)) {
      FeatureMatrix m = read_ftr(cached);
      m.utterance_id = record.utterance_id;
      if (m.kind != config.feature_kind) {
        throw ValidationError(kModule, "cached features of wrong kind in " + cached.string());
      }
      return m;
    }
  }
  FeatureMatrix m;
  if (config.feature_kind == FeatureKind::kSsl) {
    m = load_ssl_features(record.utterance_id, *config.feature_dir);
  } else {
    const AudioUtterance u = load_utterance(manifest, record);
    m = config.feature_kind == FeatureKind::kMel ? extract_mel(u) : prepare_raw(u);
    if (config.normalize) m = mean_variance_normalize(m);
  }
  if (cache) {
    std::error_code ec;
    std::filesystem::create_directories(cached.parent_path(), ec);
    write_ftr(cached, m);
  }
  return m;
}

PreparedData prepare_data(const ExperimentConfig& config) {
  PreparedData d;
  LoadOptions opts;
  if (config.feature_kind == FeatureKind::kSsl) opts.feature_dir = config.feature_dir;
  d.manifest = load_manifest(config.manifest_path, opts);

  for (const auto& r : d.manifest.records) {
    FeatureMatrix m = utterance_features(config, d.manifest, r);
    const SegmentLabels labels = labels_for(d.manifest, r);
    auto segs = make_segments(m, labels);
    if (r.partition == Partition::kTrain) {
      for (auto& s : segs) d.train_segments.push_back(std::move(s));
      d.train_features.push_back(std::move(m));
      d.train_labels.push_back(labels);
    } else {
      for (auto& s : segs) d.eval_segments.push_back(std::move(s));
    }
  }
  if (d.eval_segments.empty()) throw ValidationError(kModule, "manifest has no eval utterances");
  return d;
}

std::vector<Segment> member_training_segments(const ExperimentConfig& config,
                                              const PreparedData& data, int member) {
  if (!config.sampling.use_random_crop) return data.train_segments;
  const auto cropped =
      random_crop(data.train_features, config.seed + static_cast<std::uint64_t>(member));
  std::vector<Segment> out;
  for (std::size_t i = 0; i < cropped.size(); ++i) {
    for (auto& s : make_segments(cropped[i], data.train_labels[i])) out.push_back(std::move(s));
  }
  return out;
}

TrainedEnsemble train_ensemble(const ExperimentConfig& config, const PreparedData& data) {
  const ModelConfig model_config =
      resolve_model_config(config, data.manifest.n_train_speakers());
  const int n = config.sampling.n_ensemble_models;
  TrainedEnsemble e;
  e.models.resize(static_cast<std::size_t>(n));
  e.histories.resize(static_cast<std::size_t>(n));
  parallel_for(n, [&](int i) {
    const auto u = static_cast<std::uint64_t>(i);
    const std::vector<Segment> segs = member_training_segments(config, data, i);
    Model model = Model::build(model_config, config.seed + kInitSeedOffset + u);
    AdversarialConfig adv = config.adversarial;
    adv.seed = config.seed + kTrainSeedOffset + u;
    SamplingPlan plan = config.sampling;
    plan.seed = config.seed + u;
    TrainResult r = train(std::move(model), segs, data.eval_segments, adv, plan);
    e.models[static_cast<std::size_t>(i)] = std::move(r.model);
    e.histories[static_cast<std::size_t>(i)] = std::move(r.history);
  });
  return e;
}

std::vector<std::filesystem::path> checkpoint_paths(const ExperimentConfig& config) {
  std::vector<std::filesystem::path> out;
  for (int i = 0; i < config.sampling.n_ensemble_models; ++i) {
    out.push_back(config.output_dir / ("model_" + std::to_string(i) + ".ckpt"));
  }
  return out;
}

ExperimentResults evaluate_ensemble(const ExperimentConfig& config, const PreparedData& data,
                                    std::span<const Model> models) {
  ExperimentResults r;
  r.seed = config.seed;
  r.config = to_json(config);
  r.config["resolved_model"] = to_json(models.front().config());

  const auto probs = ensemble_predict(models, data.eval_segments);
  std::vector<double> p;
  std::vector<int> truth;
  for (const auto& u : probs) {
    p.push_back(u.probability);
    truth.push_back(u.truth);
  }
  const std::vector<int> labels = utterance_labels(p, config.threshold);
  r.evaluation = evaluate(labels, truth, config.threshold);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    r.predictions.push_back({probs[i].utterance_id, truth[i], p[i], labels[i]});
  }

  const auto& spk_segments = config.speaker_jratio_partition == Partition::kTrain
                                 ? data.train_segments
                                 : data.eval_segments;
  r.speaker = ensemble_jratios(models, spk_segments, ClassKind::kSpeaker);
  const bool eval_has_both =
      std::any_of(truth.begin(), truth.end(), [](int t) { return t == 1; }) &&
      std::any_of(truth.begin(), truth.end(), [](int t) { return t == 0; });
  if (eval_has_both) {
    r.depression = ensemble_jratios(models, data.eval_segments, ClassKind::kDepression);
  }

  if (config.baseline_results) {
    const ExperimentResults base = read_results(*config.baseline_results);
    r.evaluation.mcnemar_p = compare_results(base, r);
  }
  for (const auto& path : checkpoint_paths(config)) r.checkpoints.push_back(path.generic_string());
  return r;
}

double compare_results(const ExperimentResults& a, const ExperimentResults& b) {
  std::map<std::string, const UtterancePrediction*> in_b;
  for (const auto& p : b.predictions) in_b[p.utterance_id] = &p;
  if (in_b.size() != a.predictions.size()) {
    throw ValidationError(kModule, "result files cover different utterance sets");
  }
  std::vector<int> pa, pb, truth;
  for (const auto& p : a.predictions) {
    const auto it = in_b.find(p.utterance_id);
    if (it == in_b.end()) {
      throw ValidationError(kModule, "utterance '" + p.utterance_id + "' missing from second file");
    }
    if (it->second->truth != p.truth) {
      throw ValidationError(kModule, "result files disagree on the label of '" + p.utterance_id + "'");
    }
    pa.push_back(p.label);
    pb.push_back(it->second->label);
    truth.push_back(p.truth);
  }
  return mcnemar_test(pa, pb, truth);
}

std::filesystem::path run_features(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  if (!effective_cache_dir(c)) c.cache_dir = c.output_dir / "features";
  LoadOptions opts;
  if (c.feature_kind == FeatureKind::kSsl) opts.feature_dir = c.feature_dir;
  const Manifest m = load_manifest(c.manifest_path, opts);
  for (const auto& r : m.records) utterance_features(c, m, r);
  return *effective_cache_dir(c) / cache_subdir(c);
}

namespace {

void save_models(const ExperimentConfig& config, const TrainedEnsemble& e) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  const auto paths = checkpoint_paths(config);
  for (std::size_t i = 0; i < e.models.size(); ++i) save_checkpoint(paths[i], e.models[i]);
}

std::filesystem::path save_history(const ExperimentConfig& config, const TrainedEnsemble& e) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& h : e.histories) {
    nlohmann::json member = {{"train", nlohmann::json::array()}, {"valid", nlohmann::json::array()}};
    for (const auto& t : h.train) {
      member["train"].push_back({{"l_mdd", t.mdd}, {"l_spk", t.spk}, {"l_total", t.total}});
    }
    for (const auto& v : h.valid) {
      member["valid"].push_back({{"l_mdd", v.mdd},
                                 {"l_spk", v.spk ? nlohmann::json(*v.spk) : nlohmann::json()},
                                 {"l_total", v.total ? nlohmann::json(*v.total) : nlohmann::json()}});
    }
    j.push_back(member);
  }
  const auto path = config.output_dir / "history.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure(kModule, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  return path;
}

}  // namespace

std::filesystem::path run_train(const ExperimentConfig& config) {
  const PreparedData data = prepare_data(config);
  const TrainedEnsemble e = train_ensemble(config, data);
  save_models(config, e);
  return save_history(config, e);
}

std::filesystem::path run_eval(const ExperimentConfig& config) {
  const PreparedData data = prepare_data(config);
  const ModelConfig expected = resolve_model_config(config, data.manifest.n_train_speakers());
  std::vector<Model> models;
  for (const auto& p : checkpoint_paths(config)) models.push_back(load_checkpoint(p, expected));
  return persist_results(evaluate_ensemble(config, data, models), config.output_dir);
}

std::filesystem::path run_jratio(const ExperimentConfig& config) {
  const PreparedData data = prepare_data(config);
  const ModelConfig expected = resolve_model_config(config, data.manifest.n_train_speakers());
  std::vector<Model> models;
  for (const auto& p : checkpoint_paths(config)) models.push_back(load_checkpoint(p, expected));
  const auto& spk_segments = config.speaker_jratio_partition == Partition::kTrain
                                 ? data.train_segments
                                 : data.eval_segments;
  const SeparabilityReport spk = ensemble_jratios(models, spk_segments, ClassKind::kSpeaker);
  const SeparabilityReport dep =
      ensemble_jratios(models, data.eval_segments, ClassKind::kDepression);
  const nlohmann::json j = {
      {"speaker", {{"per_layer", spk.per_layer}, {"mean", spk.mean}, {"d", spk.d}}},
      {"depression", {{"per_layer", dep.per_layer}, {"mean", dep.mean}, {"d", dep.d}}},
  };
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  const auto path = config.output_dir / "jratio.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure(kModule, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  return path;
}

std::filesystem::path run_experiment(const ExperimentConfig& config) {
  const PreparedData data = prepare_data(config);
  const TrainedEnsemble e = train_ensemble(config, data);
  save_models(config, e);
  save_history(config, e);
  return persist_results(evaluate_ensemble(config, data, e.models), config.output_dir);
}

std::filesystem::path run_experiment(const std::filesystem::path& config_path) {
  return run_experiment(load_experiment_config(config_path));
}

}  // namespace advspk
