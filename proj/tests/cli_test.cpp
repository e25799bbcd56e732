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

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "advspk/error.hpp"
#include "advspk/experiment.hpp"
#include "corpus_fixture.hpp"

namespace advspk {
namespace {

using testing::read_file;
using testing::shared_corpus;
using testing::TempDir;

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ADVSPK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string tiny_config(const std::filesystem::path& out, const std::string& extra = "") {
  return "[experiment]\n"
         "manifest = " + shared_corpus().manifest.string() + "\n"
         "feature_kind = mel\n"
         "seed = 5\n"
         "output_dir = " + out.string() + "\n"
         "cache_dir = " + (shared_corpus().dir.path() / "cli_cache").string() + "\n" +
         extra +
         "[model]\n"
         "conv = 3:1:4\n"
         "lstm_layers = 1\n"
         "lstm_hidden = 4\n"
         "[adversarial]\n"
         "lambda = 0\n"
         "epochs = 2\n";
}

TEST(ConfigFile, Parse) {
  const auto f = ConfigFile::parse(
      "# header comment\n"
      "[a]\n"
      "x = 1   # trailing\n"
      "y = \"quoted value\"\n"
      "\n"
      "[b]\n"
      "x=2\n");
  EXPECT_EQ(f.get("a", "x"), "1");
  EXPECT_EQ(f.get("a", "y"), "quoted value");
  EXPECT_EQ(f.get("b", "x"), "2");
  EXPECT_FALSE(f.get("b", "y").has_value());
  EXPECT_TRUE(f.unused_keys().empty());
  EXPECT_THROW(ConfigFile::parse("[a]\nx = 1\nx = 2\n"), ValidationError);
  EXPECT_THROW(ConfigFile::parse("[a\n"), ValidationError);
  EXPECT_THROW(ConfigFile::parse("[a]\njust words\n"), ValidationError);
}

TEST(ExperimentConfig, PresetAndLambdaEcho) {
  const auto c = parse_experiment_config(ConfigFile::parse(
      "[experiment]\nmanifest = m.csv\npreset = daic-mel\nseed = 3\n"
      "[adversarial]\nlambda = 5e-6\n[sampling]\nstyle = daic\n"));
  EXPECT_EQ(c.adversarial.lambda, 5e-6);
  EXPECT_EQ(c.sampling.n_ensemble_models, 5);
  EXPECT_EQ(c.sampling.seed, 3u);
  const auto j = to_json(c);
  EXPECT_EQ(j["adversarial"]["lambda"].get<double>(), 5e-6);
  EXPECT_EQ(j["preset"], "daic-mel");
  const ModelConfig m = resolve_model_config(c, 107);
  EXPECT_EQ(m.lstm_layers, 4);
  EXPECT_EQ(m.n_speakers, 107);
}

TEST(ExperimentConfig, Overrides) {
  const auto c = parse_experiment_config(ConfigFile::parse(
      "[experiment]\nmanifest = m.csv\nfeature_kind = raw\npreset = conv-raw\n"
      "[model]\nlstm_hidden = 8\ndropout = 0.1\nconv = 16:8:4, 3:1:4\n"
      "[adversarial]\noptimizer = adam\n"),
      "/base");
  EXPECT_EQ(c.manifest_path, std::filesystem::path("/base/m.csv"));
  const ModelConfig m = resolve_model_config(c, 5);
  EXPECT_EQ(m.lstm_hidden, 8);
  EXPECT_EQ(m.lstm_layers, 4);
  EXPECT_EQ(m.dropout_p, 0.1);
  ASSERT_EQ(m.conv_layers.size(), 2u);
  EXPECT_EQ(m.conv_layers[0], (ConvSpec{16, 8, 4}));
  EXPECT_EQ(c.adversarial.optimizer, OptimizerKind::kAdam);
}

TEST(ExperimentConfig, Rejections) {
  auto parse = [](const std::string& text) {
    return parse_experiment_config(ConfigFile::parse(text));
  };
  EXPECT_THROW(parse("[experiment]\nfeature_kind = mel\n"), ValidationError);
  EXPECT_THROW(parse("[experiment]\nmanifest = m\n[adversarial]\nlambda = -1\n"), ValidationError);
  EXPECT_THROW(parse("[experiment]\nmanifest = m\npreset = daic-mfcc\n"), ValidationError);
  EXPECT_THROW(parse("[experiment]\nmanifest = m\nsede = 3\n"), ValidationError);
  EXPECT_THROW(parse("[experiment]\nmanifest = m\nseed = three\n"), ValidationError);
  EXPECT_THROW(parse("[experiment]\nmanifest = m\n[model]\nconv = 3x1\n"), ValidationError);
  EXPECT_THROW(parse("[experiment]\nmanifest = m\nfeature_kind = ssl\n"), ValidationError);
  const auto mismatch = parse("[experiment]\nmanifest = m\npreset = daic-ssl\n");
  EXPECT_THROW(resolve_model_config(mismatch, 4), ValidationError);
}

TEST(Cli, RunEvalCompareAndDeterminism) {
  TempDir dir;
  write_text(dir / "exp.cfg", tiny_config(dir / "out"));
  ASSERT_EQ(cli("run --config " + (dir / "exp.cfg").string()), 0);
  const auto results_path = dir / "out/results.json";
  const std::string first = read_file(results_path);
  const auto j = nlohmann::json::parse(first);
  for (const char* key : {"config", "f1_nd", "f1_d", "f1_avg", "jratio_per_layer", "mcnemar_p",
                          "seed", "jratio_speaker", "jratio_depression"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["mcnemar_p"].is_null());
  EXPECT_EQ(j["seed"], 5);
  EXPECT_TRUE(std::filesystem::exists(dir / "out/model_0.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out/history.json"));

  const std::string ckpt = read_file(dir / "out/model_0.ckpt");
  ASSERT_EQ(cli("run --config " + (dir / "exp.cfg").string()), 0);
  EXPECT_EQ(read_file(results_path), first);
  EXPECT_EQ(read_file(dir / "out/model_0.ckpt"), ckpt);

  ASSERT_EQ(cli("eval --config " + (dir / "exp.cfg").string()), 0);
  EXPECT_EQ(read_file(results_path), first);

  const std::string cmp = std::string(ADVSPK_CLI_PATH) + " compare " + results_path.string() +
                          " " + results_path.string() + " > " + (dir / "cmp.txt").string();
  ASSERT_EQ(std::system(cmp.c_str()), 0);
  EXPECT_EQ(read_file(dir / "cmp.txt"), "mcnemar_p 1\n");

  write_text(dir / "adv.cfg",
             tiny_config(dir / "adv", "baseline_results = " + results_path.string() + "\n"));
  std::string adv = read_file(dir / "adv.cfg");
  adv.replace(adv.find("lambda = 0"), 10, "lambda = 0.01");
  write_text(dir / "adv.cfg", adv);
  ASSERT_EQ(cli("run --config " + (dir / "adv.cfg").string()), 0);
  const auto ja = nlohmann::json::parse(read_file(dir / "adv/results.json"));
  ASSERT_TRUE(ja["mcnemar_p"].is_number());
  EXPECT_GE(ja["mcnemar_p"].get<double>(), 0.0);
  EXPECT_LE(ja["mcnemar_p"].get<double>(), 1.0);
  EXPECT_EQ(ja["config"]["adversarial"]["lambda"].get<double>(), 0.01);
}

TEST(Cli, SeedAndOutOverrides) {
  TempDir dir;
  write_text(dir / "exp.cfg", tiny_config(dir / "ignored"));
  ASSERT_EQ(cli("train --config " + (dir / "exp.cfg").string() + " --seed 9 --out " +
                (dir / "o").string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "o/model_0.ckpt"));
  EXPECT_FALSE(std::filesystem::exists(dir / "ignored"));
  EXPECT_EQ(load_checkpoint(dir / "o/model_0.ckpt").seed(), 9u + kInitSeedOffset);
}

TEST(Cli, JRatioOnUntrainedCheckpoint) {
  TempDir dir;
  write_text(dir / "exp.cfg", tiny_config(dir / "out"));
  const auto cfg = load_experiment_config(dir / "exp.cfg");
  std::filesystem::create_directories(dir / "out");
  save_checkpoint(dir / "out/model_0.ckpt", Model::build(resolve_model_config(cfg, 12), 1));
  ASSERT_EQ(cli("jratio --config " + (dir / "exp.cfg").string()), 0);
  const auto j = nlohmann::json::parse(read_file(dir / "out/jratio.json"));
  for (const char* kind : {"speaker", "depression"}) {
    for (const auto& v : j[kind]["per_layer"]) {
      EXPECT_TRUE(std::isfinite(v.get<double>()));
      EXPECT_GE(v.get<double>(), 0.0);
      EXPECT_LE(v.get<double>(), 4.0);
    }
  }
}

TEST(Cli, FeaturesReuseCache) {
  TempDir dir;
  write_text(dir / "exp.cfg", tiny_config(dir / "out"));
  std::string text = read_file(dir / "exp.cfg");
  const auto cache = dir / "feature_cache";
  text.replace(text.find("cache_dir = "), text.find('\n', text.find("cache_dir = ")) - text.find("cache_dir = "),
               "cache_dir = " + cache.string());
  write_text(dir / "exp.cfg", text);
  ASSERT_EQ(cli("features --config " + (dir / "exp.cfg").string()), 0);
  const auto file = cache / "mel_mvn" / "spk000_u00.ftr";
  ASSERT_TRUE(std::filesystem::exists(file));
  const std::string first = read_file(file);
  const auto stamp = std::filesystem::last_write_time(file);
  ASSERT_EQ(cli("features --config " + (dir / "exp.cfg").string()), 0);
  EXPECT_EQ(read_file(file), first);
  EXPECT_EQ(std::filesystem::last_write_time(file), stamp);
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(cache / "mel_mvn")) n += e.is_regular_file();
  EXPECT_EQ(n, 96);
}

TEST(Cli, Synth) {
  TempDir dir;
  ASSERT_EQ(cli("synth --out " + (dir / "c").string() + " --speakers 4 --utterances 1 --seconds 7.68 --seed 2"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "c/manifest.csv"));
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("train"), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("run --config " + (dir / "missing.cfg").string()), 1);
  write_text(dir / "bad.cfg", tiny_config(dir / "out", "colour = blue\n"));
  EXPECT_EQ(cli("run --config " + (dir / "bad.cfg").string()), 1);
  EXPECT_EQ(cli("synth --out " + (dir / "c").string() + " --speakers 2"), 1);
  // Output directory path is an existing regular file: writing fails.
  write_text(dir / "blocker", "x");
  write_text(dir / "exp.cfg", tiny_config(dir / "blocker"));
  EXPECT_EQ(cli("run --config " + (dir / "exp.cfg").string()), 2);
  EXPECT_EQ(cli("compare " + (dir / "nope.json").string() + " " + (dir / "nope.json").string()), 1);
}

}  // namespace
}  // namespace advspk
