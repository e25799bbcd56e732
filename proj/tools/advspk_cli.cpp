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

// advspk command-line entry point.
//
//   advspk synth    --out DIR [--seed S] [--speakers N] ...
//   advspk features --config FILE [--out DIR]
//   advspk train    --config FILE [--seed S] [--out DIR]
//   advspk eval     --config FILE [--seed S] [--out DIR] [--baseline results.json]
//   advspk jratio   --config FILE [--out DIR]
//   advspk run      --config FILE [--seed S] [--out DIR] [--baseline results.json]
//   advspk compare  A.json B.json
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "advspk/error.hpp"
#include "advspk/experiment.hpp"
#include "advspk/synthgen.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> baseline;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_seed, bool with_baseline) {
  cmd->add_option("--config", f.config, "experiment config file")->required();
  if (with_seed) cmd->add_option("--seed", f.seed, "master seed override");
  cmd->add_option("--out", f.out, "output directory override");
  if (with_baseline) {
    cmd->add_option("--baseline", f.baseline, "results.json to compare against (McNemar)");
  }
}

advspk::ExperimentConfig load(const CommonFlags& f) {
  advspk::ExperimentConfig c = advspk::load_experiment_config(f.config);
  if (f.seed) {
    c.seed = *f.seed;
    c.sampling.seed = *f.seed;
    c.adversarial.seed = *f.seed;
  }
  if (f.out) c.output_dir = *f.out;
  if (f.baseline) c.baseline_results = *f.baseline;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker-adversarial depression classification toolkit"};
  app.require_subcommand(1);

  advspk::SynthCorpusConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "corpus seed");
  synth_cmd->add_option("--speakers", synth.n_speakers, "number of speakers");
  synth_cmd->add_option("--utterances", synth.utterances_per_speaker, "utterances per speaker");
  synth_cmd->add_option("--seconds", synth.utterance_seconds, "utterance duration (s)");
  synth_cmd->add_option("--depressed-fraction", synth.depressed_fraction,
                        "share of depressed speakers");
  synth_cmd->add_option("--eval-fraction", synth.eval_fraction,
                        "share of speakers per class held out");

  CommonFlags features_f, train_f, eval_f, jratio_f, run_f;
  auto* features_cmd = app.add_subcommand("features", "precompute and cache feature matrices");
  add_common(features_cmd, features_f, false, false);
  auto* train_cmd = app.add_subcommand("train", "train the (ensemble of) models");
  add_common(train_cmd, train_f, true, false);
  auto* eval_cmd = app.add_subcommand("eval", "evaluate saved checkpoints");
  add_common(eval_cmd, eval_f, true, true);
  auto* jratio_cmd = app.add_subcommand("jratio", "per-layer J-ratios of saved checkpoints");
  add_common(jratio_cmd, jratio_f, false, false);
  auto* run_cmd = app.add_subcommand("run", "full pipeline: train, evaluate, analyze");
  add_common(run_cmd, run_f, true, true);

  std::string cmp_a, cmp_b;
  auto* compare_cmd = app.add_subcommand("compare", "McNemar test between two results files");
  compare_cmd->add_option("a", cmp_a, "first results.json")->required();
  compare_cmd->add_option("b", cmp_b, "second results.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) {
      const auto corpus = advspk::synth_corpus(synth, synth_out);
      std::cout << corpus.manifest_path.string() << '\n';
    } else if (*features_cmd) {
      std::cout << advspk::run_features(load(features_f)).string() << '\n';
    } else if (*train_cmd) {
      std::cout << advspk::run_train(load(train_f)).string() << '\n';
    } else if (*eval_cmd) {
      std::cout << advspk::run_eval(load(eval_f)).string() << '\n';
    } else if (*jratio_cmd) {
      std::cout << advspk::run_jratio(load(jratio_f)).string() << '\n';
    } else if (*run_cmd) {
      std::cout << advspk::run_experiment(load(run_f)).string() << '\n';
    } else if (*compare_cmd) {
      const double p =
          advspk::compare_results(advspk::read_results(cmp_a), advspk::read_results(cmp_b));
      std::printf("mcnemar_p %.17g\n", p);
    }
  } catch (const advspk::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
