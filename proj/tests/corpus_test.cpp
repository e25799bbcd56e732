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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "advspk/corpus.hpp"
#include "advspk/error.hpp"
#include "advspk/model.hpp"
#include "advspk/wav.hpp"
#include "test_util.hpp"

namespace advspk {
namespace {

using testing::TempDir;

constexpr const char* kHeader = "utterance_id,speaker_id,audio_path,depression_label,partition\n";

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void tone(const std::filesystem::path& p, int sample_rate = 16000) {
  std::vector<double> s(1600);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 0.3 * std::sin(0.05 * static_cast<double>(i));
  std::filesystem::create_directories(p.parent_path());
  write_wav(p, s, sample_rate);
}

std::string expect_error(const std::filesystem::path& manifest) {
  try {
    load_manifest(manifest);
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.module(), "corpus");
    return e.what();
  }
  ADD_FAILURE() << "no error for " << manifest;
  return {};
}

TEST(Wav, RoundTripWithinQuantization) {
  TempDir dir;
  std::vector<double> s(1000);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.99, 0.99);
  for (double& v : s) v = u(rng);
  write_wav(dir / "a.wav", s);
  const auto info = read_wav_info(dir / "a.wav");
  EXPECT_EQ(info.sample_rate, 16000);
  EXPECT_EQ(info.channels, 1);
  EXPECT_EQ(info.bits_per_sample, 16);
  EXPECT_EQ(info.num_frames, 1000u);
  const auto r = read_wav(dir / "a.wav");
  ASSERT_EQ(r.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(r[i], s[i], 0.5 / 32768.0 + 1e-15);

  write_wav(dir / "b.wav", s, 8000);
  EXPECT_THROW(read_wav(dir / "b.wav"), ValidationError);
  write_text(dir / "c.wav", "RIFF nonsense");
  EXPECT_THROW(read_wav_info(dir / "c.wav"), ValidationError);
}

TEST(Manifest, MinimalTwoSpeakers) {
  TempDir dir;
  tone(dir / "wav/a.wav");
  tone(dir / "wav/b.wav");
  tone(dir / "wav/c.wav");
  write_text(dir / "m.csv", std::string(kHeader) +
                                "# comment\n"
                                "a,s2,wav/a.wav,1,train\n"
                                "\n"
                                "b,s1,wav/b.wav,0,train\n"
                                "c,s3,wav/c.wav,0,eval\n");
  const Manifest m = load_manifest(dir / "m.csv");
  ASSERT_EQ(m.records.size(), 3u);
  EXPECT_EQ(m.n_train_speakers(), 2);
  EXPECT_EQ(m.index_of("s1"), 0);
  EXPECT_EQ(m.index_of("s2"), 1);
  EXPECT_EQ(m.index_of("s3"), -1);
  EXPECT_EQ(m.partition(Partition::kEval).size(), 1u);
  EXPECT_EQ(m.resolve_audio(m.records[0]), dir / "wav/a.wav");
  const auto u = load_utterance(m, m.records[0]);
  EXPECT_EQ(u.samples.size(), 1600u);
  EXPECT_EQ(u.speaker_id, "s2");
  EXPECT_EQ(u.depression_label, 1);
}

TEST(Manifest, Errors) {
  TempDir dir;
  tone(dir / "wav/a.wav");
  tone(dir / "wav/slow.wav", 8000);
  auto write = [&](const std::string& name, const std::string& rows) {
    write_text(dir / name, std::string(kHeader) + rows);
    return dir / name;
  };
  EXPECT_NE(expect_error(write("inconsistent.csv", "a,s1,wav/a.wav,0,train\n"
                                                   "b,s1,wav/a.wav,1,train\n"
                                                   "c,s2,wav/a.wav,0,train\n"))
                .find("inconsistent label"),
            std::string::npos);
  EXPECT_NE(expect_error(write("dup.csv", "a,s1,wav/a.wav,0,train\n"
                                          "a,s2,wav/a.wav,0,train\n"))
                .find("duplicate"),
            std::string::npos);
  EXPECT_NE(expect_error(write("overlap.csv", "a,s1,wav/a.wav,0,train\n"
                                              "b,s2,wav/a.wav,0,train\n"
                                              "c,s1,wav/a.wav,0,eval\n"))
                .find("s1"),
            std::string::npos);
  expect_error(write("one.csv", "a,s1,wav/a.wav,0,train\nb,s2,wav/a.wav,0,eval\n"));
  expect_error(write("label.csv", "a,s1,wav/a.wav,2,train\nb,s2,wav/a.wav,0,train\n"));
  expect_error(write("part.csv", "a,s1,wav/a.wav,0,dev\nb,s2,wav/a.wav,0,train\n"));
  expect_error(write("fields.csv", "a,s1,wav/a.wav,0\n"));
  expect_error(write("missing.csv", "a,s1,wav/none.wav,0,train\nb,s2,wav/a.wav,0,train\n"));
  EXPECT_NE(expect_error(write("rate.csv", "a,s1,wav/slow.wav,0,train\nb,s2,wav/a.wav,0,train\n"))
                .find("sample_rate"),
            std::string::npos);
  write_text(dir / "header.csv", "id,speaker,path,label,split\na,s1,wav/a.wav,0,train\n");
  expect_error(dir / "header.csv");
  EXPECT_THROW(load_manifest(dir / "nope.csv"), ValidationError);
}

TEST(Manifest, LargeTrainSet) {
  TempDir dir;
  std::string rows = kHeader;
  for (int s = 0; s < 107; ++s) {
    rows += "u" + std::to_string(s) + ",p" + std::to_string(300 + s) + ",x.wav," +
            std::to_string(s % 2) + ",train\n";
  }
  for (int s = 0; s < 35; ++s) {
    rows += "e" + std::to_string(s) + ",q" + std::to_string(s) + ",x.wav,0,eval\n";
  }
  write_text(dir / "m.csv", rows);
  LoadOptions opts;
  opts.check_files = false;
  const Manifest m = load_manifest(dir / "m.csv", opts);
  EXPECT_EQ(m.n_train_speakers(), 107);
  EXPECT_EQ(preset("daic-mel", m.n_train_speakers()).n_speakers, 107);
}

TEST(Manifest, WriteLoadIdentityAndStableIndices) {
  TempDir dir;
  std::vector<UtteranceRecord> records;
  for (int s = 0; s < 6; ++s) {
    for (int u = 0; u < 2; ++u) {
      UtteranceRecord r;
      r.speaker_id = "spk" + std::to_string((s * 7) % 6);
      r.utterance_id = r.speaker_id + "_" + std::to_string(u);
      r.audio_path = "wav/" + r.utterance_id + ".wav";
      r.depression_label = ((s * 7) % 6) % 2;
      r.partition = ((s * 7) % 6) < 4 ? Partition::kTrain : Partition::kEval;
      records.push_back(r);
    }
  }
  Manifest m;
  m.records = records;
  validate_manifest(m);
  write_manifest(dir / "a.csv", m);
  LoadOptions opts;
  opts.check_files = false;
  const Manifest a = load_manifest(dir / "a.csv", opts);
  EXPECT_EQ(a.records, records);

  std::mt19937_64 rng(3);
  Manifest shuffled;
  shuffled.records = records;
  std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);
  validate_manifest(shuffled);
  EXPECT_EQ(shuffled.speaker_index, a.speaker_index);
  EXPECT_TRUE(std::is_sorted(a.train_speakers.begin(), a.train_speakers.end()));
}

ExperimentResults sample_results() {
  ExperimentResults r;
  r.config = {{"preset", "daic-mel"}, {"lambda", 5e-6}};
  r.seed = 7;
  r.evaluation.f1_nd = 0.7;
  r.evaluation.f1_d = 0.538;
  r.evaluation.f1_avg = 0.619;
  r.evaluation.n_eval = 35;
  r.speaker.per_layer = {4.81, 4.6, 1.0 / 3.0};
  r.speaker.mean = (4.81 + 4.6 + 1.0 / 3.0) / 3.0;
  r.speaker.d = 128;
  SeparabilityReport dep;
  dep.class_kind = ClassKind::kDepression;
  dep.per_layer = {0.25};
  dep.mean = 0.25;
  dep.d = 128;
  r.depression = dep;
  r.predictions = {{"u1", 1, 0.7, 1}, {"u2", 0, 0.1 + 0.2, 0}};
  r.checkpoints = {"model_0.ckpt"};
  return r;
}

TEST(Results, RoundTripAndStableBytes) {
  TempDir dir;
  const auto r = sample_results();
  const auto path = persist_results(r, dir / "out");
  const auto j = nlohmann::json::parse(read_text(path));
  for (const char* key : {"config", "f1_nd", "f1_d", "f1_avg", "jratio_per_layer", "mcnemar_p", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["mcnemar_p"].is_null());
  const auto back = read_results(path);
  EXPECT_EQ(back.evaluation.f1_avg, 0.619);
  EXPECT_EQ(back.speaker.per_layer, r.speaker.per_layer);
  EXPECT_EQ(back.predictions[1].probability, 0.1 + 0.2);
  EXPECT_EQ(back.seed, 7u);
  ASSERT_TRUE(back.depression.has_value());
  EXPECT_EQ(back.depression->per_layer, r.depression->per_layer);
  EXPECT_FALSE(back.evaluation.mcnemar_p.has_value());
  const std::string first = read_text(path);
  persist_results(back, dir / "out");
  EXPECT_EQ(read_text(path), first);
}

TEST(Results, EmptyReport) {
  TempDir dir;
  const auto path = persist_results(ExperimentResults{}, dir.path());
  const auto j = nlohmann::json::parse(read_text(path));
  EXPECT_TRUE(j["jratio_per_layer"].is_array());
  EXPECT_TRUE(j["jratio_per_layer"].empty());
  EXPECT_TRUE(j["predictions"].empty());
  const auto back = read_results(path);
  EXPECT_TRUE(back.speaker.per_layer.empty());
}

TEST(Results, MalformedFile) {
  TempDir dir;
  write_text(dir / "bad.json", "{not json");
  EXPECT_THROW(read_results(dir / "bad.json"), ValidationError);
  write_text(dir / "partial.json", "{\"f1_avg\": 0.5}");
  EXPECT_THROW(read_results(dir / "partial.json"), ValidationError);
}

}  // namespace
}  // namespace advspk
