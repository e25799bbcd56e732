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
#include <fstream>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "advspk/error.hpp"
#include "advspk/model.hpp"
#include "test_util.hpp"

namespace advspk {
namespace {

using testing::TempDir;

Eigen::MatrixXd random_input(long t, long d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd x(t, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

ModelConfig small_config() {
  ModelConfig c;
  c.input_dims = 3;
  c.conv_layers = {{2, 1, 5}};
  c.lstm_layers = 2;
  c.lstm_hidden = 2;
  c.n_speakers = 3;
  return c;
}

TEST(Presets, SixConfigurations) {
  const auto dm = preset("daic-mel", 107);
  EXPECT_EQ(dm.conv_layers.size(), 1u);
  EXPECT_EQ(dm.conv_layers[0].kernel, 3);
  EXPECT_EQ(dm.conv_layers[0].stride, 1);
  EXPECT_EQ(dm.lstm_layers, 4);
  EXPECT_EQ(dm.lstm_hidden, 128);
  EXPECT_EQ(dm.input_dims, 40);
  const Model m = Model::build(dm, 1);
  EXPECT_EQ(m.tensor("mdd_head.weight").rows, 1);
  EXPECT_EQ(m.tensor("spk_head.weight").rows, 107);

  const auto dr = preset("daic-raw", 10);
  ASSERT_EQ(dr.conv_layers.size(), 2u);
  EXPECT_EQ(dr.conv_layers[0].kernel, 1024);
  EXPECT_EQ(dr.conv_layers[0].stride, 512);
  EXPECT_EQ(dr.conv_layers[1].kernel, 3);
  EXPECT_EQ(dr.lstm_layers, 2);
  EXPECT_EQ(dr.lstm_hidden, 128);
  EXPECT_EQ(dr.input_dims, 1);

  const auto ds = preset("daic-ssl", 10);
  EXPECT_TRUE(ds.conv_layers.empty());
  EXPECT_EQ(ds.lstm_layers, 6);
  EXPECT_EQ(ds.lstm_hidden, 256);

  const auto cm = preset("conv-mel", 10);
  EXPECT_EQ(cm.conv_layers.size(), 2u);
  EXPECT_EQ(cm.lstm_layers, 4);
  EXPECT_EQ(cm.lstm_hidden, 128);

  const auto cr = preset("conv-raw", 10);
  ASSERT_EQ(cr.conv_layers.size(), 2u);
  EXPECT_EQ(cr.conv_layers[0].kernel, 1024);
  EXPECT_EQ(cr.lstm_layers, 4);
  EXPECT_EQ(cr.lstm_hidden, 512);

  const auto cs = preset("conv-ssl", 10);
  EXPECT_TRUE(cs.conv_layers.empty());
  EXPECT_EQ(cs.lstm_layers, 6);
  EXPECT_EQ(cs.lstm_hidden, 256);
  EXPECT_EQ(cs.input_dims, 1024);

  EXPECT_EQ(preset_names().size(), 6u);
  EXPECT_THROW(preset("daic-mfcc", 10), ValidationError);
}

TEST(Model, ParameterCountClosedForm) {
  const ModelConfig c = small_config();
  // conv 5*2*3 + 5; lstm 4*(2*(5+2)+2) + 4*(2*(2+2)+2); heads (2+1) + (3*2+3)
  const Eigen::Index hand = (30 + 5) + 64 + 40 + 3 + 9;
  EXPECT_EQ(hand, 151);
  EXPECT_EQ(expected_parameter_count(c), hand);
  EXPECT_EQ(Model::build(c, 0).parameter_count(), hand);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    ModelConfig r;
    r.input_dims = 1 + static_cast<int>(rng() % 6);
    const int n_conv = static_cast<int>(rng() % 3);
    Eigen::Index count = 0;
    int d = r.input_dims;
    for (int l = 0; l < n_conv; ++l) {
      const ConvSpec s{1 + static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 2),
                       1 + static_cast<int>(rng() % 5)};
      r.conv_layers.push_back(s);
      count += s.out_channels * s.kernel * d + s.out_channels;
      d = s.out_channels;
    }
    r.lstm_layers = 1 + static_cast<int>(rng() % 3);
    r.lstm_hidden = 1 + static_cast<int>(rng() % 5);
    r.n_speakers = 2 + static_cast<int>(rng() % 5);
    const int h = r.lstm_hidden;
    for (int l = 0; l < r.lstm_layers; ++l) {
      count += 4 * (h * (d + h) + h);
      d = h;
    }
    count += (h + 1) + (r.n_speakers * h + r.n_speakers);
    EXPECT_EQ(Model::build(r, rng()).parameter_count(), count);
  }
}

TEST(Model, DeterministicInit) {
  const auto a = Model::build(small_config(), 42);
  const auto b = Model::build(small_config(), 42);
  const auto c = Model::build(small_config(), 43);
  EXPECT_TRUE(a.parameters() == b.parameters());
  EXPECT_FALSE(a.parameters() == c.parameters());
  // Forget-gate slice (rows H..2H) is shifted by +1 from the uniform draw.
  const Eigen::VectorXd forget = a.view(a.tensor("lstm0.bias")).col(0).segment(2, 2);
  const double bound = 1.0 / std::sqrt(2.0);
  EXPECT_GE(forget.minCoeff(), 1.0 - bound);
  EXPECT_LE(forget.maxCoeff(), 1.0 + bound);
}

TEST(Model, ForwardContract) {
  ModelConfig c = small_config();
  c.dropout_p = 0.0;
  const Model m = Model::build(c, 3);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_input(8 + trial, 3, static_cast<std::uint64_t>(trial));
    const auto e = m.forward(x, false, nullptr);
    const auto t = m.forward(x, true, &rng);
    EXPECT_GT(e.p_mdd, 0.0);
    EXPECT_LT(e.p_mdd, 1.0);
    EXPECT_EQ(e.p_mdd, t.p_mdd);
    EXPECT_TRUE(e.spk_scores == t.spk_scores);
    ASSERT_EQ(e.hidden_states.size(), 2u);
    for (const auto& h : e.hidden_states) {
      EXPECT_EQ(h.cols(), 2);
      EXPECT_EQ(h.rows(), time_steps(c, x.rows()).back());
    }
    EXPECT_EQ(e.spk_scores.size(), 3);
  }
}

TEST(Model, DropoutOnlyInTrainMode) {
  ModelConfig c = small_config();
  c.dropout_p = 0.5;
  const Model m = Model::build(c, 3);
  const auto x = random_input(30, 3, 7);
  const auto e1 = m.forward(x, false, nullptr);
  const auto e2 = m.forward(x, false, nullptr);
  EXPECT_EQ(e1.p_mdd, e2.p_mdd);
  std::mt19937_64 rng(1);
  const auto t = m.forward(x, true, &rng);
  EXPECT_NE(t.p_mdd, e1.p_mdd);
}

TEST(Model, TimeReductionArithmetic) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    ModelConfig c;
    c.input_dims = 1;
    const int n_conv = 1 + static_cast<int>(rng() % 2);
    for (int l = 0; l < n_conv; ++l) {
      c.conv_layers.push_back({1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 3), 2});
    }
    const long t_in = 100 + static_cast<long>(rng() % 2000);
    long t = t_in;
    std::vector<long> expect{t};
    for (const auto& s : c.conv_layers) {
      t = (t - s.kernel) / s.stride + 1;
      t /= 3;
      expect.push_back(t);
    }
    EXPECT_EQ(time_steps(c, t_in), expect);
  }
  ModelConfig c;
  c.conv_layers = {{3, 1, 2}};
  EXPECT_THROW(time_steps(c, 4), ValidationError);
  const auto raw = preset("daic-raw", 4);
  EXPECT_EQ(time_steps(raw, 61440), (std::vector<long>{61440, 39, 12}));
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  TempDir dir;
  const Model m = Model::build(small_config(), 11);
  save_checkpoint(dir / "m.ckpt", m);
  const Model r = load_checkpoint(dir / "m.ckpt", small_config());
  EXPECT_EQ(r.config(), m.config());
  EXPECT_EQ(r.seed(), m.seed());
  EXPECT_TRUE(r.parameters() == m.parameters());
  const auto x = random_input(20, 3, 5);
  const auto a = m.forward(x, false, nullptr);
  const auto b = r.forward(x, false, nullptr);
  EXPECT_EQ(a.p_mdd, b.p_mdd);
  EXPECT_TRUE(a.spk_scores == b.spk_scores);
  for (std::size_t l = 0; l < a.hidden_states.size(); ++l) {
    EXPECT_TRUE(a.hidden_states[l] == b.hidden_states[l]);
  }
}

TEST(Checkpoint, Rejections) {
  TempDir dir;
  const Model m = Model::build(small_config(), 11);
  save_checkpoint(dir / "m.ckpt", m);
  ModelConfig other = small_config();
  other.lstm_hidden = 3;
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt", other), ValidationError);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), ValidationError);

  std::ifstream in(dir / "m.ckpt", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  {
    std::ofstream out(dir / "cut.ckpt", std::ios::binary);
    out << bytes.substr(0, bytes.size() - 8);
  }
  EXPECT_THROW(load_checkpoint(dir / "cut.ckpt"), ValidationError);
  {
    std::ofstream out(dir / "junk.ckpt", std::ios::binary);
    out << "not a checkpoint\n";
  }
  EXPECT_THROW(load_checkpoint(dir / "junk.ckpt"), ValidationError);
}

TEST(ModelConfig, JsonRoundTripAndValidation) {
  ModelConfig c = preset("conv-raw", 12);
  EXPECT_EQ(model_config_from_json(to_json(c)), c);
  ModelConfig bad = small_config();
  bad.n_speakers = 1;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = small_config();
  bad.dropout_p = 1.0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

}  // namespace
}  // namespace advspk
