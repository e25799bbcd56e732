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

#include "advspk/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "advspk/error.hpp"
#include "advspk/segmentation.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "model";
constexpr const char* kCheckpointMagic = "ADVSPK-CHECKPOINT 1\n";

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

int conv_in_channels(const ModelConfig& c, std::size_t layer) {
  return layer == 0 ? c.input_dims : c.conv_layers[layer - 1].out_channels;
}

int lstm_in_dims(const ModelConfig& c, int layer) {
  if (layer > 0) return c.lstm_hidden;
  return c.conv_layers.empty() ? c.input_dims : c.conv_layers.back().out_channels;
}

std::string conv_name(std::size_t l, const char* what) {
  return "conv" + std::to_string(l) + "." + what;
}

std::string lstm_name(int l, const char* what) {
  return "lstm" + std::to_string(l) + "." + what;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dims < 1) throw ValidationError(kModule, "input_dims must be >= 1");
  for (const auto& c : conv_layers) {
    if (c.kernel < 1 || c.stride < 1 || c.out_channels < 1) {
      throw ValidationError(kModule, "conv layers need K >= 1, S >= 1, channels >= 1");
    }
  }
  if (lstm_layers < 1) throw ValidationError(kModule, "at least one LSTM layer is required");
  if (lstm_hidden < 1) throw ValidationError(kModule, "lstm_hidden must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw ValidationError(kModule, "dropout_p must lie in [0, 1)");
  }
  if (n_speakers < 2) throw ValidationError(kModule, "speaker head needs >= 2 speakers");
  if (pool_kernel < 1) throw ValidationError(kModule, "pool_kernel must be >= 1");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"daic-mel", "daic-raw", "daic-ssl",
                                                 "conv-mel", "conv-raw", "conv-ssl"};
  return names;
}

ModelConfig preset(std::string_view name, int n_speakers, std::optional<int> input_dims) {
  ModelConfig c;
  c.n_speakers = n_speakers;
  c.preset_name = std::string(name);
  const ConvSpec k3{3, 1, 128};
  const ConvSpec k1024{1024, 512, 128};
  if (name == "daic-mel") {
    c.feature_kind = FeatureKind::kMel;
    c.input_dims = 40;
    c.conv_layers = {k3};
    c.lstm_layers = 4;
    c.lstm_hidden = 128;
  } else if (name == "daic-raw") {
    c.feature_kind = FeatureKind::kRaw;
    c.input_dims = 1;
    c.conv_layers = {k1024, k3};
    c.lstm_layers = 2;
    c.lstm_hidden = 128;
  } else if (name == "daic-ssl") {
    c.feature_kind = FeatureKind::kSsl;
    c.input_dims = 768;
    c.lstm_layers = 6;
    c.lstm_hidden = 256;
  } else if (name == "conv-mel") {
    c.feature_kind = FeatureKind::kMel;
    c.input_dims = 40;
    c.conv_layers = {k3, k3};
    c.lstm_layers = 4;
    c.lstm_hidden = 128;
  } else if (name == "conv-raw") {
    c.feature_kind = FeatureKind::kRaw;
    c.input_dims = 1;
    c.conv_layers = {k1024, k3};
    c.lstm_layers = 4;
    c.lstm_hidden = 512;
  } else if (name == "conv-ssl") {
    c.feature_kind = FeatureKind::kSsl;
    c.input_dims = 1024;
    c.lstm_layers = 6;
    c.lstm_hidden = 256;
  } else {
    throw ValidationError(kModule, "unknown preset '" + std::string(name) + "'");
  }
  if (input_dims) c.input_dims = *input_dims;
  c.validate();
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  nlohmann::json conv = nlohmann::json::array();
  for (const auto& s : c.conv_layers) {
    conv.push_back({{"kernel", s.kernel}, {"stride", s.stride}, {"out_channels", s.out_channels}});
  }
  return {{"feature_kind", std::string(to_string(c.feature_kind))},
          {"input_dims", c.input_dims},
          {"conv_layers", conv},
          {"lstm_layers", c.lstm_layers},
          {"lstm_hidden", c.lstm_hidden},
          {"dropout_p", c.dropout_p},
          {"n_speakers", c.n_speakers},
          {"pool_kernel", c.pool_kernel},
          {"preset_name", c.preset_name ? nlohmann::json(*c.preset_name) : nlohmann::json()}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.feature_kind = parse_feature_kind(j.at("feature_kind").get<std::string>());
    c.input_dims = j.at("input_dims").get<int>();
    for (const auto& s : j.at("conv_layers")) {
      c.conv_layers.push_back({s.at("kernel").get<int>(), s.at("stride").get<int>(),
                               s.at("out_channels").get<int>()});
    }
    c.lstm_layers = j.at("lstm_layers").get<int>();
    c.lstm_hidden = j.at("lstm_hidden").get<int>();
    c.dropout_p = j.at("dropout_p").get<double>();
    c.n_speakers = j.at("n_speakers").get<int>();
    c.pool_kernel = j.at("pool_kernel").get<int>();
    if (j.contains("preset_name") && !j["preset_name"].is_null()) {
      c.preset_name = j["preset_name"].get<std::string>();
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, std::string("malformed model config: ") + e.what());
  }
}

std::vector<long> time_steps(const ModelConfig& config, long input_frames) {
  std::vector<long> steps{input_frames};
  long t = input_frames;
  for (std::size_t l = 0; l < config.conv_layers.size(); ++l) {
    const auto& c = config.conv_layers[l];
    if (t < c.kernel) {
      throw ValidationError(kModule, "conv" + std::to_string(l) + " (K=" +
                                         std::to_string(c.kernel) + ") receives only " +
                                         std::to_string(t) + " steps");
    }
    t = (t - c.kernel) / c.stride + 1;
    t /= config.pool_kernel;
    if (t < 1) {
      throw ValidationError(kModule, "max-pool after conv" + std::to_string(l) +
                                         " leaves no time steps");
    }
    steps.push_back(t);
  }
  return steps;
}

Eigen::Index expected_parameter_count(const ModelConfig& c) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < c.conv_layers.size(); ++l) {
    const auto& s = c.conv_layers[l];
    n += static_cast<Eigen::Index>(s.out_channels) * s.kernel * conv_in_channels(c, l) +
         s.out_channels;
  }
  const Eigen::Index h = c.lstm_hidden;
  for (int l = 0; l < c.lstm_layers; ++l) {
    n += 4 * (h * (lstm_in_dims(c, l) + h) + h);
  }
  n += h + 1;
  n += static_cast<Eigen::Index>(c.n_speakers) * h + c.n_speakers;
  return n;
}

void Model::layout() {
  tensors_.clear();
  Eigen::Index offset = 0;
  auto add = [&](std::string name, Eigen::Index rows, Eigen::Index cols) {
    tensors_.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
  };
  for (std::size_t l = 0; l < config_.conv_layers.size(); ++l) {
    const auto& s = config_.conv_layers[l];
    add(conv_name(l, "weight"), s.out_channels,
        static_cast<Eigen::Index>(s.kernel) * conv_in_channels(config_, l));
    add(conv_name(l, "bias"), s.out_channels, 1);
  }
  const int h = config_.lstm_hidden;
  for (int l = 0; l < config_.lstm_layers; ++l) {
    add(lstm_name(l, "w_input"), 4 * h, lstm_in_dims(config_, l));
    add(lstm_name(l, "w_hidden"), 4 * h, h);
    add(lstm_name(l, "bias"), 4 * h, 1);
  }
  add("mdd_head.weight", 1, h);
  add("mdd_head.bias", 1, 1);
  add("spk_head.weight", config_.n_speakers, h);
  add("spk_head.bias", config_.n_speakers, 1);
  params_ = Eigen::VectorXd::Zero(offset);
}

Model Model::build(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model m;
  m.config_ = config;
  m.seed_ = seed;
  m.layout();

  std::mt19937_64 rng(seed);
  auto fill_uniform = [&](const TensorInfo& t, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    auto v = m.view(t);
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = u(rng);
    }
  };
  for (std::size_t l = 0; l < config.conv_layers.size(); ++l) {
    const double fan_in = static_cast<double>(config.conv_layers[l].kernel) *
                          conv_in_channels(config, l);
    const double bound = 1.0 / std::sqrt(fan_in);
    fill_uniform(m.tensor(conv_name(l, "weight")), bound);
    fill_uniform(m.tensor(conv_name(l, "bias")), bound);
  }
  const int h = config.lstm_hidden;
  const double lstm_bound = 1.0 / std::sqrt(static_cast<double>(h));
  for (int l = 0; l < config.lstm_layers; ++l) {
    fill_uniform(m.tensor(lstm_name(l, "w_input")), lstm_bound);
    fill_uniform(m.tensor(lstm_name(l, "w_hidden")), lstm_bound);
    const TensorInfo& b = m.tensor(lstm_name(l, "bias"));
    fill_uniform(b, lstm_bound);
    // Forget-gate bias starts at 1.
    m.view(b).middleRows(h, h).array() += 1.0;
  }
  fill_uniform(m.tensor("mdd_head.weight"), lstm_bound);
  fill_uniform(m.tensor("mdd_head.bias"), lstm_bound);
  fill_uniform(m.tensor("spk_head.weight"), lstm_bound);
  fill_uniform(m.tensor("spk_head.bias"), lstm_bound);
  return m;
}

const TensorInfo& Model::tensor(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw ValidationError(kModule, "no tensor named '" + std::string(name) + "'");
}

Eigen::Map<Eigen::MatrixXd> Model::view(const TensorInfo& t) {
  return {params_.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<const Eigen::MatrixXd> Model::view(const TensorInfo& t) const {
  return {params_.data() + t.offset, t.rows, t.cols};
}

std::pair<Eigen::Index, Eigen::Index> Model::speaker_head_range() const {
  const TensorInfo& w = tensor("spk_head.weight");
  const TensorInfo& b = tensor("spk_head.bias");
  return {w.offset, w.size() + b.size()};
}

ForwardOutput Model::forward(const Eigen::MatrixXd& x, bool train_mode, std::mt19937_64* rng,
                             ForwardCache* cache) const {
  if (x.cols() != config_.input_dims) {
    throw ValidationError(kModule, "input has " + std::to_string(x.cols()) +
                                       " dims, model expects " +
                                       std::to_string(config_.input_dims));
  }
  time_steps(config_, static_cast<long>(x.rows()));
  const bool use_dropout = train_mode && config_.dropout_p > 0.0;
  if (use_dropout && rng == nullptr) {
    throw ValidationError(kModule, "dropout in train mode needs a random generator");
  }
  if (cache) {
    cache->conv.assign(config_.conv_layers.size(), {});
    cache->lstm.assign(static_cast<std::size_t>(config_.lstm_layers), {});
  }

  Eigen::MatrixXd act = x;
  for (std::size_t l = 0; l < config_.conv_layers.size(); ++l) {
    const ConvSpec& spec = config_.conv_layers[l];
    const Eigen::Index cin = act.cols();
    const Eigen::Index t_out = (act.rows() - spec.kernel) / spec.stride + 1;
    Eigen::MatrixXd patches(t_out, spec.kernel * cin);
    for (Eigen::Index t = 0; t < t_out; ++t) {
      for (int k = 0; k < spec.kernel; ++k) {
        patches.block(t, k * cin, 1, cin) = act.row(t * spec.stride + k);
      }
    }
    const auto w = view(tensor(conv_name(l, "weight")));
    const auto b = view(tensor(conv_name(l, "bias")));
    Eigen::MatrixXd pre = patches * w.transpose();
    pre.rowwise() += b.col(0).transpose();
    Eigen::MatrixXd relu = pre.cwiseMax(0.0);

    Eigen::MatrixXd mask;
    if (use_dropout) {
      const double keep_scale = 1.0 / (1.0 - config_.dropout_p);
      std::bernoulli_distribution drop(config_.dropout_p);
      mask.resize(relu.rows(), relu.cols());
      for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = drop(*rng) ? 0.0 : keep_scale;
      }
      relu.array() *= mask.array();
    }

    const Eigen::Index pk = config_.pool_kernel;
    const Eigen::Index t_pool = t_out / pk;
    Eigen::MatrixXd pooled(t_pool, relu.cols());
    std::vector<Eigen::Index> argmax(static_cast<std::size_t>(t_pool * relu.cols()));
    for (Eigen::Index c = 0; c < relu.cols(); ++c) {
      for (Eigen::Index t = 0; t < t_pool; ++t) {
        Eigen::Index best = t * pk;
        for (Eigen::Index j = 1; j < pk; ++j) {
          if (relu(t * pk + j, c) > relu(best, c)) best = t * pk + j;
        }
        pooled(t, c) = relu(best, c);
        argmax[static_cast<std::size_t>(c * t_pool + t)] = best;
      }
    }
    if (cache) {
      auto& cc = cache->conv[l];
      cc.patches = std::move(patches);
      cc.pre = std::move(pre);
      cc.dropout_mask = std::move(mask);
      cc.argmax = std::move(argmax);
      cc.in_rows = act.rows();
    }
    act = std::move(pooled);
  }

  ForwardOutput out;
  const int h = config_.lstm_hidden;
  const Eigen::Index steps = act.rows();
  for (int l = 0; l < config_.lstm_layers; ++l) {
    const auto wx = view(tensor(lstm_name(l, "w_input")));
    const auto wh = view(tensor(lstm_name(l, "w_hidden")));
    const auto b = view(tensor(lstm_name(l, "bias")));
    Eigen::MatrixXd gx = act * wx.transpose();
    gx.rowwise() += b.col(0).transpose();

    Eigen::MatrixXd gi(steps, h), gf(steps, h), gg(steps, h), go(steps, h), gc(steps, h),
        gtc(steps, h), gh(steps, h);
    Eigen::VectorXd hprev = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd cprev = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd a(4 * h);
    for (Eigen::Index t = 0; t < steps; ++t) {
      a.noalias() = wh * hprev;
      a += gx.row(t).transpose();
      const Eigen::ArrayXd i = sigmoid(a.segment(0, h).array());
      const Eigen::ArrayXd f = sigmoid(a.segment(h, h).array());
      const Eigen::ArrayXd g = a.segment(2 * h, h).array().tanh();
      const Eigen::ArrayXd o = sigmoid(a.segment(3 * h, h).array());
      const Eigen::ArrayXd c = f * cprev.array() + i * g;
      const Eigen::ArrayXd tc = c.tanh();
      const Eigen::ArrayXd hv = o * tc;
      gi.row(t) = i.transpose();
      gf.row(t) = f.transpose();
      gg.row(t) = g.transpose();
      go.row(t) = o.transpose();
      gc.row(t) = c.transpose();
      gtc.row(t) = tc.transpose();
      gh.row(t) = hv.transpose();
      hprev = hv.matrix();
      cprev = c.matrix();
    }
    if (cache) {
      auto& lc = cache->lstm[static_cast<std::size_t>(l)];
      lc.input = act;
      lc.i = gi;
      lc.f = gf;
      lc.g = gg;
      lc.o = go;
      lc.c = gc;
      lc.tanh_c = gtc;
      lc.h = gh;
    }
    out.hidden_states.push_back(gh);
    act = std::move(gh);
  }

  const Eigen::VectorXd last = act.row(steps - 1).transpose();
  const auto wm = view(tensor("mdd_head.weight"));
  const auto bm = view(tensor("mdd_head.bias"));
  out.mdd_logit = wm.row(0).dot(last) + bm(0, 0);
  out.p_mdd = sigmoid(out.mdd_logit);
  const auto ws = view(tensor("spk_head.weight"));
  const auto bs = view(tensor("spk_head.bias"));
  out.spk_scores = ws * last + bs.col(0);
  return out;
}

void Model::backward(const ForwardOutput& out, const ForwardCache& cache, double d_logit,
                     const Eigen::VectorXd& d_scores, Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());
  auto gview = [&](const TensorInfo& t) {
    return Eigen::Map<Eigen::MatrixXd>(grad.data() + t.offset, t.rows, t.cols);
  };
  const int h = config_.lstm_hidden;
  const Eigen::MatrixXd& top = out.hidden_states.back();
  const Eigen::Index steps = top.rows();
  const Eigen::VectorXd last = top.row(steps - 1).transpose();

  // Heads.
  const TensorInfo& wm_t = tensor("mdd_head.weight");
  gview(wm_t).row(0) += d_logit * last.transpose();
  gview(tensor("mdd_head.bias"))(0, 0) += d_logit;
  Eigen::VectorXd d_last = d_logit * view(wm_t).row(0).transpose();
  if (d_scores.size() > 0) {
    const TensorInfo& ws_t = tensor("spk_head.weight");
    gview(ws_t) += d_scores * last.transpose();
    gview(tensor("spk_head.bias")).col(0) += d_scores;
    d_last += view(ws_t).transpose() * d_scores;
  }

  // LSTM stack, top to bottom.
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(steps, h);
  d_out.row(steps - 1) = d_last.transpose();
  for (int l = config_.lstm_layers - 1; l >= 0; --l) {
    const auto& lc = cache.lstm[static_cast<std::size_t>(l)];
    const TensorInfo& wx_t = tensor(lstm_name(l, "w_input"));
    const TensorInfo& wh_t = tensor(lstm_name(l, "w_hidden"));
    const auto wh = view(wh_t);
    Eigen::MatrixXd d_pre(steps, 4 * h);
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
    Eigen::ArrayXd dc_next = Eigen::ArrayXd::Zero(h);
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
      const Eigen::ArrayXd dh = (d_out.row(t).transpose() + dh_next).array();
      const Eigen::ArrayXd o = lc.o.row(t).transpose().array();
      const Eigen::ArrayXd tc = lc.tanh_c.row(t).transpose().array();
      const Eigen::ArrayXd i = lc.i.row(t).transpose().array();
      const Eigen::ArrayXd f = lc.f.row(t).transpose().array();
      const Eigen::ArrayXd g = lc.g.row(t).transpose().array();
      const Eigen::ArrayXd c_prev =
          t > 0 ? Eigen::ArrayXd(lc.c.row(t - 1).transpose()) : Eigen::ArrayXd::Zero(h);
      const Eigen::ArrayXd d_o = dh * tc;
      const Eigen::ArrayXd dc = dc_next + dh * o * (1.0 - tc.square());
      const Eigen::ArrayXd d_i = dc * g;
      const Eigen::ArrayXd d_g = dc * i;
      const Eigen::ArrayXd d_f = dc * c_prev;
      dc_next = dc * f;
      d_pre.block(t, 0, 1, h) = (d_i * i * (1.0 - i)).transpose();
      d_pre.block(t, h, 1, h) = (d_f * f * (1.0 - f)).transpose();
      d_pre.block(t, 2 * h, 1, h) = (d_g * (1.0 - g.square())).transpose();
      d_pre.block(t, 3 * h, 1, h) = (d_o * o * (1.0 - o)).transpose();
      dh_next.noalias() = wh.transpose() * d_pre.row(t).transpose();
    }
    gview(wx_t).noalias() += d_pre.transpose() * lc.input;
    if (steps > 1) {
      gview(wh_t).noalias() += d_pre.bottomRows(steps - 1).transpose() * lc.h.topRows(steps - 1);
    }
    gview(tensor(lstm_name(l, "bias"))).col(0) += d_pre.colwise().sum().transpose();
    const bool need_input_grad = l > 0 || !config_.conv_layers.empty();
    if (need_input_grad) d_out = d_pre * view(wx_t);
  }

  // Conv stack, top to bottom.
  for (std::size_t li = config_.conv_layers.size(); li-- > 0;) {
    const auto& cc = cache.conv[li];
    const ConvSpec& spec = config_.conv_layers[li];
    const Eigen::Index t_out = cc.pre.rows();
    const Eigen::Index cout = cc.pre.cols();
    const Eigen::Index t_pool = d_out.rows();
    Eigen::MatrixXd d_act = Eigen::MatrixXd::Zero(t_out, cout);
    for (Eigen::Index c = 0; c < cout; ++c) {
      for (Eigen::Index t = 0; t < t_pool; ++t) {
        d_act(cc.argmax[static_cast<std::size_t>(c * t_pool + t)], c) += d_out(t, c);
      }
    }
    if (cc.dropout_mask.size() > 0) d_act.array() *= cc.dropout_mask.array();
    d_act.array() *= (cc.pre.array() > 0.0).cast<double>();

    const TensorInfo& w_t = tensor(conv_name(li, "weight"));
    gview(w_t).noalias() += d_act.transpose() * cc.patches;
    gview(tensor(conv_name(li, "bias"))).col(0) += d_act.colwise().sum().transpose();
    if (li == 0) break;
    const Eigen::MatrixXd d_patches = d_act * view(w_t);
    const Eigen::Index cin = d_patches.cols() / spec.kernel;
    Eigen::MatrixXd d_in = Eigen::MatrixXd::Zero(cc.in_rows, cin);
    for (Eigen::Index t = 0; t < t_out; ++t) {
      for (int k = 0; k < spec.kernel; ++k) {
        d_in.row(t * spec.stride + k) += d_patches.block(t, k * cin, 1, cin);
      }
    }
    d_out = std::move(d_in);
  }
}

std::vector<ForwardOutput> forward(const Model& model, std::span<const Segment> batch,
                                   bool train_mode, std::mt19937_64* rng) {
  std::vector<ForwardOutput> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(model.forward(s.values, train_mode, rng));
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");
  nlohmann::json meta;
  meta["config"] = to_json(model.config());
  meta["seed"] = model.seed();
  meta["parameter_count"] = model.parameter_count();
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : model.tensors()) {
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", t.offset}});
  }
  meta["tensors"] = tensors;
  const std::string meta_text = meta.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure(kModule, "cannot write checkpoint " + path.string());
  out << kCheckpointMagic << meta_text.size() << '\n' << meta_text << '\n';
  out.write(reinterpret_cast<const char*>(model.parameters().data()),
            static_cast<std::streamsize>(model.parameter_count() * sizeof(double)));
  if (!out) throw RuntimeFailure(kModule, "checkpoint write failed: " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(kModule, "cannot open checkpoint " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic + "\n" != kCheckpointMagic) {
    throw ValidationError(kModule, path.string() + " is not a checkpoint");
  }
  std::size_t meta_len = 0;
  std::string len_line;
  std::getline(in, len_line);
  try {
    meta_len = std::stoul(len_line);
  } catch (const std::exception&) {
    throw ValidationError(kModule, "corrupt checkpoint header in " + path.string());
  }
  std::string meta_text(meta_len, '\0');
  in.read(meta_text.data(), static_cast<std::streamsize>(meta_len));
  if (in.get() != '\n') throw ValidationError(kModule, "corrupt checkpoint header in " + path.string());

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(kModule, "corrupt checkpoint metadata: " + std::string(e.what()));
  }
  const ModelConfig config = model_config_from_json(meta.at("config"));
  if (expected && !(*expected == config)) {
    throw ValidationError(kModule, "checkpoint config does not match the requested config: " +
                                       path.string());
  }
  Model m = Model::build(config, meta.at("seed").get<std::uint64_t>());
  const auto& stored = meta.at("tensors");
  if (stored.size() != m.tensors().size()) {
    throw ValidationError(kModule, "checkpoint tensor table does not match its config");
  }
  for (std::size_t i = 0; i < stored.size(); ++i) {
    const auto& t = m.tensors()[i];
    if (stored[i].at("name").get<std::string>() != t.name ||
        stored[i].at("rows").get<Eigen::Index>() != t.rows ||
        stored[i].at("cols").get<Eigen::Index>() != t.cols ||
        stored[i].at("offset").get<Eigen::Index>() != t.offset) {
      throw ValidationError(kModule, "tensor '" + t.name + "' shape mismatch in " + path.string());
    }
  }
  in.read(reinterpret_cast<char*>(m.parameters().data()),
          static_cast<std::streamsize>(m.parameter_count() * sizeof(double)));
  if (!in || in.peek() != std::char_traits<char>::eof()) {
    throw ValidationError(kModule, "checkpoint payload size mismatch in " + path.string());
  }
  return m;
}

}  // namespace advspk
