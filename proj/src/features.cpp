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

#include "advspk/features.hpp"

#include <unsupported/Eigen/FFT>

#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

#include "advspk/error.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "features";

std::vector<double> hann_window(int length) {
  // Periodic Hann.
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n) {
    w[static_cast<std::size_t>(n)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / static_cast<double>(length));
  }
  return w;
}

void check_finite(const Eigen::MatrixXd& m, const std::string& what) {
  if (!m.allFinite()) throw ValidationError(kModule, "non-finite values in " + what);
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMel:
      return "mel";
    case FeatureKind::kRaw:
      return "raw";
    case FeatureKind::kSsl:
      return "ssl";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "mel") return FeatureKind::kMel;
  if (name == "raw") return FeatureKind::kRaw;
  if (name == "ssl") return FeatureKind::kSsl;
  throw ValidationError(kModule, "unknown feature kind '" + std::string(name) + "'");
}

void MelConfig::validate() const {
  if (n_mels < 1) throw ValidationError(kModule, "n_mels must be >= 1");
  if (!(window_length > hop_length && hop_length > 0)) {
    throw ValidationError(kModule, "mel framing requires window > hop > 0");
  }
  if (sample_rate <= 0) throw ValidationError(kModule, "sample_rate must be positive");
  if (!(log_floor > 0.0)) throw ValidationError(kModule, "log_floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_center_frequencies(const MelConfig& config) {
  config.validate();
  const double mel_hi = hz_to_mel(config.sample_rate / 2.0);
  std::vector<double> centers(static_cast<std::size_t>(config.n_mels));
  for (int i = 0; i < config.n_mels; ++i) {
    centers[static_cast<std::size_t>(i)] = mel_to_hz(mel_hi * (i + 1) / (config.n_mels + 1));
  }
  return centers;
}

Eigen::MatrixXd mel_filterbank(const MelConfig& config) {
  config.validate();
  const int n_bins = config.window_length / 2 + 1;
  const double mel_hi = hz_to_mel(config.sample_rate / 2.0);

  // n_mels + 2 edges; filter i rises on [edge i, edge i+1], falls on [i+1, i+2].
  std::vector<double> edges(static_cast<std::size_t>(config.n_mels + 2));
  for (int j = 0; j < config.n_mels + 2; ++j) {
    edges[static_cast<std::size_t>(j)] = mel_to_hz(mel_hi * j / (config.n_mels + 1));
  }

  const double bin_hz = static_cast<double>(config.sample_rate) / config.window_length;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(config.n_mels, n_bins);
  for (int i = 0; i < config.n_mels; ++i) {
    const double lo = edges[static_cast<std::size_t>(i)];
    const double mid = edges[static_cast<std::size_t>(i + 1)];
    const double hi = edges[static_cast<std::size_t>(i + 2)];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f < mid) {
        w = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb(i, k) = w;
    }
  }
  return fb;
}

FeatureMatrix extract_mel(const AudioUtterance& utterance, const MelConfig& config) {
  config.validate();
  const auto length = static_cast<long>(utterance.samples.size());
  if (length < config.window_length) {
    throw ValidationError(kModule, "utterance '" + utterance.utterance_id + "' has " +
                                       std::to_string(length) +
                                       " samples, shorter than one window");
  }
  const long frames = length / config.hop_length;
  const int win = config.window_length;
  const int n_bins = win / 2 + 1;

  const Eigen::MatrixXd fb = mel_filterbank(config);
  const std::vector<double> window = hann_window(win);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(static_cast<std::size_t>(win));
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd power(n_bins);

  FeatureMatrix out;
  out.kind = FeatureKind::kMel;
  out.frame_hop = config.hop_length;
  out.utterance_id = utterance.utterance_id;
  out.values.resize(frames, config.n_mels);
  for (long t = 0; t < frames; ++t) {
    const long start = t * config.hop_length;
    for (int n = 0; n < win; ++n) {
      const long idx = start + n;
      const double s = idx < length ? utterance.samples[static_cast<std::size_t>(idx)] : 0.0;
      frame[static_cast<std::size_t>(n)] = s * window[static_cast<std::size_t>(n)];
    }
    fft.fwd(spectrum, frame);
    for (int k = 0; k < n_bins; ++k) power(k) = std::norm(spectrum[static_cast<std::size_t>(k)]);
    const Eigen::VectorXd energies = fb * power;
    for (int m = 0; m < config.n_mels; ++m) {
      out.values(t, m) = std::log(std::max(energies(m), config.log_floor));
    }
  }
  check_finite(out.values, "mel features of '" + utterance.utterance_id + "'");
  return out;
}

FeatureMatrix prepare_raw(const AudioUtterance& utterance) {
  if (utterance.samples.empty()) {
    throw ValidationError(kModule, "utterance '" + utterance.utterance_id + "' is empty");
  }
  FeatureMatrix out;
  out.kind = FeatureKind::kRaw;
  out.frame_hop = kRawHop;
  out.utterance_id = utterance.utterance_id;
  out.values = Eigen::Map<const Eigen::VectorXd>(utterance.samples.data(),
                                                 static_cast<Eigen::Index>(utterance.samples.size()));
  check_finite(out.values, "raw samples of '" + utterance.utterance_id + "'");
  return out;
}

FeatureMatrix read_ftr(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(kModule, "missing feature file " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  long frames = -1;
  long dims = -1;
  std::string kind_name;
  if (!(hs >> frames >> dims >> kind_name) || frames < 0 || dims <= 0) {
    throw ValidationError(kModule, "bad header '" + header + "' in " + path.string());
  }
  FeatureMatrix out;
  out.kind = parse_feature_kind(kind_name);
  out.frame_hop = out.kind == FeatureKind::kMel   ? 512
                  : out.kind == FeatureKind::kRaw ? kRawHop
                                                  : kSslNominalHop;
  out.utterance_id = path.stem().string();
  out.values.resize(frames, dims);

  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= frames) {
      throw ValidationError(kModule, "header declares " + std::to_string(frames) +
                                         " frames but payload has more in " + path.string());
    }
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (long c = 0; c < dims; ++c) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw ValidationError(kModule, "row " + std::to_string(row) + " has fewer than " +
                                           std::to_string(dims) + " values in " + path.string());
      }
      out.values(row, c) = v;
      p = next;
    }
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p != end) {
      throw ValidationError(kModule, "row " + std::to_string(row) + " has more than " +
                                         std::to_string(dims) + " values in " + path.string());
    }
    ++row;
  }
  if (row != frames) {
    throw ValidationError(kModule, "header declares " + std::to_string(frames) +
                                       " frames but payload has " + std::to_string(row) + " in " +
                                       path.string());
  }
  check_finite(out.values, path.string());
  return out;
}

void write_ftr(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure(kModule, "cannot write " + path.string());
  out << m.frames() << ' ' << m.dims() << ' ' << to_string(m.kind) << '\n';
  std::string line;
  char buf[64];
  for (Eigen::Index r = 0; r < m.frames(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < m.dims(); ++c) {
      if (c) line.push_back(' ');
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), m.values(r, c));
      line.append(buf, ptr);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw RuntimeFailure(kModule, "write failed: " + path.string());
}

FeatureMatrix load_ssl_features(const std::string& utterance_id,
                                const std::filesystem::path& feature_dir) {
  const auto path = feature_dir / (utterance_id + ".ftr");
  FeatureMatrix m = read_ftr(path);
  if (m.kind != FeatureKind::kSsl) {
    throw ValidationError(kModule, path.string() + " is not an ssl feature file");
  }
  if (m.dims() != 768 && m.dims() != 1024) {
    throw ValidationError(kModule, "ssl dims must be 768 or 1024, got " +
                                       std::to_string(m.dims()) + " in " + path.string());
  }
  m.utterance_id = utterance_id;
  return m;
}

FeatureMatrix mean_variance_normalize(const FeatureMatrix& m) {
  if (m.frames() < 2) {
    throw ValidationError(kModule, "normalization needs >= 2 frames ('" + m.utterance_id + "')");
  }
  FeatureMatrix out = m;
  const double n = static_cast<double>(m.frames());
  for (Eigen::Index c = 0; c < m.dims(); ++c) {
    const double mean = m.values.col(c).mean();
    const double var = (m.values.col(c).array() - mean).square().sum() / n;
    if (var < 1e-12) {
      out.values.col(c).setZero();
    } else {
      out.values.col(c) = (m.values.col(c).array() - mean) / std::sqrt(var);
    }
  }
  return out;
}

}  // namespace advspk
