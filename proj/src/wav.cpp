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

#include "advspk/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "advspk/error.hpp"

namespace advspk {
namespace {

constexpr const char* kModule = "wav";

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

void put16(std::ostream& os, std::uint16_t v) {
  const std::array<char, 2> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(b.data(), 2);
}

struct ParsedWav {
  WavInfo info;
  std::streamoff data_offset = 0;
};

ParsedWav parse(std::ifstream& in, const std::filesystem::path& path) {
  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12) || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw ValidationError(kModule, "not a RIFF/WAVE file: " + path.string());
  }
  ParsedWav out;
  bool have_fmt = false;
  unsigned char hdr[8];
  while (in.read(reinterpret_cast<char*>(hdr), 8)) {
    const std::uint32_t size = le32(hdr + 4);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw ValidationError(kModule, "truncated fmt chunk in " + path.string());
      std::vector<unsigned char> fmt(size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), size)) break;
      if (le16(fmt.data()) != 1) {
        throw ValidationError(kModule, "only PCM WAV is supported: " + path.string());
      }
      out.info.channels = le16(fmt.data() + 2);
      out.info.sample_rate = static_cast<int>(le32(fmt.data() + 4));
      out.info.bits_per_sample = le16(fmt.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw ValidationError(kModule, "data chunk before fmt in " + path.string());
      out.data_offset = in.tellg();
      const int bytes_per_frame = out.info.channels * out.info.bits_per_sample / 8;
      if (bytes_per_frame <= 0) throw ValidationError(kModule, "bad frame size in " + path.string());
      out.info.num_frames = size / static_cast<std::uint32_t>(bytes_per_frame);
      return out;
    } else {
      in.seekg(size + (size & 1u), std::ios::cur);
    }
    if (size & 1u && std::memcmp(hdr, "fmt ", 4) == 0) in.seekg(1, std::ios::cur);
  }
  throw ValidationError(kModule, "no data chunk in " + path.string());
}

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(kModule, "cannot open " + path.string());
  return parse(in, path).info;
}

std::vector<double> read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(kModule, "cannot open " + path.string());
  const ParsedWav parsed = parse(in, path);
  const WavInfo& info = parsed.info;
  if (info.sample_rate != kSampleRate) {
    throw ValidationError(kModule, "sample rate " + std::to_string(info.sample_rate) +
                                       " != 16000 (resampling is not supported): " +
                                       path.string());
  }
  if (info.channels != 1 || info.bits_per_sample != 16) {
    throw ValidationError(kModule, "expected 16-bit mono PCM: " + path.string());
  }
  std::vector<unsigned char> raw(info.num_frames * 2);
  in.seekg(parsed.data_offset);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw ValidationError(kModule, "truncated data chunk in " + path.string());
  }
  std::vector<double> samples(info.num_frames);
  for (std::size_t i = 0; i < info.num_frames; ++i) {
    const auto v = static_cast<std::int16_t>(le16(raw.data() + 2 * i));
    samples[i] = static_cast<double>(v) / 32768.0;
  }
  return samples;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure(kModule, "cannot write " + path.string());
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate * 2));
  put16(out, 2);
  put16(out, 16);
  out.write("data", 4);
  put32(out, data_bytes);
  for (double s : samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(
        std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L));
    put16(out, static_cast<std::uint16_t>(q));
  }
  if (!out) throw RuntimeFailure(kModule, "write failed: " + path.string());
}

}  // namespace advspk
