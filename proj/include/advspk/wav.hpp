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

// Minimal 16-bit PCM mono WAV reader/writer.

#ifndef ADVSPK_WAV_HPP_
#define ADVSPK_WAV_HPP_

#include <filesystem>
#include <span>
#include <vector>

namespace advspk {

inline constexpr int kSampleRate = 16000;

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::size_t num_frames = 0;
};

// Parses only the header chunks. Throws ValidationError on malformed files.
WavInfo read_wav_info(const std::filesystem::path& path);

// Reads a 16-bit PCM mono file at 16 kHz; samples are scaled to [-1, 1).
// Any other layout or rate is rejected.
std::vector<double> read_wav(const std::filesystem::path& path);

// Samples are clipped to [-1, 1] and quantized to int16.
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate = kSampleRate);

}  // namespace advspk

#endif  // ADVSPK_WAV_HPP_
