// Copyright 2026 The FQI Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

#include <Eigen/Core>

namespace fqi::audio {

inline constexpr Eigen::Index kFrameSize = 2048;
inline constexpr Eigen::Index kHopSize = 1024;

// Decoded PCM audio. `samples` is length x channels, values in [-1, 1).
struct AudioSignal {
  Eigen::ArrayXXd samples;
  int sample_rate = 0;
  std::string source_path;

  Eigen::Index channel_count() const { return samples.cols(); }
  Eigen::Index length() const { return samples.rows(); }
};

// Reference and test signal truncated to a common length. Frame n spans
// samples [n * kHopSize, n * kHopSize + kFrameSize).
struct AlignedPair {
  AudioSignal reference;
  AudioSignal test;
  Eigen::Index frame_count = 0;
};

bool is_supported_rate(int sample_rate);

// Throws InputError for anything other than 16-bit linear PCM, 1 or 2
// channels, 44.1 or 48 kHz, and for truncated files.
AudioSignal load_wav(const std::filesystem::path& path);
AudioSignal parse_wav(std::span<const std::byte> bytes, std::string source);

// Writes 16-bit PCM. Samples are quantized as round(x * 32768) and clipped.
void save_wav(const std::filesystem::path& path, const AudioSignal& signal);

AudioSignal downmix_mono(const AudioSignal& signal);

// Number of full 2048-sample frames at 1024 hop; 0 when shorter than a frame.
Eigen::Index frame_count_for(Eigen::Index length);

AlignedPair align_pair(const AudioSignal& reference, const AudioSignal& test);

}  // namespace fqi::audio
