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

#include "fqi/audio_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "fqi/error.hpp"

namespace fqi::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint16_t>(std::to_integer<unsigned>(b[at]) |
                                    (std::to_integer<unsigned>(b[at + 1]) << 8));
}

std::uint32_t read_u32(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint32_t>(read_u16(b, at)) |
         (static_cast<std::uint32_t>(read_u16(b, at + 2)) << 16);
}

bool tag_is(std::span<const std::byte> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::vector<char>& out, std::uint32_t v) {
  put_u16(out, static_cast<std::uint16_t>(v & 0xFFFF));
  put_u16(out, static_cast<std::uint16_t>(v >> 16));
}

void put_tag(std::vector<char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

bool is_supported_rate(int sample_rate) {
  return sample_rate == 44100 || sample_rate == 48000;
}

AudioSignal parse_wav(std::span<const std::byte> bytes, std::string source) {
  auto fail = [&](const std::string& what) {
    return InputError(source + ": " + what);
  };
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw fail("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + chunk_size > bytes.size()) {
        throw fail("truncated fmt chunk");
      }
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      block_align = read_u16(bytes, body + 12);
      bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40) throw fail("truncated WAVE_FORMAT_EXTENSIBLE header");
        format = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw fail("data chunk precedes fmt chunk");
      if (format != kFormatPcm) {
        throw fail("unsupported encoding (format tag " + std::to_string(format) +
                   "), only linear PCM is accepted");
      }
      if (bits != 16) {
        throw fail("unsupported bit depth " + std::to_string(bits) + ", expected 16");
      }
      if (channels != 1 && channels != 2) {
        throw fail("unsupported channel count " + std::to_string(channels));
      }
      if (!is_supported_rate(static_cast<int>(rate))) {
        throw fail("unsupported sample rate " + std::to_string(rate) +
                   " Hz, expected 44100 or 48000");
      }
      if (block_align != channels * 2) throw fail("inconsistent block alignment");
      if (body + chunk_size > bytes.size()) throw fail("truncated data chunk");
      if (chunk_size % block_align != 0) throw fail("partial sample frame in data chunk");

      const Eigen::Index frames = chunk_size / block_align;
      AudioSignal signal;
      signal.samples.resize(frames, channels);
      signal.sample_rate = static_cast<int>(rate);
      signal.source_path = std::move(source);
      std::size_t at = body;
      for (Eigen::Index i = 0; i < frames; ++i) {
        for (Eigen::Index c = 0; c < channels; ++c, at += 2) {
          const auto pcm = static_cast<std::int16_t>(read_u16(bytes, at));
          signal.samples(i, c) = pcm / 32768.0;
        }
      }
      return signal;
    }
    // Chunks are word aligned.
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw fail(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

AudioSignal load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_wav(std::as_bytes(std::span(raw)), path.string());
}

void save_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  const auto channels = static_cast<std::uint16_t>(signal.channel_count());
  const auto data_bytes = static_cast<std::uint32_t>(signal.length() * channels * 2);
  std::vector<char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * channels * 2);
  put_u16(out, static_cast<std::uint16_t>(channels * 2));
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (Eigen::Index i = 0; i < signal.length(); ++i) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      const double scaled = std::round(signal.samples(i, c) * 32768.0);
      const auto pcm = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      put_u16(out, static_cast<std::uint16_t>(pcm));
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError(path.string() + ": cannot open file for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

AudioSignal downmix_mono(const AudioSignal& signal) {
  if (signal.channel_count() == 1) return signal;
  if (signal.channel_count() != 2) {
    throw InputError(signal.source_path + ": cannot downmix " +
                     std::to_string(signal.channel_count()) + " channels");
  }
  AudioSignal mono;
  mono.samples = 0.5 * (signal.samples.col(0) + signal.samples.col(1));
  mono.sample_rate = signal.sample_rate;
  mono.source_path = signal.source_path;
  return mono;
}

Eigen::Index frame_count_for(Eigen::Index length) {
  if (length < kFrameSize) return 0;
  return (length - kFrameSize) / kHopSize + 1;
}

AlignedPair align_pair(const AudioSignal& reference, const AudioSignal& test) {
  if (reference.sample_rate != test.sample_rate) {
    throw InputError("sample rate mismatch: " + reference.source_path + " is " +
                     std::to_string(reference.sample_rate) + " Hz, " + test.source_path +
                     " is " + std::to_string(test.sample_rate) + " Hz");
  }
  if (reference.channel_count() != test.channel_count()) {
    throw InputError("channel count mismatch between " + reference.source_path + " and " +
                     test.source_path);
  }
  const Eigen::Index length = std::min(reference.length(), test.length());
  const Eigen::Index frames = frame_count_for(length);
  if (frames < 2) {
    throw InputError("signals too short: " + std::to_string(length) +
                     " common samples give fewer than 2 frames");
  }
  AlignedPair pair;
  pair.reference = reference;
  pair.reference.samples.conservativeResize(length, Eigen::NoChange);
  pair.test = test;
  pair.test.samples.conservativeResize(length, Eigen::NoChange);
  pair.frame_count = frames;
  return pair;
}

}  // namespace fqi::audio
