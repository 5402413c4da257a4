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

#include "fqi/ear_model.hpp"

#include <algorithm>
#include <complex>
#include <future>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "fqi/error.hpp"

namespace fqi::ear {

using Eigen::ArrayXd;
using Eigen::Index;

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::pitch_mapped: return "pitch_mapped";
    case Stage::pitch: return "pitch";
    case Stage::unsmeared_excitation: return "unsmeared_excitation";
    case Stage::excitation: return "excitation";
    case Stage::mask: return "mask";
  }
  return "unknown";
}

const ArrayXd& hann_window() {
  static const ArrayXd window = [] {
    const Index n = audio::kFrameSize;
    ArrayXd w(n);
    for (Index i = 0; i < n; ++i) {
      w[i] = std::sqrt(8.0 / 3.0) * 0.5 *
             (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / (n - 1)));
    }
    return w;
  }();
  return window;
}

ArrayXd window_frame(const Eigen::Ref<const ArrayXd>& frame) {
  if (frame.size() != audio::kFrameSize) {
    throw InputError("window_frame: expected " + std::to_string(audio::kFrameSize) +
                     " samples, got " + std::to_string(frame.size()));
  }
  return frame * hann_window();
}

Eigen::ArrayXcd dft_full(const Eigen::Ref<const ArrayXd>& windowed) {
  if (windowed.size() != audio::kFrameSize) {
    throw InputError("dft: expected " + std::to_string(audio::kFrameSize) + " samples");
  }
  thread_local Eigen::FFT<double> fft;
  std::vector<double> in(windowed.begin(), windowed.end());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  Eigen::ArrayXcd spectrum(audio::kFrameSize);
  for (Index k = 0; k < audio::kFrameSize; ++k) {
    spectrum[k] = out[static_cast<std::size_t>(k)] / static_cast<double>(audio::kFrameSize);
  }
  return spectrum;
}

SpectralFrame dft(const Eigen::Ref<const ArrayXd>& windowed, Index frame_index) {
  const Eigen::ArrayXcd full = dft_full(windowed);
  return {full.head(kSpectrumSize).abs(), frame_index};
}

double peak_magnitude(const Eigen::Ref<const ArrayXd>& samples) {
  const Index frames = audio::frame_count_for(samples.size());
  double peak = 0.0;
  for (Index n = 0; n < frames; ++n) {
    const auto spectrum = dft(window_frame(samples.segment(n * audio::kHopSize, audio::kFrameSize)));
    peak = std::max(peak, spectrum.magnitude.maxCoeff());
  }
  return peak;
}

Calibration calibrate(double listening_level, int sample_rate) {
  if (!(listening_level > 0.0)) throw InputError("listening level must be positive");
  if (!audio::is_supported_rate(sample_rate)) {
    throw InputError("unsupported sample rate " + std::to_string(sample_rate));
  }
  constexpr Index kFrames = 10;
  const Index length = audio::kFrameSize + (kFrames - 1) * audio::kHopSize;
  ArrayXd sine(length);
  for (Index i = 0; i < length; ++i) {
    sine[i] = std::sin(2.0 * std::numbers::pi * kCalibrationFrequency * static_cast<double>(i) /
                       sample_rate);
  }
  Calibration cal;
  cal.listening_level = listening_level;
  cal.norm = peak_magnitude(sine);
  cal.fac = std::pow(10.0, listening_level / 20.0) / cal.norm;
  return cal;
}

SpectralFrame apply_scaling(const SpectralFrame& frame, const Calibration& cal) {
  return {frame.magnitude * cal.fac, frame.frame_index};
}

double outer_middle_ear_db(double frequency) {
  const double khz = frequency / 1000.0;
  return -2.184 * std::pow(khz, -0.8) + 6.5 * std::exp(-0.6 * (khz - 3.3) * (khz - 3.3)) -
         0.001 * std::pow(khz, 3.6);
}

ArrayXd outer_middle_ear_weights(int sample_rate) {
  const double resolution = static_cast<double>(sample_rate) / audio::kFrameSize;
  ArrayXd weights(kSpectrumSize);
  weights[0] = 0.0;
  for (Index k = 1; k < kSpectrumSize; ++k) {
    weights[k] = std::pow(10.0, outer_middle_ear_db(k * resolution) / 20.0);
  }
  return weights;
}

SpectralFrame outer_middle_weight(const SpectralFrame& frame, int sample_rate) {
  return {frame.magnitude * outer_middle_ear_weights(sample_rate), frame.frame_index};
}

BandLayout build_band_layout(int sample_rate) {
  if (!audio::is_supported_rate(sample_rate)) {
    throw InputError("unsupported sample rate " + std::to_string(sample_rate));
  }
  const double z_low = bark_from_hz(kLowestFrequency);
  const double z_high = bark_from_hz(kHighestFrequency);
  BandLayout layout;
  layout.sample_rate = sample_rate;
  layout.lower.resize(kBandCount);
  layout.center.resize(kBandCount);
  layout.upper.resize(kBandCount);
  for (Index b = 0; b < kBandCount; ++b) {
    const double zl = z_low + b * kBarkResolution;
    const double zu = std::min(z_high, zl + kBarkResolution);
    layout.lower[b] = b == 0 ? kLowestFrequency : hz_from_bark(zl);
    layout.upper[b] = b == kBandCount - 1 ? kHighestFrequency : hz_from_bark(zu);
    layout.center[b] = hz_from_bark(0.5 * (zl + zu));
  }
  // Adjacent bands share their edge exactly.
  for (Index b = 1; b < kBandCount; ++b) layout.lower[b] = layout.upper[b - 1];
  return layout;
}

ArrayXd group_bands(const SpectralFrame& weighted, const BandLayout& layout) {
  const double resolution = static_cast<double>(layout.sample_rate) / audio::kFrameSize;
  const ArrayXd energy = weighted.magnitude.square();
  const Index bins = energy.size();
  ArrayXd bands = ArrayXd::Zero(layout.size());
  for (Index b = 0; b < layout.size(); ++b) {
    const double lo = layout.lower[b];
    const double hi = layout.upper[b];
    const auto first = std::max<Index>(0, static_cast<Index>(std::floor(lo / resolution - 0.5)));
    const auto last =
        std::min<Index>(bins - 1, static_cast<Index>(std::ceil(hi / resolution + 0.5)));
    double sum = 0.0;
    for (Index k = first; k <= last; ++k) {
      const double bin_lo = (k - 0.5) * resolution;
      const double bin_hi = (k + 0.5) * resolution;
      const double overlap = std::min(hi, bin_hi) - std::max(lo, bin_lo);
      if (overlap > 0.0) sum += energy[k] * overlap / resolution;
    }
    bands[b] = sum;
  }
  return bands;
}

double internal_noise(double center_frequency) {
  return std::pow(10.0, 0.1456 * std::pow(center_frequency / 1000.0, -0.8));
}

BandPattern add_internal_noise(const BandPattern& pitch_mapped, const BandLayout& layout) {
  const Eigen::VectorXd noise = layout.center.unaryExpr(&internal_noise).matrix();
  BandPattern out{pitch_mapped.values.colwise() + noise, Stage::pitch};
  return out;
}

double upper_slope(double center_frequency, double level_db) {
  return -24.0 - 230.0 / center_frequency + 0.2 * level_db;
}

ArrayXd spreading_line(Index masker, double upper_slope_db, Index bands) {
  ArrayXd line(bands);
  const double lower_step = std::pow(10.0, -kBarkResolution * kLowerSlope / 10.0);
  const double upper_step = std::pow(10.0, kBarkResolution * upper_slope_db / 10.0);
  line[masker] = 1.0;
  for (Index k = masker - 1; k >= 0; --k) line[k] = line[k + 1] * lower_step;
  for (Index k = masker + 1; k < bands; ++k) line[k] = line[k - 1] * upper_step;
  return line / line.sum();
}

namespace {

double level_db(double energy) { return 10.0 * std::log10(std::max(energy, kLevelFloor)); }

// Sum over maskers j of energy[j] * spreading_line(j)[k].
ArrayXd spread_frame(const Eigen::Ref<const ArrayXd>& energy, const ArrayXd& slopes) {
  const Index bands = energy.size();
  ArrayXd total = ArrayXd::Zero(bands);
  for (Index j = 0; j < bands; ++j) {
    total += energy[j] * spreading_line(j, slopes[j], bands);
  }
  return total;
}

ArrayXd frame_slopes(const Eigen::Ref<const ArrayXd>& pitch, const BandLayout& layout) {
  ArrayXd slopes(pitch.size());
  for (Index j = 0; j < pitch.size(); ++j) {
    slopes[j] = upper_slope(layout.center[j], level_db(pitch[j]));
  }
  return slopes;
}

}  // namespace

BandPattern spread_frequency(const BandPattern& pitch, const BandLayout& layout) {
  const Index bands = pitch.values.rows();
  const Index frames = pitch.values.cols();
  BandPattern out{Eigen::MatrixXd(bands, frames), Stage::unsmeared_excitation};
  if (frames == 0) return out;

  // Normalization uses unit maskers with the slopes of frame 0.
  const ArrayXd norm_slopes = frame_slopes(pitch.values.col(0).array(), layout);
  const ArrayXd norm = spread_frame(ArrayXd::Ones(bands), norm_slopes).pow(0.4);

  for (Index n = 0; n < frames; ++n) {
    const ArrayXd column = pitch.values.col(n).array();
    const ArrayXd energy = column.max(kLevelFloor);
    const ArrayXd spread = spread_frame(energy, frame_slopes(column, layout));
    out.values.col(n) = (spread.pow(0.4) / norm).matrix();
  }
  return out;
}

double time_smoothing_coefficient(double center_frequency) {
  constexpr double kTau100 = 0.030;
  constexpr double kTauMin = 0.008;
  const double tau = kTauMin + 100.0 / center_frequency * (kTau100 - kTauMin);
  return std::exp(-4.0 / (187.5 * tau));
}

BandPattern spread_time(const BandPattern& unsmeared, const BandLayout& layout) {
  const Index bands = unsmeared.values.rows();
  const Index frames = unsmeared.values.cols();
  BandPattern out{Eigen::MatrixXd(bands, frames), Stage::excitation};
  for (Index k = 0; k < bands; ++k) {
    const double a = time_smoothing_coefficient(layout.center[k]);
    double previous = 0.0;
    for (Index n = 0; n < frames; ++n) {
      const double current = unsmeared.values(k, n);
      previous = std::max(a * previous + (1.0 - a) * current, current);
      out.values(k, n) = previous;
    }
  }
  return out;
}

double mask_offset_db(Index band) {
  const double z = band * kBarkResolution;
  return z <= 12.0 ? 3.0 : 0.25 * z;
}

BandPattern mask_threshold(const BandPattern& excitation) {
  const Index bands = excitation.values.rows();
  Eigen::VectorXd divisor(bands);
  for (Index k = 0; k < bands; ++k) divisor[k] = std::pow(10.0, mask_offset_db(k) / 10.0);
  BandPattern out{excitation.values.array().colwise() / divisor.array(), Stage::mask};
  return out;
}

EarPatterns analyze_signal(const Eigen::Ref<const ArrayXd>& mono, int sample_rate,
                           const Calibration& cal, const BandLayout& layout) {
  if (layout.sample_rate != sample_rate) {
    throw InputError("band layout built for a different sample rate");
  }
  const Index frames = audio::frame_count_for(mono.size());
  const ArrayXd weights = outer_middle_ear_weights(sample_rate);

  EarPatterns patterns;
  patterns.pitch_mapped = {Eigen::MatrixXd(layout.size(), frames), Stage::pitch_mapped};
  for (Index n = 0; n < frames; ++n) {
    SpectralFrame spectrum =
        dft(window_frame(mono.segment(n * audio::kHopSize, audio::kFrameSize)), n);
    spectrum = apply_scaling(spectrum, cal);
    spectrum.magnitude *= weights;
    patterns.pitch_mapped.values.col(n) = group_bands(spectrum, layout).matrix();
  }
  patterns.pitch = add_internal_noise(patterns.pitch_mapped, layout);
  patterns.unsmeared_excitation = spread_frequency(patterns.pitch, layout);
  patterns.excitation = spread_time(patterns.unsmeared_excitation, layout);
  patterns.mask = mask_threshold(patterns.excitation);
  return patterns;
}

PairPatterns run_ear_model(const audio::AlignedPair& pair, const Calibration& cal) {
  const auto layout = build_band_layout(pair.reference.sample_rate);
  auto run = [&](const audio::AudioSignal& signal) {
    const auto mono = audio::downmix_mono(signal);
    const ArrayXd samples = mono.samples.col(0);
    auto patterns = analyze_signal(samples, mono.sample_rate, cal, layout);
    if (patterns.pitch.frames() != pair.frame_count) {
      throw ComputationError("ear model frame count mismatch for " + signal.source_path);
    }
    return patterns;
  };
  auto test = std::async(std::launch::async, run, std::cref(pair.test));
  PairPatterns out;
  out.reference = run(pair.reference);
  out.test = test.get();
  return out;
}

void write_pattern_csv(std::ostream& out, const BandPattern& pattern, const BandLayout& layout) {
  out << "band,f_c_hz";
  for (Index n = 0; n < pattern.frames(); ++n) out << ",frame_" << n;
  out << '\n';
  out.precision(17);
  for (Index k = 0; k < pattern.values.rows(); ++k) {
    out << k << ',' << layout.center[k];
    for (Index n = 0; n < pattern.frames(); ++n) out << ',' << pattern.values(k, n);
    out << '\n';
  }
}

}  // namespace fqi::ear
