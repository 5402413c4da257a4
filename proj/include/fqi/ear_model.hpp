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

// FFT-based peripheral ear model: windowing, DFT, level scaling, outer and
// middle ear weighting, critical band grouping, internal noise, spreading in
// frequency and time, and masking thresholds. All band patterns are
// bands x frames matrices.

#include <cmath>
#include <ostream>

#include <Eigen/Core>

#include "fqi/audio_io.hpp"

namespace fqi::ear {

inline constexpr Eigen::Index kBandCount = 109;
inline constexpr Eigen::Index kSpectrumSize = audio::kFrameSize / 2 + 1;
inline constexpr double kBarkResolution = 0.25;
inline constexpr double kLowestFrequency = 80.0;
inline constexpr double kHighestFrequency = 18000.0;
inline constexpr double kCalibrationFrequency = 1019.55;
inline constexpr double kDefaultListeningLevel = 92.0;
inline constexpr double kLevelFloor = 1e-12;

enum class Stage { pitch_mapped, pitch, unsmeared_excitation, excitation, mask };

const char* to_string(Stage stage);

struct BandPattern {
  Eigen::MatrixXd values;  // kBandCount x frames
  Stage stage = Stage::pitch_mapped;

  Eigen::Index frames() const { return values.cols(); }
};

// Magnitudes of bins 0..1024 of one frame.
struct SpectralFrame {
  Eigen::ArrayXd magnitude;
  Eigen::Index frame_index = 0;
};

struct BandLayout {
  Eigen::ArrayXd lower;   // Hz
  Eigen::ArrayXd center;  // Hz
  Eigen::ArrayXd upper;   // Hz
  int sample_rate = 0;

  Eigen::Index size() const { return center.size(); }
};

struct Calibration {
  double listening_level = kDefaultListeningLevel;  // dB SPL
  double norm = 1.0;
  double fac = 1.0;
};

// sqrt(8/3)-scaled Hann window of length 2048.
const Eigen::ArrayXd& hann_window();

Eigen::ArrayXd window_frame(const Eigen::Ref<const Eigen::ArrayXd>& frame);

// Full complex spectrum, scaled by 1/N, all 2048 bins.
Eigen::ArrayXcd dft_full(const Eigen::Ref<const Eigen::ArrayXd>& windowed);

SpectralFrame dft(const Eigen::Ref<const Eigen::ArrayXd>& windowed, Eigen::Index frame_index = 0);

// Peak magnitude of the windowed DFT over frames of `samples`.
double peak_magnitude(const Eigen::Ref<const Eigen::ArrayXd>& samples);

// Norm is taken from 10 frames of a full-scale 1019.55 Hz sine.
Calibration calibrate(double listening_level, int sample_rate);

SpectralFrame apply_scaling(const SpectralFrame& frame, const Calibration& cal);

// Outer and middle ear transfer in dB at `frequency` Hz (> 0).
double outer_middle_ear_db(double frequency);

// Linear weights W_d[k] for k = 0..1024; the DC weight is 0.
Eigen::ArrayXd outer_middle_ear_weights(int sample_rate);

SpectralFrame outer_middle_weight(const SpectralFrame& frame, int sample_rate);

inline double bark_from_hz(double hz) { return 7.0 * std::asinh(hz / 650.0); }
inline double hz_from_bark(double bark) { return 650.0 * std::sinh(bark / 7.0); }

// 109 bands, 0.25 Bark wide, from 80 Hz; the last band ends at 18 kHz.
BandLayout build_band_layout(int sample_rate);

// Energy of the weighted spectrum per band. Bin k covers
// [(k - 1/2), (k + 1/2)] * Fs / 2048 and is split between bands in
// proportion to its overlap with each.
Eigen::ArrayXd group_bands(const SpectralFrame& weighted, const BandLayout& layout);

double internal_noise(double center_frequency);

BandPattern add_internal_noise(const BandPattern& pitch_mapped, const BandLayout& layout);

// Upper spreading slope in dB/Bark for a masker of `level_db` at `center_frequency`.
double upper_slope(double center_frequency, double level_db);
inline constexpr double kLowerSlope = 27.0;

// Spreading of a unit masker in band `masker` over all bands, divided by the
// sum of its raw spreading terms so it adds up to one.
Eigen::ArrayXd spreading_line(Eigen::Index masker, double upper_slope_db, Eigen::Index bands);

BandPattern spread_frequency(const BandPattern& pitch, const BandLayout& layout);

double time_smoothing_coefficient(double center_frequency);

BandPattern spread_time(const BandPattern& unsmeared, const BandLayout& layout);

double mask_offset_db(Eigen::Index band);

BandPattern mask_threshold(const BandPattern& excitation);

struct EarPatterns {
  BandPattern pitch_mapped;
  BandPattern pitch;
  BandPattern unsmeared_excitation;
  BandPattern excitation;
  BandPattern mask;
};

struct PairPatterns {
  EarPatterns reference;
  EarPatterns test;
};

EarPatterns analyze_signal(const Eigen::Ref<const Eigen::ArrayXd>& mono, int sample_rate,
                           const Calibration& cal, const BandLayout& layout);

// Stereo inputs are downmixed first. Reference and test run concurrently.
PairPatterns run_ear_model(const audio::AlignedPair& pair, const Calibration& cal);

// One row per band: band index, center frequency, then one column per frame.
void write_pattern_csv(std::ostream& out, const BandPattern& pattern, const BandLayout& layout);

}  // namespace fqi::ear
