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

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fqi/error.hpp"

namespace fqi::ear {
namespace {

using Eigen::ArrayXd;
using Eigen::Index;

constexpr double kPi = std::numbers::pi;

ArrayXd random_frame(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ArrayXd x(audio::kFrameSize);
  for (auto& v : x) v = u(rng);
  return x;
}

TEST(Window, EndpointsAndCenter) {
  const ArrayXd out = window_frame(ArrayXd::Ones(audio::kFrameSize));
  EXPECT_NEAR(out[0], 0.0, 1e-15);
  EXPECT_NEAR(out[2047], 0.0, 1e-15);
  // sqrt(8/3) * 0.5 * (1 - cos(2 pi 1023 / 2047)), evaluated independently.
  EXPECT_NEAR(out[1023], 1.6329922002689696, 1e-12);
}

TEST(Window, RejectsWrongLength) {
  EXPECT_THROW(window_frame(ArrayXd::Ones(2047)), InputError);
  EXPECT_THROW(dft(ArrayXd::Ones(4096)), InputError);
}

TEST(Window, PreservesWhiteNoisePower) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  double in_power = 0.0;
  double out_power = 0.0;
  for (int frame = 0; frame < 1000; ++frame) {
    ArrayXd x(audio::kFrameSize);
    for (auto& v : x) v = g(rng);
    in_power += x.square().sum();
    out_power += window_frame(x).square().sum();
  }
  EXPECT_NEAR(out_power / in_power, 1.0, 0.01);
}

TEST(Dft, ZeroAndBinCenteredCosine) {
  const auto zero = dft(ArrayXd::Zero(audio::kFrameSize));
  ASSERT_EQ(zero.magnitude.size(), kSpectrumSize);
  EXPECT_EQ(zero.magnitude.maxCoeff(), 0.0);

  ArrayXd cosine(audio::kFrameSize);
  for (Index n = 0; n < cosine.size(); ++n) cosine[n] = std::cos(2.0 * kPi * 512.0 * n / 2048.0);
  const auto spectrum = dft(cosine);
  EXPECT_NEAR(spectrum.magnitude[512], 0.5, 1e-12);
  ArrayXd others = spectrum.magnitude;
  others[512] = 0.0;
  EXPECT_LT(others.maxCoeff(), 1e-12);
}

TEST(Dft, MatchesDirectSummation) {
  std::mt19937_64 rng(5);
  const ArrayXd x = random_frame(rng);
  const Eigen::ArrayXcd fast = dft_full(x);
  for (Index k : {0, 1, 17, 511, 1024, 1500, 2047}) {
    std::complex<double> sum = 0.0;
    for (Index n = 0; n < audio::kFrameSize; ++n) {
      sum += x[n] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * n) / 2048.0);
    }
    sum /= 2048.0;
    EXPECT_NEAR(std::abs(fast[k] - sum), 0.0, 1e-12) << "bin " << k;
  }
}

TEST(Dft, Parseval) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const ArrayXd x = window_frame(random_frame(rng));
    const double time_energy = x.square().sum() / 2048.0;
    const double freq_energy = dft_full(x).abs2().sum();
    EXPECT_NEAR(freq_energy / time_energy, 1.0, 1e-9);
  }
}

TEST(Calibrate, FullScaleSineHitsListeningLevel) {
  for (int rate : {44100, 48000}) {
    const auto cal = calibrate(92.0, rate);
    EXPECT_NEAR(cal.fac, std::pow(10.0, 4.6) / cal.norm, 1e-9 * cal.fac);
    EXPECT_NEAR(cal.fac * cal.norm, std::pow(10.0, 92.0 / 20.0), 1e-6);
    EXPECT_NEAR(calibrate(112.0, rate).fac / cal.fac, 10.0, 1e-12);

    ArrayXd sine(audio::kFrameSize + 9 * audio::kHopSize);
    for (Index i = 0; i < sine.size(); ++i) {
      sine[i] = std::sin(2.0 * kPi * kCalibrationFrequency * static_cast<double>(i) / rate);
    }
    const double peak_db = 20.0 * std::log10(cal.fac * peak_magnitude(sine));
    EXPECT_NEAR(peak_db, 92.0, 1e-9);
  }
  EXPECT_THROW(calibrate(0.0, 48000), InputError);
  EXPECT_THROW(calibrate(92.0, 22050), InputError);
}

TEST(Scaling, PointwiseMultiplication) {
  SpectralFrame frame{ArrayXd::Constant(kSpectrumSize, 0.25), 3};
  Calibration unit;
  unit.fac = 1.0;
  EXPECT_TRUE((apply_scaling(frame, unit).magnitude == frame.magnitude).all());
  Calibration two;
  two.fac = 2.0;
  const auto scaled = apply_scaling(frame, two);
  EXPECT_EQ(scaled.magnitude[100], 0.5);
  EXPECT_EQ(scaled.frame_index, 3);
  EXPECT_EQ(apply_scaling({ArrayXd::Zero(kSpectrumSize), 0}, two).magnitude.maxCoeff(), 0.0);
}

TEST(OuterMiddleEar, OneKilohertz) {
  const double oracle = -2.184 * 1.0 + 6.5 * std::exp(-0.6 * 2.3 * 2.3) - 0.001;
  EXPECT_NEAR(outer_middle_ear_db(1000.0), oracle, 1e-12);
  EXPECT_NEAR(outer_middle_ear_db(1000.0), -1.913, 1e-3);
  EXPECT_NEAR(std::pow(10.0, outer_middle_ear_db(1000.0) / 20.0), 0.8023, 1e-4);
}

TEST(OuterMiddleEar, PeaksNearResonance) {
  // Grid scan of the transfer curve: bin 141 (3304.7 Hz) at 48 kHz,
  // bin 154 (3316.1 Hz) at 44.1 kHz.
  Index peak = 0;
  outer_middle_ear_weights(48000).maxCoeff(&peak);
  EXPECT_EQ(peak, 141);
  outer_middle_ear_weights(44100).maxCoeff(&peak);
  EXPECT_EQ(peak, 154);

  EXPECT_EQ(outer_middle_ear_weights(48000)[0], 0.0);
  const auto zero = outer_middle_weight({ArrayXd::Zero(kSpectrumSize), 0}, 48000);
  EXPECT_EQ(zero.magnitude.maxCoeff(), 0.0);
}

TEST(BandLayout, BarkGrid) {
  EXPECT_NEAR(bark_from_hz(80.0), 0.86, 5e-3);
  EXPECT_NEAR(bark_from_hz(18000.0), 28.1, 5e-3);
  EXPECT_EQ(std::ceil((bark_from_hz(18000.0) - bark_from_hz(80.0)) / 0.25), 109.0);

  for (int rate : {44100, 48000}) {
    const auto layout = build_band_layout(rate);
    ASSERT_EQ(layout.size(), kBandCount);
    EXPECT_EQ(layout.lower[0], 80.0);
    EXPECT_EQ(layout.upper[kBandCount - 1], 18000.0);
    for (Index b = 0; b < kBandCount; ++b) {
      EXPECT_LT(layout.lower[b], layout.center[b]);
      EXPECT_LT(layout.center[b], layout.upper[b]);
      if (b > 0) {
        EXPECT_EQ(layout.lower[b], layout.upper[b - 1]);
        EXPECT_LT(layout.center[b - 1], layout.center[b]);
      }
      if (b < kBandCount - 1) {
        EXPECT_NEAR(bark_from_hz(layout.upper[b]) - bark_from_hz(layout.lower[b]), 0.25, 1e-9);
      }
    }
  }
}

// Independent energy oracle: each bin's energy times the fraction of its
// interval inside [80 Hz, 18 kHz].
double in_range_energy(const ArrayXd& magnitude, int rate) {
  const double res = rate / 2048.0;
  double total = 0.0;
  for (Index k = 0; k < magnitude.size(); ++k) {
    const double lo = std::max((k - 0.5) * res, 80.0);
    const double hi = std::min((k + 0.5) * res, 18000.0);
    if (hi > lo) total += magnitude[k] * magnitude[k] * (hi - lo) / res;
  }
  return total;
}

TEST(GroupBands, ConservesInRangeEnergy) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int rate : {44100, 48000}) {
    const auto layout = build_band_layout(rate);
    for (int trial = 0; trial < 20; ++trial) {
      ArrayXd mag(kSpectrumSize);
      for (auto& v : mag) v = u(rng);
      const ArrayXd bands = group_bands({mag, 0}, layout);
      ASSERT_EQ(bands.size(), kBandCount);
      EXPECT_NEAR(bands.sum() / in_range_energy(mag, rate), 1.0, 1e-9);
    }
  }
}

TEST(GroupBands, ZeroAndLocality) {
  const auto layout = build_band_layout(48000);
  EXPECT_EQ(group_bands({ArrayXd::Zero(kSpectrumSize), 0}, layout).maxCoeff(), 0.0);

  // Band 100 spans several bins; pick one whose whole interval lies inside.
  const double res = 48000 / 2048.0;
  const auto k = static_cast<Index>(std::round(layout.center[100] / res));
  ASSERT_GT((k - 0.5) * res, layout.lower[100]);
  ASSERT_LT((k + 0.5) * res, layout.upper[100]);
  ArrayXd mag = ArrayXd::Zero(kSpectrumSize);
  mag[k] = 2.0;
  const ArrayXd bands = group_bands({mag, 0}, layout);
  EXPECT_DOUBLE_EQ(bands[100], 4.0);
  EXPECT_EQ(bands.sum(), bands[100]);
}

TEST(InternalNoise, OneKilohertz) {
  EXPECT_NEAR(internal_noise(1000.0), std::pow(10.0, 0.1456), 1e-15);
  EXPECT_NEAR(internal_noise(1000.0), 1.3983, 1e-4);

  const auto layout = build_band_layout(48000);
  BandPattern zero{Eigen::MatrixXd::Zero(kBandCount, 3), Stage::pitch_mapped};
  const auto pitch = add_internal_noise(zero, layout);
  EXPECT_EQ(pitch.stage, Stage::pitch);
  for (Index k = 0; k < kBandCount; ++k) {
    for (Index n = 0; n < 3; ++n) EXPECT_EQ(pitch.values(k, n), internal_noise(layout.center[k]));
  }
  EXPECT_TRUE((pitch.values.array() > zero.values.array()).all());
}

TEST(FrequencySpreading, LowerSlopeIs27DbPerBark) {
  const Index masker = 60;
  const ArrayXd line = spreading_line(masker, upper_slope(2000.0, 60.0), kBandCount);
  EXPECT_NEAR(line.sum(), 1.0, 1e-12);
  for (Index k = 1; k <= masker; ++k) {
    const double db_per_band = 10.0 * std::log10(line[k] / line[k - 1]);
    EXPECT_NEAR(db_per_band / kBarkResolution, 27.0, 1e-9);
  }
  // Above the masker, the decay follows the upper slope.
  const double su = upper_slope(2000.0, 60.0);
  EXPECT_NEAR(10.0 * std::log10(line[masker + 5] / line[masker + 4]) / kBarkResolution, su, 1e-9);
}

TEST(FrequencySpreading, LouderMaskerFlattensUpperSlope) {
  const double fc = 1500.0;
  EXPECT_NEAR(upper_slope(fc, 80.0) - upper_slope(fc, 40.0), 8.0, 1e-12);
  const Index masker = 40;
  const ArrayXd soft = spreading_line(masker, upper_slope(fc, 40.0), kBandCount);
  const ArrayXd loud = spreading_line(masker, upper_slope(fc, 80.0), kBandCount);
  const double soft_tail = soft[masker + 20] / soft[masker];
  const double loud_tail = loud[masker + 20] / loud[masker];
  EXPECT_GT(loud_tail, soft_tail);
}

TEST(FrequencySpreading, PositiveAndFinite) {
  const auto layout = build_band_layout(48000);
  BandPattern uniform{Eigen::MatrixXd::Constant(kBandCount, 4, 1e5), Stage::pitch};
  const auto e2 = spread_frequency(uniform, layout);
  EXPECT_EQ(e2.stage, Stage::unsmeared_excitation);
  EXPECT_TRUE(e2.values.allFinite());
  EXPECT_TRUE((e2.values.array() > 0.0).all());
}

TEST(FrequencySpreading, NormalizationUsesFirstFrameSlopes) {
  // A frame equal to frame 0 with unit energy everywhere would give exactly 1
  // after normalization if it were the normalization frame itself.
  const auto layout = build_band_layout(48000);
  BandPattern ones{Eigen::MatrixXd::Ones(kBandCount, 2), Stage::pitch};
  const auto e2 = spread_frequency(ones, layout);
  EXPECT_TRUE(e2.values.isApproxToConstant(1.0, 1e-12));
}

TEST(TimeSpreading, CoefficientAtOneKilohertz) {
  const double tau = 0.008 + 0.1 * (0.030 - 0.008);
  EXPECT_NEAR(time_smoothing_coefficient(1000.0), std::exp(-4.0 / (187.5 * tau)), 1e-15);
  EXPECT_NEAR(time_smoothing_coefficient(1000.0), 0.1235, 1e-4);
}

TEST(TimeSpreading, DominatesInputAndDecaysGeometrically) {
  auto layout = build_band_layout(48000);
  BandPattern impulse{Eigen::MatrixXd::Zero(kBandCount, 8), Stage::unsmeared_excitation};
  impulse.values.col(0).setConstant(5.0);
  const auto e = spread_time(impulse, layout);
  EXPECT_EQ(e.stage, Stage::excitation);
  for (Index k : {0, 50, 108}) {
    const double a = time_smoothing_coefficient(layout.center[k]);
    EXPECT_EQ(e.values(k, 0), 5.0);
    for (Index m = 1; m < 8; ++m) EXPECT_NEAR(e.values(k, m), 5.0 * std::pow(a, m), 1e-12);
  }

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  BandPattern random{Eigen::MatrixXd(kBandCount, 30), Stage::unsmeared_excitation};
  for (Index i = 0; i < random.values.size(); ++i) random.values.data()[i] = u(rng);
  EXPECT_TRUE((spread_time(random, layout).values.array() >= random.values.array()).all());
}

TEST(MaskThreshold, OffsetBranches) {
  EXPECT_EQ(mask_offset_db(40), 3.0);
  EXPECT_EQ(mask_offset_db(48), 3.0);
  EXPECT_EQ(mask_offset_db(60), 3.75);
  BandPattern e{Eigen::MatrixXd::Constant(kBandCount, 2, 7.0), Stage::excitation};
  const auto m = mask_threshold(e);
  EXPECT_EQ(m.stage, Stage::mask);
  EXPECT_NEAR(m.values(40, 0), 7.0 / 1.9953, 1e-4);
  EXPECT_NEAR(m.values(60, 1), 7.0 / 2.3714, 1e-4);
  EXPECT_TRUE((m.values.array() < e.values.array()).all());
}

audio::AlignedPair make_pair(const ArrayXd& ref, const ArrayXd& test, int rate) {
  audio::AudioSignal r;
  r.sample_rate = rate;
  r.samples = ref;
  audio::AudioSignal t = r;
  t.samples = test;
  return audio::align_pair(r, t);
}

TEST(EarModel, IdenticalInputsGiveIdenticalPatterns) {
  std::mt19937_64 rng(4);
  ArrayXd x(20000);
  std::normal_distribution<double> g(0.0, 0.1);
  for (auto& v : x) v = g(rng);
  const auto pair = make_pair(x, x, 48000);
  const auto patterns = run_ear_model(pair, calibrate(92.0, 48000));
  EXPECT_EQ(patterns.reference.pitch.frames(), pair.frame_count);
  EXPECT_TRUE(patterns.reference.pitch.values == patterns.test.pitch.values);
  EXPECT_TRUE(patterns.reference.excitation.values == patterns.test.excitation.values);
  EXPECT_TRUE(patterns.reference.mask.values == patterns.test.mask.values);

  const auto again = run_ear_model(pair, calibrate(92.0, 48000));
  EXPECT_TRUE(again.reference.mask.values == patterns.reference.mask.values);
}

TEST(EarModel, SilenceGivesInternalNoiseFloor) {
  const ArrayXd silence = ArrayXd::Zero(10240);
  const auto patterns = run_ear_model(make_pair(silence, silence, 44100), calibrate(92.0, 44100));
  const auto layout = build_band_layout(44100);
  ASSERT_EQ(patterns.reference.pitch.frames(), 9);
  for (Index k = 0; k < kBandCount; ++k) {
    for (Index n = 0; n < 9; ++n) {
      EXPECT_EQ(patterns.reference.pitch.values(k, n), internal_noise(layout.center[k]));
    }
  }
}

TEST(EarModel, StageInvariantsOnRandomFrames) {
  std::mt19937_64 rng(17);
  ArrayXd x(audio::kFrameSize + 99 * audio::kHopSize);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (auto& v : x) v = u(rng) * (std::sin(static_cast<double>(&v - x.data()) * 1e-3) + 1.0) / 2.0;
  const auto layout = build_band_layout(48000);
  const auto p = analyze_signal(x, 48000, calibrate(92.0, 48000), layout);
  ASSERT_EQ(p.pitch.frames(), 100);
  for (const auto* stage : {&p.pitch_mapped, &p.pitch, &p.unsmeared_excitation, &p.excitation, &p.mask}) {
    EXPECT_TRUE(stage->values.allFinite());
    EXPECT_TRUE((stage->values.array() >= 0.0).all());
  }
  EXPECT_TRUE((p.pitch.values.array() > p.pitch_mapped.values.array()).all());
  EXPECT_TRUE((p.excitation.values.array() >= p.unsmeared_excitation.values.array()).all());
  EXPECT_TRUE((p.mask.values.array() < p.excitation.values.array()).all());
}

TEST(EarModel, PatternCsvHasHeaderAndOneRowPerBand) {
  const auto layout = build_band_layout(48000);
  BandPattern pattern{Eigen::MatrixXd::Ones(kBandCount, 2), Stage::pitch};
  std::ostringstream out;
  write_pattern_csv(out, pattern, layout);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "band,f_c_hz,frame_0,frame_1");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, kBandCount);
}

}  // namespace
}  // namespace fqi::ear
