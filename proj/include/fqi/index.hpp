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

// Fuzzy Quality Index: compares reference and test pitch patterns through
// level adaption, smoothing across bands and time, a min-ratio similarity
// field, and its per-frame mean and variance.

#include <algorithm>
#include <ostream>

#include <Eigen/Core>

#include "fqi/fuzzy.hpp"

namespace fqi::index {

inline constexpr int kDefaultHalfWidth = 3;
inline constexpr double kDefaultBeta = 0.85;
inline constexpr double kDefaultGamma = 10.0;

// How the per-frame correction factor K[n] is applied.
//  as_printed: K > 1 scales the reference by K, otherwise the test by K.
//  mirrored:   K is computed with the louder frame in the test role and
//              applied to it, so the louder pattern is pulled down
//              (K <= 1 always holds in that role).
enum class LevelAdaptBranch { as_printed, mirrored };

const char* to_string(LevelAdaptBranch branch);
LevelAdaptBranch level_adapt_branch_from(std::string_view text);

struct AdaptedPatterns {
  Eigen::MatrixXd reference;
  Eigen::MatrixXd test;
  Eigen::VectorXd k_factor;
};

// K[n] = (sum_k sqrt(test * ref) / sum_k test)^2 for one frame pair.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar correction_factor(const Eigen::MatrixBase<DerivedA>& reference,
                                            const Eigen::MatrixBase<DerivedB>& test) {
  const auto ratio = (reference.array() * test.array()).sqrt().sum() / test.sum();
  return ratio * ratio;
}

AdaptedPatterns level_adapt(const Eigen::Ref<const Eigen::MatrixXd>& reference,
                            const Eigen::Ref<const Eigen::MatrixXd>& test,
                            LevelAdaptBranch branch = LevelAdaptBranch::mirrored);

// Row-normalized triangular smoothing matrix over `bands` with weights
// U + 1 - |offset| inside +-U, truncated at the band edges.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> triangular_window(Eigen::Index bands,
                                                                        int half_width) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(bands, bands);
  for (Eigen::Index k = 0; k < bands; ++k) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, k - half_width);
    const Eigen::Index hi = std::min<Eigen::Index>(bands - 1, k + half_width);
    for (Eigen::Index i = lo; i <= hi; ++i) {
      w(k, i) = static_cast<Scalar>(half_width + 1 - std::abs(i - k));
    }
    w.row(k) /= w.row(k).sum();
  }
  return w;
}

// Band smoothing followed by F[:, n] = (1 - beta) F[:, n-1] + beta avg[:, n],
// warm-started with F[:, -1] = avg[:, 0].
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> smooth_patterns(
    const Eigen::MatrixBase<Derived>& adapted, int half_width = kDefaultHalfWidth,
    double beta = kDefaultBeta) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix filtered = triangular_window<Scalar>(adapted.rows(), half_width) * adapted;
  for (Eigen::Index n = 1; n < filtered.cols(); ++n) {
    filtered.col(n) = (1.0 - beta) * filtered.col(n - 1) + beta * filtered.col(n);
  }
  return filtered;
}

// D_p = min(R / T, T / R); equal values give exactly 1.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> similarity(
    const Eigen::MatrixBase<DerivedA>& reference, const Eigen::MatrixBase<DerivedB>& test) {
  const auto ratio = (reference.array() / test.array()).eval();
  return ratio.min(ratio.inverse()).matrix();
}

struct FrameStats {
  Eigen::VectorXd omega1;  // mean over bands
  Eigen::VectorXd omega2;  // variance over bands, clamped at 0
};

template <typename Derived>
FrameStats frame_stats(const Eigen::MatrixBase<Derived>& d_p) {
  FrameStats stats;
  stats.omega1 = d_p.colwise().mean().transpose();
  const Eigen::VectorXd mean_square = d_p.array().square().colwise().mean().transpose();
  stats.omega2 = (mean_square.array() - stats.omega1.array().square()).max(0.0).matrix();
  return stats;
}

struct FqiInputs {
  double i1 = 0.0;
  double i2 = 0.0;
  Eigen::VectorXd omega1;
  Eigen::VectorXd omega2;
};

FqiInputs global_indices(const FrameStats& stats, double gamma = kDefaultGamma);

struct FqiParams {
  int half_width = kDefaultHalfWidth;
  double beta = kDefaultBeta;
  double gamma = kDefaultGamma;
  LevelAdaptBranch branch = LevelAdaptBranch::mirrored;
};

struct FqiResult {
  double fqi = 0.0;
  FqiInputs inputs;
};

// Everything up to the fuzzy inputs (I1, I2).
FqiInputs compute_inputs(const Eigen::Ref<const Eigen::MatrixXd>& pitch_reference,
                         const Eigen::Ref<const Eigen::MatrixXd>& pitch_test,
                         const FqiParams& params = {});

FqiResult compute_fqi(const Eigen::Ref<const Eigen::MatrixXd>& pitch_reference,
                      const Eigen::Ref<const Eigen::MatrixXd>& pitch_test,
                      const fuzzy::FuzzySystem& system, const FqiParams& params = {});

// Columns: frame, omega1, omega2.
void write_omega_csv(std::ostream& out, const FqiInputs& inputs);

}  // namespace fqi::index
