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

#include "fqi/index.hpp"

#include <string>

#include "fqi/error.hpp"

namespace fqi::index {

const char* to_string(LevelAdaptBranch branch) {
  return branch == LevelAdaptBranch::as_printed ? "as_printed" : "mirrored";
}

LevelAdaptBranch level_adapt_branch_from(std::string_view text) {
  if (text == "as_printed") return LevelAdaptBranch::as_printed;
  if (text == "mirrored") return LevelAdaptBranch::mirrored;
  throw InputError("unknown level adapt branch '" + std::string(text) +
                   "', expected as_printed or mirrored");
}

AdaptedPatterns level_adapt(const Eigen::Ref<const Eigen::MatrixXd>& reference,
                            const Eigen::Ref<const Eigen::MatrixXd>& test,
                            LevelAdaptBranch branch) {
  if (reference.rows() != test.rows() || reference.cols() != test.cols()) {
    throw InputError("level_adapt: pattern shapes differ");
  }
  if ((reference.array() < 0.0).any() || (test.array() < 0.0).any()) {
    throw InputError("level_adapt: patterns must be non-negative");
  }
  AdaptedPatterns out{reference, test, Eigen::VectorXd(reference.cols())};
  for (Eigen::Index n = 0; n < reference.cols(); ++n) {
    const double ref_energy = reference.col(n).sum();
    const double test_energy = test.col(n).sum();
    if (!(test_energy > 0.0) || !(ref_energy > 0.0)) {
      throw ComputationError("level_adapt: frame " + std::to_string(n) + " has zero energy");
    }
    if (branch == LevelAdaptBranch::as_printed) {
      const double k = correction_factor(reference.col(n), test.col(n));
      out.k_factor[n] = k;
      if (k > 1.0) {
        out.reference.col(n) *= k;
      } else {
        out.test.col(n) *= k;
      }
    } else if (test_energy > ref_energy) {
      const double k = correction_factor(reference.col(n), test.col(n));
      out.k_factor[n] = k;
      out.test.col(n) *= k;
    } else if (ref_energy > test_energy) {
      const double k = correction_factor(test.col(n), reference.col(n));
      out.k_factor[n] = k;
      out.reference.col(n) *= k;
    } else {
      out.k_factor[n] = 1.0;
    }
  }
  return out;
}

FqiInputs global_indices(const FrameStats& stats, double gamma) {
  if (stats.omega1.size() != stats.omega2.size() || stats.omega1.size() == 0) {
    throw InputError("global_indices: omega sequences must be non-empty and of equal length");
  }
  FqiInputs inputs;
  inputs.omega1 = stats.omega1;
  inputs.omega2 = stats.omega2;
  inputs.i1 = stats.omega1.mean();
  inputs.i2 = std::min(gamma * stats.omega2.mean(), 1.0);
  return inputs;
}

FqiInputs compute_inputs(const Eigen::Ref<const Eigen::MatrixXd>& pitch_reference,
                         const Eigen::Ref<const Eigen::MatrixXd>& pitch_test,
                         const FqiParams& params) {
  if (pitch_reference.cols() == 0) throw InputError("compute_fqi: no frames");
  const auto adapted = level_adapt(pitch_reference, pitch_test, params.branch);
  const Eigen::MatrixXd filtered_ref =
      smooth_patterns(adapted.reference, params.half_width, params.beta);
  const Eigen::MatrixXd filtered_test =
      smooth_patterns(adapted.test, params.half_width, params.beta);
  return global_indices(frame_stats(similarity(filtered_ref, filtered_test)), params.gamma);
}

FqiResult compute_fqi(const Eigen::Ref<const Eigen::MatrixXd>& pitch_reference,
                      const Eigen::Ref<const Eigen::MatrixXd>& pitch_test,
                      const fuzzy::FuzzySystem& system, const FqiParams& params) {
  FqiResult result;
  result.inputs = compute_inputs(pitch_reference, pitch_test, params);
  result.fqi = fuzzy::evaluate(system, result.inputs.i1, result.inputs.i2);
  return result;
}

void write_omega_csv(std::ostream& out, const FqiInputs& inputs) {
  out << "frame,omega1,omega2\n";
  out.precision(17);
  for (Eigen::Index n = 0; n < inputs.omega1.size(); ++n) {
    out << n << ',' << inputs.omega1[n] << ',' << inputs.omega2[n] << '\n';
  }
}

}  // namespace fqi::index
