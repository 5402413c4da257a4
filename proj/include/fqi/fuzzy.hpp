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

// Mamdani inference over two inputs: Gaussian fuzzification, MAX-MIN
// composition over a 5x5 rule grid, centroid defuzzification on [0, 1].

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <json.hpp>

namespace fqi::fuzzy {

inline constexpr std::size_t kInputTerms = 5;
inline constexpr std::size_t kOutputTerms = 4;
inline constexpr int kDefaultResolution = 1001;
inline constexpr int kMinResolution = 101;

enum class InputLabel { LL, LH, M, HL, HH };
enum class OutputLabel { P, M, G, H };

std::string_view to_string(InputLabel label);
std::string_view to_string(OutputLabel label);
InputLabel input_label_from(std::string_view text);
OutputLabel output_label_from(std::string_view text);

struct GaussianMF {
  double mean = 0.0;
  double sigma = 1.0;
  std::string label;

  template <typename T>
  T operator()(const T& x) const {
    using std::exp;
    const T z = (x - mean) / sigma;
    return exp(-0.5 * z * z);
  }
};

template <typename Derived>
auto membership(const GaussianMF& mf, const Eigen::ArrayBase<Derived>& x) {
  return (-0.5 * ((x - mf.mean) / mf.sigma).square()).exp();
}

using InputTerms = std::array<GaussianMF, kInputTerms>;
using OutputTerms = std::array<GaussianMF, kOutputTerms>;

// grid[a][b] is the consequent for input1 term a and input2 term b.
struct RuleBase {
  std::array<std::array<OutputLabel, kInputTerms>, kInputTerms> grid{};

  OutputLabel at(InputLabel input1, InputLabel input2) const {
    return grid[static_cast<std::size_t>(input1)][static_cast<std::size_t>(input2)];
  }

  // The 25-rule table the shipped system uses, rows I1 = LL..HH, columns I2 = LL..HH.
  static RuleBase standard();
};

struct FuzzySystem {
  InputTerms input1;
  InputTerms input2;
  OutputTerms output;
  RuleBase rules;
  int resolution = kDefaultResolution;

  // Throws InputError on non-positive sigmas, duplicate labels or a too coarse grid.
  void validate() const;

  static FuzzySystem shipped_default();
};

// Default output terms P, M, G, H: means 0.125 .. 0.875, sigma 0.15.
OutputTerms default_output_terms();

using Degrees = Eigen::Array<double, kInputTerms, 1>;
using Activations = Eigen::Array<double, kInputTerms, kInputTerms>;

Degrees fuzzify(double x, const InputTerms& terms);

// activation(a, b) = min(deg1[a], deg2[b]).
Activations rule_activations(const Degrees& deg1, const Degrees& deg2);

// Per-label firing strength: the max activation over rules with that consequent.
Eigen::Array<double, kOutputTerms, 1> output_strengths(const Activations& activations,
                                                       const RuleBase& rules);

// Aggregated output set sampled on `resolution` uniform points of [0, 1].
Eigen::ArrayXd infer(const Degrees& deg1, const Degrees& deg2, const RuleBase& rules,
                     const OutputTerms& output, int resolution);

// Centroid of a curve sampled uniformly on [0, 1].
double defuzzify_centroid(const Eigen::Ref<const Eigen::ArrayXd>& curve);

double evaluate(const FuzzySystem& system, double i1, double i2);

void to_json(nlohmann::json& j, const GaussianMF& mf);
void from_json(const nlohmann::json& j, GaussianMF& mf);
void to_json(nlohmann::json& j, const FuzzySystem& system);
void from_json(const nlohmann::json& j, FuzzySystem& system);

FuzzySystem load_system(const std::filesystem::path& path);
void save_system(const std::filesystem::path& path, const FuzzySystem& system);

}  // namespace fqi::fuzzy
