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

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fqi/error.hpp"

namespace fqi::report {

// Sample Pearson correlation. Both series need at least two values and
// non-zero variance.
template <typename DerivedX, typename DerivedY>
double pearson(const Eigen::DenseBase<DerivedX>& xs, const Eigen::DenseBase<DerivedY>& ys) {
  if (xs.size() != ys.size()) throw InputError("pearson: series lengths differ");
  if (xs.size() < 2) throw InputError("pearson: need at least two values");
  const Eigen::ArrayXd x = xs.derived().template cast<double>().array();
  const Eigen::ArrayXd y = ys.derived().template cast<double>().array();
  const Eigen::ArrayXd dx = x - x.mean();
  const Eigen::ArrayXd dy = y - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw ComputationError("pearson: undefined for a constant series");
  }
  return std::clamp((dx * dy).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

template <typename DerivedX, typename DerivedY>
double mse(const Eigen::DenseBase<DerivedX>& xs, const Eigen::DenseBase<DerivedY>& ys) {
  if (xs.size() != ys.size()) throw InputError("mse: series lengths differ");
  if (xs.size() == 0) throw InputError("mse: empty series");
  return (xs.derived().template cast<double>().array() -
          ys.derived().template cast<double>().array())
      .square()
      .mean();
}

struct BatchRow {
  std::string id;
  std::string codec;
  std::string bitrate;
  double fqi = 0.0;
  std::optional<double> odg;
  std::optional<double> sdg;
};

struct BatchResult {
  std::vector<BatchRow> rows;

  // Unique ids, fqi in [0, 1], odg in [-4, 0].
  void validate() const;
};

enum class GroupBy { codec, codec_bitrate };

struct SummaryRow {
  std::string group;
  std::size_t n = 0;
  double mean_fqi = 0.0;
  std::optional<double> mean_odg;
  std::optional<double> pearson;
  std::optional<double> mse;
};

// One row per group in order of first appearance. Correlation and error are
// taken against SDG for rows that carry one: ODG is the predictor when every
// such row has it, otherwise FQI (correlation only, its scale is not SDG's).
std::vector<SummaryRow> aggregate(const BatchResult& batch, GroupBy group_by = GroupBy::codec);

// Columns: group, n, mean_fqi, mean_odg, pearson, mse. Missing values are empty.
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace fqi::report
