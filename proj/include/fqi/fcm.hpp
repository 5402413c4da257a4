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

// Fuzzy C-Means clustering of (I1, I2) points and the conversion of clusters
// into Gaussian membership functions: projection onto each axis, then
// merging of heavily overlapping functions.

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "fqi/fuzzy.hpp"

namespace fqi::fcm {

inline constexpr int kDefaultClusters = 6;
inline constexpr double kDefaultFuzzifier = 2.0;
inline constexpr double kDefaultEpsilon = 1e-5;
inline constexpr int kDefaultMaxIterations = 300;
inline constexpr double kDefaultLambda = 1.5;
inline constexpr double kDefaultMergeThreshold = 0.7;
inline constexpr double kVarianceFloor = 1e-6;

struct FcmOptions {
  int clusters = kDefaultClusters;
  double fuzzifier = kDefaultFuzzifier;
  double epsilon = kDefaultEpsilon;
  int max_iterations = kDefaultMaxIterations;
  std::uint64_t seed = 0;
};

struct ClusterModel {
  Eigen::MatrixXd centroids;    // clusters x dims
  Eigen::MatrixXd memberships;  // points x clusters, rows sum to 1
  double fuzzifier = kDefaultFuzzifier;
  std::vector<double> objective_trace;  // J_m after each iteration
  int iterations = 0;
  bool converged = false;
};

// c_j = sum_i u_ij^m x_i / sum_i u_ij^m
Eigen::MatrixXd update_centroids(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                 const Eigen::Ref<const Eigen::MatrixXd>& memberships,
                                 double fuzzifier);

// u_ij = 1 / sum_k (|x_i - c_j| / |x_i - c_k|)^(2 / (m - 1)). A point sitting
// on a centroid belongs to that cluster only.
Eigen::MatrixXd update_memberships(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                   const Eigen::Ref<const Eigen::MatrixXd>& centroids,
                                   double fuzzifier);

double objective(const Eigen::Ref<const Eigen::MatrixXd>& data,
                 const Eigen::Ref<const Eigen::MatrixXd>& centroids,
                 const Eigen::Ref<const Eigen::MatrixXd>& memberships, double fuzzifier);

// Starts from a seeded random partition and alternates centroid and
// membership updates until no membership moves by epsilon or more.
ClusterModel fit(const Eigen::Ref<const Eigen::MatrixXd>& data, const FcmOptions& options = {});

struct ProjectedMF {
  int axis = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::vector<int> clusters;  // source clusters, more than one after merging

  double sigma() const;
};

// One function per cluster and axis; variance is lambda times the
// membership-weighted spread, floored at kVarianceFloor.
std::vector<ProjectedMF> project_variances(const ClusterModel& model,
                                           const Eigen::Ref<const Eigen::MatrixXd>& data,
                                           double lambda = kDefaultLambda);

std::vector<ProjectedMF> axis_functions(const std::vector<ProjectedMF>& all, int axis);

// Height of the highest point of min(a, b).
double crosspoint(const ProjectedMF& a, const ProjectedMF& b);

// Sigma-weighted mean; variance (s1^3 + s2^3) / (s1 + s2).
ProjectedMF fuse(const ProjectedMF& a, const ProjectedMF& b);

// Repeatedly fuses the pair with the highest crosspoint while it exceeds
// `threshold`. Output is sorted by mean.
std::vector<ProjectedMF> merge_mfs(std::vector<ProjectedMF> mfs,
                                   double threshold = kDefaultMergeThreshold);

// Requires exactly five functions per input; labels follow ascending mean.
fuzzy::FuzzySystem build_system(const std::vector<ProjectedMF>& input1,
                                const std::vector<ProjectedMF>& input2,
                                const fuzzy::RuleBase& rules = fuzzy::RuleBase::standard(),
                                const fuzzy::OutputTerms& output = fuzzy::default_output_terms(),
                                int resolution = fuzzy::kDefaultResolution);

// Columns: mf, axis, centroid, variance, clusters.
void write_clusters_csv(std::ostream& out, const std::vector<ProjectedMF>& mfs);

}  // namespace fqi::fcm
