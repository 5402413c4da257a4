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

#include "fqi/fcm.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fqi/error.hpp"

namespace fqi::fcm {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

MatrixXd random_data(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd x(n, 2);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

TEST(Memberships, EquidistantPointIsShared) {
  MatrixXd centroids(6, 2);
  for (int j = 0; j < 6; ++j) {
    const double angle = j * std::numbers::pi / 3.0;
    centroids.row(j) << 0.5 + 0.2 * std::cos(angle), 0.5 + 0.2 * std::sin(angle);
  }
  MatrixXd point(1, 2);
  point << 0.5, 0.5;
  const MatrixXd u = update_memberships(point, centroids, 2.0);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(u(0, j), 1.0 / 6.0, 1e-12);
}

TEST(Memberships, PointOnCentroid) {
  MatrixXd centroids(3, 2);
  centroids << 0.1, 0.1, 0.5, 0.5, 0.9, 0.9;
  MatrixXd point(1, 2);
  point << 0.5, 0.5;
  const MatrixXd u = update_memberships(point, centroids, 2.0);
  EXPECT_EQ(u(0, 1), 1.0);
  EXPECT_EQ(u(0, 0), 0.0);
  EXPECT_EQ(u(0, 2), 0.0);
}

TEST(Memberships, TwoCentroidsHandOracle) {
  MatrixXd centroids(2, 1);
  centroids << 0.0, 3.0;
  MatrixXd point(1, 1);
  point << 1.0;
  // Distances 1 and 2: u = 1 / (1 + (1/2)^2) = 0.8 for m = 2.
  const MatrixXd u = update_memberships(point, centroids, 2.0);
  EXPECT_NEAR(u(0, 0), 0.8, 1e-15);
  EXPECT_NEAR(u(0, 1), 0.2, 1e-15);
}

TEST(Centroids, WeightedMean) {
  MatrixXd x(2, 1);
  x << 0.0, 1.0;
  MatrixXd u(2, 1);
  u << 1.0, 0.5;
  // Weights 1 and 0.25 for m = 2.
  EXPECT_NEAR(update_centroids(x, u, 2.0)(0, 0), 0.25 / 1.25, 1e-15);
}

TEST(Fit, RowsSumToOneAndObjectiveNonIncreasing) {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd x = random_data(rng, 60);
    FcmOptions options;
    options.seed = static_cast<std::uint64_t>(trial);
    const auto model = fit(x, options);
    ASSERT_EQ(model.memberships.rows(), 60);
    ASSERT_EQ(model.memberships.cols(), 6);
    EXPECT_TRUE(model.memberships.rowwise().sum().isApproxToConstant(1.0, 1e-12));
    EXPECT_TRUE((model.memberships.array() >= 0.0).all());
    ASSERT_FALSE(model.objective_trace.empty());
    for (std::size_t t = 1; t < model.objective_trace.size(); ++t) {
      EXPECT_LE(model.objective_trace[t], model.objective_trace[t - 1] * (1.0 + 1e-12));
    }
  }
}

TEST(Fit, RecoversTwoTightBlobs) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1e-4);
  MatrixXd x(80, 2);
  for (Index i = 0; i < 40; ++i) {
    x.row(i) << 0.2 + g(rng), 0.3 + g(rng);
    x.row(40 + i) << 0.8 + g(rng), 0.7 + g(rng);
  }
  FcmOptions options;
  options.clusters = 2;
  options.seed = 3;
  const auto model = fit(x, options);
  EXPECT_TRUE(model.converged);
  MatrixXd c = model.centroids;
  if (c(0, 0) > c(1, 0)) c.row(0).swap(c.row(1));
  EXPECT_NEAR(c(0, 0), 0.2, 1e-3);
  EXPECT_NEAR(c(0, 1), 0.3, 1e-3);
  EXPECT_NEAR(c(1, 0), 0.8, 1e-3);
  EXPECT_NEAR(c(1, 1), 0.7, 1e-3);
}

TEST(Fit, SeededDeterminism) {
  std::mt19937_64 rng(55);
  const MatrixXd x = random_data(rng, 40);
  FcmOptions options;
  options.seed = 99;
  const auto a = fit(x, options);
  const auto b = fit(x, options);
  EXPECT_TRUE(a.centroids == b.centroids);
  EXPECT_TRUE(a.memberships == b.memberships);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(Fit, RejectsBadInput) {
  EXPECT_THROW(fit(MatrixXd::Zero(5, 2)), InputError);
  FcmOptions bad;
  bad.fuzzifier = 1.0;
  EXPECT_THROW(fit(MatrixXd::Random(10, 2), bad), InputError);
  MatrixXd nan = MatrixXd::Zero(10, 2);
  nan(3, 1) = std::nan("");
  EXPECT_THROW(fit(nan), InputError);
}

TEST(Projection, LambdaScalesAndFloors) {
  std::mt19937_64 rng(31);
  const MatrixXd x = random_data(rng, 30);
  const auto model = fit(x);
  const auto one = project_variances(model, x, 1.0);
  const auto two = project_variances(model, x, 2.0);
  ASSERT_EQ(one.size(), 12u);
  EXPECT_EQ(axis_functions(one, 0).size(), 6u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_NEAR(two[i].variance, 2.0 * one[i].variance, 1e-15);
    EXPECT_EQ(one[i].mean, model.centroids(one[i].clusters[0], one[i].axis));
  }

  ClusterModel crisp;
  crisp.centroids = MatrixXd::Constant(1, 2, 0.5);
  crisp.memberships = MatrixXd::Ones(4, 1);
  const auto floored = project_variances(crisp, MatrixXd::Constant(4, 2, 0.5));
  EXPECT_EQ(floored[0].variance, kVarianceFloor);
  EXPECT_THROW(project_variances(crisp, MatrixXd::Constant(4, 2, 0.5), 0.0), InputError);
}

TEST(Merge, CrosspointAndFusion) {
  const ProjectedMF a{0, 0.4, 0.01, {0}};
  const ProjectedMF b{0, 0.6, 0.01, {1}};
  // Equal sigmas meet halfway: z = 0.1 / 0.1.
  EXPECT_NEAR(crosspoint(a, b), std::exp(-0.5), 1e-15);
  EXPECT_EQ(crosspoint(a, a), 1.0);

  const ProjectedMF c{0, 0.25, 0.25, {2}};
  const ProjectedMF d{0, 0.75, 0.25, {3}};
  const auto fused = fuse(c, d);
  EXPECT_EQ(fused.mean, 0.5);
  EXPECT_EQ(fused.variance, 0.25);
  EXPECT_EQ(fused.clusters, (std::vector<int>{2, 3}));

  // Unequal sigmas 0.1 and 0.3.
  const auto skew = fuse({0, 0.0, 0.01, {0}}, {0, 1.0, 0.09, {1}});
  EXPECT_NEAR(skew.mean, 0.75, 1e-15);
  EXPECT_NEAR(skew.variance, (0.001 + 0.027) / 0.4, 1e-15);
}

TEST(Merge, ThresholdControlsFusion) {
  const std::vector<ProjectedMF> mfs = {
      {0, 0.10, 0.0004, {0}}, {0, 0.11, 0.0004, {1}}, {0, 0.9, 0.0004, {2}}};
  const auto merged = merge_mfs(mfs, 0.7);
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_NEAR(merged[0].mean, 0.105, 1e-15);
  EXPECT_EQ(merged[1].clusters, (std::vector<int>{2}));
  EXPECT_EQ(merge_mfs(mfs, 0.9999).size(), 3u);
  EXPECT_EQ(merge_mfs(mfs, 0.0).size(), 1u);
}

TEST(Merge, TerminatesAndRespectsBoundsOnRandomSets) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mean(0.0, 1.0);
  std::uniform_real_distribution<double> var(1e-4, 0.05);
  std::uniform_int_distribution<int> count(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ProjectedMF> mfs;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) mfs.push_back({0, mean(rng), var(rng), {i}});
    const auto merged = merge_mfs(mfs);
    ASSERT_GE(merged.size(), 1u);
    ASSERT_LE(merged.size(), mfs.size());
    std::size_t covered = 0;
    for (std::size_t i = 0; i < merged.size(); ++i) {
      covered += merged[i].clusters.size();
      if (i > 0) EXPECT_LE(merged[i - 1].mean, merged[i].mean);
    }
    EXPECT_EQ(covered, mfs.size());
    for (std::size_t a = 0; a < merged.size(); ++a) {
      for (std::size_t b = a + 1; b < merged.size(); ++b) {
        EXPECT_LE(crosspoint(merged[a], merged[b]), 0.7);
      }
    }
  }
  // Fused functions stay between their parents.
  for (int trial = 0; trial < 200; ++trial) {
    const ProjectedMF a{0, mean(rng), var(rng), {0}};
    const ProjectedMF b{0, mean(rng), var(rng), {1}};
    const auto f = fuse(a, b);
    EXPECT_GE(f.mean, std::min(a.mean, b.mean) - 1e-15);
    EXPECT_LE(f.mean, std::max(a.mean, b.mean) + 1e-15);
    EXPECT_GE(f.sigma(), std::min(a.sigma(), b.sigma()) * (1.0 - 1e-12));
    EXPECT_LE(f.sigma(), std::max(a.sigma(), b.sigma()) * (1.0 + 1e-12));
  }
}

TEST(BuildSystem, LabelsFollowMeanOrder) {
  std::vector<ProjectedMF> in1;
  std::vector<ProjectedMF> in2;
  for (int i = 0; i < 5; ++i) {
    in1.push_back({0, 0.9 - 0.2 * i, 0.01, {i}});
    in2.push_back({1, 0.1 + 0.2 * i, 0.04, {i}});
  }
  const auto system = build_system(in1, in2);
  EXPECT_NO_THROW(system.validate());
  EXPECT_EQ(system.input1[0].label, "LL");
  EXPECT_NEAR(system.input1[0].mean, 0.1, 1e-12);
  EXPECT_NEAR(system.input1[4].mean, 0.9, 1e-12);
  EXPECT_NEAR(system.input2[3].sigma, 0.2, 1e-15);
  in1.pop_back();
  EXPECT_THROW(build_system(in1, in2), InputError);
}

TEST(ClustersCsv, Header) {
  std::ostringstream out;
  write_clusters_csv(out, {{0, 0.5, 0.01, {1, 4}}});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "mf,axis,centroid,variance,clusters");
}

}  // namespace
}  // namespace fqi::fcm
