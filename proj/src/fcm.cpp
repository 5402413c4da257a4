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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "fqi/error.hpp"

namespace fqi::fcm {

using Eigen::Index;
using Eigen::MatrixXd;

Eigen::MatrixXd update_centroids(const Eigen::Ref<const MatrixXd>& data,
                                 const Eigen::Ref<const MatrixXd>& memberships, double fuzzifier) {
  const MatrixXd weights = memberships.array().pow(fuzzifier).matrix();
  MatrixXd centroids = weights.transpose() * data;
  const Eigen::VectorXd totals = weights.colwise().sum().transpose();
  for (Index j = 0; j < centroids.rows(); ++j) {
    if (!(totals[j] > 0.0)) throw ComputationError("fcm: cluster " + std::to_string(j) + " is empty");
    centroids.row(j) /= totals[j];
  }
  return centroids;
}

Eigen::MatrixXd update_memberships(const Eigen::Ref<const MatrixXd>& data,
                                   const Eigen::Ref<const MatrixXd>& centroids, double fuzzifier) {
  const Index points = data.rows();
  const Index clusters = centroids.rows();
  const double exponent = 2.0 / (fuzzifier - 1.0);
  MatrixXd u(points, clusters);
  Eigen::VectorXd dist(clusters);
  for (Index i = 0; i < points; ++i) {
    Index coincident = -1;
    for (Index j = 0; j < clusters; ++j) {
      dist[j] = (data.row(i) - centroids.row(j)).norm();
      if (dist[j] == 0.0 && coincident < 0) coincident = j;
    }
    if (coincident >= 0) {
      u.row(i).setZero();
      u(i, coincident) = 1.0;
      continue;
    }
    // Inverse-distance form, normalized: u_ij = d_ij^-e / sum_k d_ik^-e.
    const Eigen::VectorXd inv = dist.array().pow(-exponent).matrix();
    u.row(i) = (inv / inv.sum()).transpose();
  }
  return u;
}

double objective(const Eigen::Ref<const MatrixXd>& data, const Eigen::Ref<const MatrixXd>& centroids,
                 const Eigen::Ref<const MatrixXd>& memberships, double fuzzifier) {
  double j_m = 0.0;
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < centroids.rows(); ++j) {
      j_m += std::pow(memberships(i, j), fuzzifier) *
             (data.row(i) - centroids.row(j)).squaredNorm();
    }
  }
  return j_m;
}

ClusterModel fit(const Eigen::Ref<const MatrixXd>& data, const FcmOptions& options) {
  if (options.clusters < 1) throw InputError("fcm: cluster count must be positive");
  if (data.rows() < options.clusters) {
    throw InputError("fcm: need at least " + std::to_string(options.clusters) + " points, got " +
                     std::to_string(data.rows()));
  }
  if (!(options.epsilon > 0.0)) throw InputError("fcm: epsilon must be positive");
  if (!(options.fuzzifier > 1.0)) throw InputError("fcm: fuzzifier must exceed 1");
  if (!data.allFinite()) throw InputError("fcm: data contains non-finite values");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  MatrixXd u(data.rows(), options.clusters);
  for (Index i = 0; i < u.rows(); ++i) {
    for (Index j = 0; j < u.cols(); ++j) u(i, j) = uniform(rng) + std::numeric_limits<double>::min();
    u.row(i) /= u.row(i).sum();
  }

  ClusterModel model;
  model.fuzzifier = options.fuzzifier;
  for (int it = 0; it < options.max_iterations; ++it) {
    model.centroids = update_centroids(data, u, options.fuzzifier);
    MatrixXd next = update_memberships(data, model.centroids, options.fuzzifier);
    const double change = (next - u).cwiseAbs().maxCoeff();
    u = std::move(next);
    model.objective_trace.push_back(objective(data, model.centroids, u, options.fuzzifier));
    model.iterations = it + 1;
    if (change < options.epsilon) {
      model.converged = true;
      break;
    }
  }
  model.memberships = std::move(u);
  return model;
}

double ProjectedMF::sigma() const { return std::sqrt(variance); }

std::vector<ProjectedMF> project_variances(const ClusterModel& model,
                                           const Eigen::Ref<const MatrixXd>& data, double lambda) {
  if (!(lambda > 0.0)) throw InputError("project_variances: lambda must be positive");
  const MatrixXd weights = model.memberships.array().pow(model.fuzzifier).matrix();
  std::vector<ProjectedMF> out;
  for (Index axis = 0; axis < data.cols(); ++axis) {
    for (Index j = 0; j < model.centroids.rows(); ++j) {
      const double c = model.centroids(j, axis);
      const double spread =
          (weights.col(j).array() * (data.col(axis).array() - c).square()).sum() /
          weights.col(j).sum();
      out.push_back({static_cast<int>(axis), c, std::max(lambda * spread, kVarianceFloor),
                     {static_cast<int>(j)}});
    }
  }
  return out;
}

std::vector<ProjectedMF> axis_functions(const std::vector<ProjectedMF>& all, int axis) {
  std::vector<ProjectedMF> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out),
               [axis](const ProjectedMF& mf) { return mf.axis == axis; });
  return out;
}

double crosspoint(const ProjectedMF& a, const ProjectedMF& b) {
  // The curves meet between the means where (x - m1)/s1 = (m2 - x)/s2.
  const double z = (a.mean - b.mean) / (a.sigma() + b.sigma());
  return std::exp(-0.5 * z * z);
}

ProjectedMF fuse(const ProjectedMF& a, const ProjectedMF& b) {
  const double sa = a.sigma();
  const double sb = b.sigma();
  ProjectedMF merged;
  merged.axis = a.axis;
  merged.mean = (a.mean * sa + b.mean * sb) / (sa + sb);
  merged.variance = (sa * sa * sa + sb * sb * sb) / (sa + sb);
  merged.clusters = a.clusters;
  merged.clusters.insert(merged.clusters.end(), b.clusters.begin(), b.clusters.end());
  std::sort(merged.clusters.begin(), merged.clusters.end());
  return merged;
}

std::vector<ProjectedMF> merge_mfs(std::vector<ProjectedMF> mfs, double threshold) {
  while (mfs.size() > 1) {
    double best = -1.0;
    std::size_t best_a = 0;
    std::size_t best_b = 0;
    for (std::size_t a = 0; a < mfs.size(); ++a) {
      for (std::size_t b = a + 1; b < mfs.size(); ++b) {
        const double cp = crosspoint(mfs[a], mfs[b]);
        if (cp > best) {
          best = cp;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (!(best > threshold)) break;
    mfs[best_a] = fuse(mfs[best_a], mfs[best_b]);
    mfs.erase(mfs.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  std::sort(mfs.begin(), mfs.end(),
            [](const ProjectedMF& a, const ProjectedMF& b) { return a.mean < b.mean; });
  return mfs;
}

fuzzy::FuzzySystem build_system(const std::vector<ProjectedMF>& input1,
                                const std::vector<ProjectedMF>& input2,
                                const fuzzy::RuleBase& rules, const fuzzy::OutputTerms& output,
                                int resolution) {
  auto to_terms = [](std::vector<ProjectedMF> mfs, const char* name) {
    if (mfs.size() != fuzzy::kInputTerms) {
      throw InputError(std::string(name) + " has " + std::to_string(mfs.size()) +
                       " membership functions after merging, expected 5; adjust the merge "
                       "threshold or lambda");
    }
    std::sort(mfs.begin(), mfs.end(),
              [](const ProjectedMF& a, const ProjectedMF& b) { return a.mean < b.mean; });
    fuzzy::InputTerms terms;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      terms[i] = {mfs[i].mean, mfs[i].sigma(),
                  std::string(fuzzy::to_string(static_cast<fuzzy::InputLabel>(i)))};
    }
    return terms;
  };
  fuzzy::FuzzySystem system;
  system.input1 = to_terms(input1, "input1");
  system.input2 = to_terms(input2, "input2");
  system.output = output;
  system.rules = rules;
  system.resolution = resolution;
  system.validate();
  return system;
}

void write_clusters_csv(std::ostream& out, const std::vector<ProjectedMF>& mfs) {
  out << "mf,axis,centroid,variance,clusters\n";
  out.precision(10);
  for (std::size_t i = 0; i < mfs.size(); ++i) {
    out << i + 1 << ",I" << mfs[i].axis + 1 << ',' << mfs[i].mean << ',' << mfs[i].variance << ',';
    for (std::size_t c = 0; c < mfs[i].clusters.size(); ++c) {
      if (c) out << ' ';
      out << mfs[i].clusters[c] + 1;
    }
    out << '\n';
  }
}

}  // namespace fqi::fcm
