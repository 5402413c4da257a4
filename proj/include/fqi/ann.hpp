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

// Three-layer perceptron mapping a metric vector to an Objective Difference
// Grade, trained with resilient propagation on full batches.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace fqi::ann {

inline constexpr double kOdgLow = -4.0;
inline constexpr double kOdgHigh = 0.0;

struct MlpModel {
  Eigen::MatrixXd hidden_weights;  // hidden x inputs
  Eigen::VectorXd hidden_bias;
  Eigen::VectorXd output_weights;  // hidden
  double output_bias = 0.0;
  Eigen::VectorXd input_min;
  Eigen::VectorXd input_max;
  double odg_low = kOdgLow;
  double odg_high = kOdgHigh;
  std::vector<std::string> input_names;

  Eigen::Index inputs() const { return hidden_weights.cols(); }
  Eigen::Index hidden() const { return hidden_weights.rows(); }

  // Zero weights with identity normalization on [0, 1].
  static MlpModel zeros(Eigen::Index inputs, Eigen::Index hidden);
  void validate() const;
};

struct TrainingSet {
  Eigen::MatrixXd metrics;  // rows x inputs
  Eigen::VectorXd targets;  // SDG in [-4, 0]
  std::vector<std::string> names;

  void validate() const;
};

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 / (1.0 + (-x).exp());
}

// Per-column min/max of `metrics`. A constant column gets the range
// [v - 0.5, v + 0.5] so its training value lands on 0.5.
void fit_normalization(MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& metrics);

// (x - min) / (max - min) per column.
Eigen::MatrixXd normalize(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& metrics);

// Output neuron activation in (0, 1) for already normalized rows.
Eigen::VectorXd network_output(const MlpModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& normalized);

double forward(const MlpModel& model, const Eigen::Ref<const Eigen::VectorXd>& metrics);
Eigen::VectorXd forward_batch(const MlpModel& model,
                              const Eigen::Ref<const Eigen::MatrixXd>& metrics);

// Flat parameter layout: hidden weights (row major), hidden bias, output
// weights, output bias.
Eigen::VectorXd pack(const MlpModel& model);
void unpack(MlpModel& model, const Eigen::Ref<const Eigen::VectorXd>& params);

double unit_target(const MlpModel& model, double sdg);

// Mean squared error between network output and unit targets.
double loss(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& normalized,
            const Eigen::Ref<const Eigen::VectorXd>& unit_targets);

// d loss / d params in the pack() layout.
Eigen::VectorXd loss_gradient(const MlpModel& model,
                              const Eigen::Ref<const Eigen::MatrixXd>& normalized,
                              const Eigen::Ref<const Eigen::VectorXd>& unit_targets);

struct RpropOptions {
  int hidden = 12;
  int epochs = 2000;
  std::uint64_t seed = 0;
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta_initial = 0.1;
  double delta_max = 50.0;
  double delta_min = 1e-6;
  double init_range = 0.5;  // initial weights uniform in [-r, r]
};

struct TrainResult {
  MlpModel model;
  std::vector<double> mse_trace;  // training loss before each epoch's update, then final
  double final_mse = 0.0;         // unit-target loss of the returned model
  std::vector<std::string> warnings;
};

// iRprop- on the full batch. The returned weights are the lowest-loss
// parameters seen, so final_mse never exceeds the initial loss.
TrainResult train_rprop(const TrainingSet& data, const RpropOptions& options = {});

struct Evaluation {
  double pearson = 0.0;
  double mse = 0.0;
};

Evaluation evaluate_model(const MlpModel& model, const TrainingSet& test);

void to_json(nlohmann::json& j, const MlpModel& model);
void from_json(const nlohmann::json& j, MlpModel& model);

MlpModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const MlpModel& model);

// Metric columns followed by a final `sdg` column.
TrainingSet load_training_set(const std::filesystem::path& path);

}  // namespace fqi::ann
