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

#include "fqi/ann.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "fqi/csv.hpp"
#include "fqi/error.hpp"
#include "fqi/report.hpp"

namespace fqi::ann {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MlpModel MlpModel::zeros(Index inputs, Index hidden) {
  MlpModel model;
  model.hidden_weights = MatrixXd::Zero(hidden, inputs);
  model.hidden_bias = VectorXd::Zero(hidden);
  model.output_weights = VectorXd::Zero(hidden);
  model.input_min = VectorXd::Zero(inputs);
  model.input_max = VectorXd::Ones(inputs);
  return model;
}

void MlpModel::validate() const {
  if (inputs() < 1 || hidden() < 1) throw InputError("mlp: empty topology");
  if (hidden_bias.size() != hidden() || output_weights.size() != hidden() ||
      input_min.size() != inputs() || input_max.size() != inputs()) {
    throw InputError("mlp: inconsistent parameter shapes");
  }
  if (!hidden_weights.allFinite() || !hidden_bias.allFinite() || !output_weights.allFinite() ||
      !std::isfinite(output_bias)) {
    throw InputError("mlp: non-finite weights");
  }
  if (!((input_max - input_min).array() > 0.0).all()) {
    throw InputError("mlp: normalization max must exceed min for every input");
  }
  if (!(odg_high > odg_low)) throw InputError("mlp: odg range is empty");
  if (!input_names.empty() && static_cast<Index>(input_names.size()) != inputs()) {
    throw InputError("mlp: input_names does not match the input width");
  }
}

void TrainingSet::validate() const {
  if (metrics.rows() != targets.size()) throw InputError("training set: row count mismatch");
  if (!metrics.allFinite() || !targets.allFinite()) {
    throw InputError("training set: non-finite values");
  }
  for (Index r = 0; r < targets.size(); ++r) {
    if (targets[r] < kOdgLow || targets[r] > kOdgHigh) {
      throw InputError("training set: row " + std::to_string(r + 1) + " SDG " +
                       std::to_string(targets[r]) + " outside [-4, 0]");
    }
  }
}

void fit_normalization(MlpModel& model, const Eigen::Ref<const MatrixXd>& metrics) {
  model.input_min = metrics.colwise().minCoeff().transpose();
  model.input_max = metrics.colwise().maxCoeff().transpose();
  for (Index c = 0; c < metrics.cols(); ++c) {
    if (!(model.input_max[c] > model.input_min[c])) {
      model.input_min[c] -= 0.5;
      model.input_max[c] += 0.5;
    }
  }
}

MatrixXd normalize(const MlpModel& model, const Eigen::Ref<const MatrixXd>& metrics) {
  const Eigen::RowVectorXd lo = model.input_min.transpose();
  const Eigen::RowVectorXd span = (model.input_max - model.input_min).transpose();
  return (metrics.rowwise() - lo).array().rowwise() / span.array();
}

VectorXd network_output(const MlpModel& model, const Eigen::Ref<const MatrixXd>& normalized) {
  const MatrixXd pre = (normalized * model.hidden_weights.transpose()).rowwise() +
                       model.hidden_bias.transpose();
  const MatrixXd hidden = sigmoid(pre.array()).matrix();
  return sigmoid(((hidden * model.output_weights).array() + model.output_bias)).matrix();
}

VectorXd forward_batch(const MlpModel& model, const Eigen::Ref<const MatrixXd>& metrics) {
  if (metrics.cols() != model.inputs()) {
    throw InputError("mlp: expected " + std::to_string(model.inputs()) + " metrics, got " +
                     std::to_string(metrics.cols()));
  }
  const VectorXd out = network_output(model, normalize(model, metrics));
  return (model.odg_low + (model.odg_high - model.odg_low) * out.array()).matrix();
}

double forward(const MlpModel& model, const Eigen::Ref<const VectorXd>& metrics) {
  return forward_batch(model, metrics.transpose())[0];
}

VectorXd pack(const MlpModel& model) {
  const Index h = model.hidden();
  const Index n = model.inputs();
  VectorXd params(h * n + 2 * h + 1);
  Index at = 0;
  for (Index r = 0; r < h; ++r) {
    params.segment(at, n) = model.hidden_weights.row(r).transpose();
    at += n;
  }
  params.segment(at, h) = model.hidden_bias;
  at += h;
  params.segment(at, h) = model.output_weights;
  at += h;
  params[at] = model.output_bias;
  return params;
}

void unpack(MlpModel& model, const Eigen::Ref<const VectorXd>& params) {
  const Index h = model.hidden();
  const Index n = model.inputs();
  if (params.size() != h * n + 2 * h + 1) throw InputError("mlp: parameter vector size mismatch");
  Index at = 0;
  for (Index r = 0; r < h; ++r) {
    model.hidden_weights.row(r) = params.segment(at, n).transpose();
    at += n;
  }
  model.hidden_bias = params.segment(at, h);
  at += h;
  model.output_weights = params.segment(at, h);
  at += h;
  model.output_bias = params[at];
}

double unit_target(const MlpModel& model, double sdg) {
  return (sdg - model.odg_low) / (model.odg_high - model.odg_low);
}

double loss(const MlpModel& model, const Eigen::Ref<const MatrixXd>& normalized,
            const Eigen::Ref<const VectorXd>& unit_targets) {
  return (network_output(model, normalized) - unit_targets).squaredNorm() /
         static_cast<double>(unit_targets.size());
}

VectorXd loss_gradient(const MlpModel& model, const Eigen::Ref<const MatrixXd>& normalized,
                       const Eigen::Ref<const VectorXd>& unit_targets) {
  const Index rows = normalized.rows();
  const MatrixXd pre = (normalized * model.hidden_weights.transpose()).rowwise() +
                       model.hidden_bias.transpose();
  const Eigen::ArrayXXd hidden = sigmoid(pre.array());
  const Eigen::ArrayXd out =
      sigmoid((hidden.matrix() * model.output_weights).array() + model.output_bias);

  // Output delta per row, then back through the hidden sigmoid.
  const Eigen::ArrayXd delta_out =
      2.0 / static_cast<double>(rows) * (out - unit_targets.array()) * out * (1.0 - out);
  const Eigen::ArrayXXd delta_hidden =
      (delta_out.matrix() * model.output_weights.transpose()).array() * hidden * (1.0 - hidden);

  MlpModel grad = model;
  grad.hidden_weights = delta_hidden.matrix().transpose() * normalized;
  grad.hidden_bias = delta_hidden.colwise().sum().transpose().matrix();
  grad.output_weights = hidden.matrix().transpose() * delta_out.matrix();
  grad.output_bias = delta_out.sum();
  return pack(grad);
}

TrainResult train_rprop(const TrainingSet& data, const RpropOptions& options) {
  data.validate();
  if (data.metrics.rows() < 2) throw InputError("train: need at least two rows");
  {
    std::set<std::vector<double>> distinct;
    for (Index r = 0; r < data.metrics.rows(); ++r) {
      std::vector<double> row(data.metrics.cols() + 1);
      for (Index c = 0; c < data.metrics.cols(); ++c) row[c] = data.metrics(r, c);
      row.back() = data.targets[r];
      distinct.insert(std::move(row));
    }
    if (distinct.size() < 2) throw InputError("train: need at least two distinct rows");
  }
  if (options.hidden < 1 || options.epochs < 0) throw InputError("train: invalid topology or epochs");

  TrainResult result;
  result.model = MlpModel::zeros(data.metrics.cols(), options.hidden);
  result.model.input_names = data.names;
  if (!result.model.input_names.empty() &&
      static_cast<Index>(result.model.input_names.size()) != data.metrics.cols()) {
    result.model.input_names.clear();
  }
  fit_normalization(result.model, data.metrics);
  for (Index c = 0; c < data.metrics.cols(); ++c) {
    if (data.metrics.col(c).maxCoeff() == data.metrics.col(c).minCoeff()) {
      const std::string name = c < static_cast<Index>(data.names.size())
                                   ? data.names[static_cast<std::size_t>(c)]
                                   : std::to_string(c + 1);
      result.warnings.push_back("input column '" + name + "' is constant; mapped to 0.5");
    }
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> init(-options.init_range, options.init_range);
  VectorXd params = pack(result.model);
  for (Index i = 0; i < params.size(); ++i) params[i] = init(rng);

  MlpModel& model = result.model;
  const MatrixXd x = normalize(model, data.metrics);
  VectorXd t(data.targets.size());
  for (Index r = 0; r < t.size(); ++r) t[r] = unit_target(model, data.targets[r]);

  VectorXd step = VectorXd::Constant(params.size(), options.delta_initial);
  VectorXd previous = VectorXd::Zero(params.size());
  VectorXd best = params;
  double best_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch <= options.epochs; ++epoch) {
    unpack(model, params);
    const double current = loss(model, x, t);
    result.mse_trace.push_back(current);
    if (current < best_loss) {
      best_loss = current;
      best = params;
    }
    if (epoch == options.epochs) break;
    VectorXd grad = loss_gradient(model, x, t);
    for (Index i = 0; i < params.size(); ++i) {
      const double direction = grad[i] * previous[i];
      if (direction > 0.0) {
        step[i] = std::min(step[i] * options.eta_plus, options.delta_max);
      } else if (direction < 0.0) {
        step[i] = std::max(step[i] * options.eta_minus, options.delta_min);
        grad[i] = 0.0;
      }
      if (grad[i] > 0.0) {
        params[i] -= step[i];
      } else if (grad[i] < 0.0) {
        params[i] += step[i];
      }
    }
    previous = grad;
  }
  unpack(model, best);
  result.final_mse = best_loss;
  return result;
}

Evaluation evaluate_model(const MlpModel& model, const TrainingSet& test) {
  if (test.metrics.rows() == 0) throw InputError("evaluate: empty test set");
  const VectorXd predicted = forward_batch(model, test.metrics);
  return {report::pearson(predicted, test.targets), report::mse(predicted, test.targets)};
}

namespace {

nlohmann::json matrix_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> as_vector(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd vector_from(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

void to_json(nlohmann::json& j, const MlpModel& model) {
  j = {{"n_in", model.inputs()},
       {"n_hidden", model.hidden()},
       {"hidden_weights", matrix_json(model.hidden_weights)},
       {"hidden_bias", as_vector(model.hidden_bias)},
       {"output_weights", as_vector(model.output_weights)},
       {"output_bias", model.output_bias},
       {"input_min", as_vector(model.input_min)},
       {"input_max", as_vector(model.input_max)},
       {"odg_range", {model.odg_low, model.odg_high}}};
  if (!model.input_names.empty()) j["input_names"] = model.input_names;
}

void from_json(const nlohmann::json& j, MlpModel& model) {
  const auto n_in = j.at("n_in").get<Index>();
  const auto n_hidden = j.at("n_hidden").get<Index>();
  if (n_in < 1 || n_hidden < 1) throw InputError("mlp: empty topology");
  model = MlpModel::zeros(n_in, n_hidden);
  const auto& weights = j.at("hidden_weights");
  if (!weights.is_array() || static_cast<Index>(weights.size()) != n_hidden) {
    throw InputError("mlp: hidden_weights must have n_hidden rows");
  }
  for (Index r = 0; r < n_hidden; ++r) {
    const VectorXd row = vector_from(weights[static_cast<std::size_t>(r)]);
    if (row.size() != n_in) throw InputError("mlp: hidden_weights rows must have n_in entries");
    model.hidden_weights.row(r) = row.transpose();
  }
  model.hidden_bias = vector_from(j.at("hidden_bias"));
  model.output_weights = vector_from(j.at("output_weights"));
  model.output_bias = j.at("output_bias").get<double>();
  model.input_min = vector_from(j.at("input_min"));
  model.input_max = vector_from(j.at("input_max"));
  const auto range = j.value("odg_range", std::vector<double>{kOdgLow, kOdgHigh});
  if (range.size() != 2) throw InputError("mlp: odg_range must be [lo, hi]");
  model.odg_low = range[0];
  model.odg_high = range[1];
  model.input_names = j.value("input_names", std::vector<std::string>{});
  model.validate();
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open model");
  try {
    return nlohmann::json::parse(in).get<MlpModel>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  out << nlohmann::json(model).dump(2) << '\n';
}

TrainingSet load_training_set(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  if (table.header.size() < 2 || table.header.back() != "sdg") {
    throw InputError(path.string() + ": expected metric columns followed by an 'sdg' column");
  }
  const std::size_t width = table.header.size() - 1;
  TrainingSet set;
  set.names.assign(table.header.begin(), table.header.end() - 1);
  set.metrics.resize(static_cast<Index>(table.rows.size()), static_cast<Index>(width));
  set.targets.resize(static_cast<Index>(table.rows.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      set.metrics(static_cast<Index>(r), static_cast<Index>(c)) = table.number(r, c);
    }
    const double sdg = table.number(r, width);
    if (sdg < kOdgLow || sdg > kOdgHigh) {
      throw InputError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": SDG " +
                       table.text(r, width) + " outside [-4, 0]");
    }
    set.targets[static_cast<Index>(r)] = sdg;
  }
  if (set.metrics.rows() == 0) throw InputError(path.string() + ": no data rows");
  return set;
}

}  // namespace fqi::ann
