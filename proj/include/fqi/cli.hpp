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

// Subcommand implementations behind the `fqi` executable. Each command
// writes its human/JSON output to `out`, diagnostics to `err`, and returns
// an exit code; input problems throw InputError, stage failures
// ComputationError.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "fqi/ann.hpp"
#include "fqi/fuzzy.hpp"
#include "fqi/index.hpp"
#include "fqi/report.hpp"

namespace fqi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitComputationError = 3;

struct RunConfig {
  double listening_level = 92.0;
  double beta = index::kDefaultBeta;
  double gamma = index::kDefaultGamma;
  int window_half_width = index::kDefaultHalfWidth;
  double lambda = 1.5;
  double merge_threshold = 0.7;
  int defuzz_resolution = fuzzy::kDefaultResolution;
  std::optional<std::filesystem::path> fuzzy_system_path;
  std::optional<std::filesystem::path> mlp_model_path;
  index::LevelAdaptBranch level_adapt_branch = index::LevelAdaptBranch::mirrored;

  void validate() const;
  index::FqiParams fqi_params() const;
  // The configured fuzzy system, or the shipped default, with the configured resolution.
  fuzzy::FuzzySystem fuzzy_system() const;
};

// Keys mirror the field names; `fuzzy_system` and `mlp_model` hold paths,
// resolved relative to the config file.
RunConfig load_config(const std::filesystem::path& path);
void apply_config_json(RunConfig& config, const nlohmann::json& j,
                       const std::filesystem::path& base_dir = {});

struct AnalysisResult {
  double fqi = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  std::optional<double> odg;
  Eigen::Index frames = 0;
  int sample_rate = 0;
};

nlohmann::json to_json(const AnalysisResult& result);

// MOV sidecar: a header row of metric names and a single row of values.
Eigen::VectorXd load_movs(const std::filesystem::path& path);

struct AnalyzeOptions {
  std::filesystem::path reference;
  std::filesystem::path test;
  std::optional<std::filesystem::path> movs;
  std::optional<std::filesystem::path> omega_csv;
  std::optional<std::filesystem::path> pattern_dir;
};

AnalysisResult analyze_pair(const AnalyzeOptions& options, const RunConfig& config,
                            const fuzzy::FuzzySystem& system,
                            const std::optional<ann::MlpModel>& model);

int cmd_analyze(const AnalyzeOptions& options, const RunConfig& config, std::ostream& out,
                std::ostream& err);

struct CalibrateOptions {
  std::filesystem::path points_csv;
  std::filesystem::path output;
  std::optional<std::filesystem::path> clusters_csv;
  int clusters = 6;
  double epsilon = 1e-5;
  int max_iterations = 300;
  std::uint64_t seed = 0;
};

int cmd_calibrate(const CalibrateOptions& options, const RunConfig& config, std::ostream& out,
                  std::ostream& err);

struct TrainOptions {
  std::filesystem::path training_csv;
  std::filesystem::path output;
  std::optional<int> inputs;  // expected metric width
  int hidden = 12;
  int epochs = 2000;
  std::uint64_t seed = 0;
  bool verbose = false;
  std::optional<std::filesystem::path> trace_csv;
};

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);

struct ReportOptions {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> sdg;
  std::optional<std::filesystem::path> output;
  report::GroupBy group_by = report::GroupBy::codec;
  unsigned threads = 0;  // 0: hardware concurrency
};

int cmd_report(const ReportOptions& options, const RunConfig& config, std::ostream& out,
               std::ostream& err);

}  // namespace fqi::cli
