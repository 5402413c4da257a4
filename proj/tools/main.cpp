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

// fqi: full-reference audio quality analysis with the Fuzzy Quality Index.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fqi/cli.hpp"
#include "fqi/error.hpp"

namespace {

using fqi::cli::RunConfig;

// Tunables shared by all subcommands. Values given on the command line win
// over the config file, which wins over the built-in defaults.
struct ConfigFlags {
  std::string config_path;
  std::optional<double> listening_level, beta, gamma, lambda, merge_threshold;
  std::optional<int> window_half_width, defuzz_resolution;
  std::optional<std::string> fuzzy_system, mlp_model, level_adapt_branch;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--listening-level", listening_level, "Listening level Lp in dB SPL (92)");
    app.add_option("--beta", beta, "Temporal smoothing coefficient (0.85)");
    app.add_option("--gamma", gamma, "Variance index scale (10)");
    app.add_option("--window-half-width", window_half_width, "Triangular window half-width U (3)");
    app.add_option("--lambda", lambda, "Cluster variance scale (1.5)");
    app.add_option("--merge-threshold", merge_threshold, "Crosspoint merge threshold (0.7)");
    app.add_option("--defuzz-resolution", defuzz_resolution, "Defuzzification samples (1001)");
    app.add_option("--fuzzy-system", fuzzy_system, "Fuzzy system JSON (shipped default)");
    app.add_option("--mlp-model", mlp_model, "MLP model JSON for ODG");
    app.add_option("--level-adapt", level_adapt_branch, "as_printed or mirrored (mirrored)")
        ->check(CLI::IsMember({"as_printed", "mirrored"}));
  }

  RunConfig resolve() const {
    RunConfig config = config_path.empty() ? RunConfig{} : fqi::cli::load_config(config_path);
    if (listening_level) config.listening_level = *listening_level;
    if (beta) config.beta = *beta;
    if (gamma) config.gamma = *gamma;
    if (lambda) config.lambda = *lambda;
    if (merge_threshold) config.merge_threshold = *merge_threshold;
    if (window_half_width) config.window_half_width = *window_half_width;
    if (defuzz_resolution) config.defuzz_resolution = *defuzz_resolution;
    if (fuzzy_system) config.fuzzy_system_path = *fuzzy_system;
    if (mlp_model) config.mlp_model_path = *mlp_model;
    if (level_adapt_branch) {
      config.level_adapt_branch = fqi::index::level_adapt_branch_from(*level_adapt_branch);
    }
    config.validate();
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceptual audio quality analysis with the Fuzzy Quality Index"};
  app.require_subcommand(1);
  ConfigFlags flags;

  fqi::cli::AnalyzeOptions analyze;
  std::string movs, omega_csv, pattern_dir;
  auto* analyze_cmd = app.add_subcommand("analyze", "Compare a test WAV against its reference");
  analyze_cmd->add_option("reference", analyze.reference, "Reference WAV")->required();
  analyze_cmd->add_option("test", analyze.test, "Test WAV")->required();
  analyze_cmd->add_option("--movs", movs, "CSV with the 11 model output variables");
  analyze_cmd->add_option("--omega-csv", omega_csv, "Write per-frame omega1/omega2 traces");
  analyze_cmd->add_option("--pattern-dir", pattern_dir, "Write pitch/excitation/mask patterns");
  flags.attach(*analyze_cmd);

  fqi::cli::CalibrateOptions calibrate;
  std::string clusters_csv;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Build a fuzzy system from (I1, I2) points");
  calibrate_cmd->add_option("points", calibrate.points_csv, "CSV with i1,i2 columns")->required();
  calibrate_cmd->add_option("-o,--output", calibrate.output, "Output fuzzy system JSON")->required();
  calibrate_cmd->add_option("--clusters-csv", clusters_csv, "Write the merged cluster table");
  calibrate_cmd->add_option("--clusters", calibrate.clusters, "FCM cluster count (6)");
  calibrate_cmd->add_option("--epsilon", calibrate.epsilon, "FCM stop threshold (1e-5)");
  calibrate_cmd->add_option("--max-iter", calibrate.max_iterations, "FCM iteration cap (300)");
  calibrate_cmd->add_option("--seed", calibrate.seed, "Initial partition seed (0)");
  flags.attach(*calibrate_cmd);

  fqi::cli::TrainOptions train;
  std::optional<int> inputs;
  std::string trace_csv;
  auto* train_cmd = app.add_subcommand("train", "Train the ODG network with RProp");
  train_cmd->add_option("training", train.training_csv, "CSV: metric columns, then sdg")->required();
  train_cmd->add_option("-o,--output", train.output, "Output model JSON")->required();
  train_cmd->add_option("--inputs", inputs, "Expected metric count (11 or 12)");
  train_cmd->add_option("--hidden", train.hidden, "Hidden neurons (12)");
  train_cmd->add_option("--epochs", train.epochs, "Training epochs (2000)");
  train_cmd->add_option("--seed", train.seed, "Weight initialization seed (0)");
  train_cmd->add_flag("-v,--verbose", train.verbose, "Print the per-epoch MSE trace to stderr");
  train_cmd->add_option("--trace-csv", trace_csv, "Write the per-epoch MSE trace");

  fqi::cli::ReportOptions report;
  std::string sdg, report_out, group_by = "codec";
  auto* report_cmd = app.add_subcommand("report", "Analyze a manifest of pairs and aggregate");
  report_cmd->add_option("manifest", report.manifest,
                         "CSV: id,codec,bitrate,reference,test[,movs]")->required();
  report_cmd->add_option("--sdg", sdg, "CSV: id,sdg");
  report_cmd->add_option("-o,--output", report_out, "Summary CSV (stdout if omitted)");
  report_cmd->add_option("--group-by", group_by, "codec or codec_bitrate")
      ->check(CLI::IsMember({"codec", "codec_bitrate"}));
  report_cmd->add_option("--threads", report.threads, "Worker threads (0 = all cores)");
  flags.attach(*report_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fqi::cli::kExitInputError;
  }

  try {
    if (*analyze_cmd) {
      if (!movs.empty()) analyze.movs = movs;
      if (!omega_csv.empty()) analyze.omega_csv = omega_csv;
      if (!pattern_dir.empty()) analyze.pattern_dir = pattern_dir;
      return fqi::cli::cmd_analyze(analyze, flags.resolve(), std::cout, std::cerr);
    }
    if (*calibrate_cmd) {
      if (!clusters_csv.empty()) calibrate.clusters_csv = clusters_csv;
      return fqi::cli::cmd_calibrate(calibrate, flags.resolve(), std::cout, std::cerr);
    }
    if (*train_cmd) {
      train.inputs = inputs;
      if (!trace_csv.empty()) train.trace_csv = trace_csv;
      return fqi::cli::cmd_train(train, std::cout, std::cerr);
    }
    if (*report_cmd) {
      if (!sdg.empty()) report.sdg = sdg;
      if (!report_out.empty()) report.output = report_out;
      report.group_by = group_by == "codec_bitrate" ? fqi::report::GroupBy::codec_bitrate
                                                    : fqi::report::GroupBy::codec;
      return fqi::cli::cmd_report(report, flags.resolve(), std::cout, std::cerr);
    }
  } catch (const fqi::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fqi::cli::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fqi::cli::kExitComputationError;
  }
  return fqi::cli::kExitOk;
}
