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

#include "fqi/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "fqi/audio_io.hpp"
#include "fqi/csv.hpp"
#include "fqi/ear_model.hpp"
#include "fqi/error.hpp"
#include "fqi/fcm.hpp"

namespace fqi::cli {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("config: " + what);
  };
  require(listening_level > 0.0 && listening_level < 200.0, "listening_level must be in (0, 200)");
  require(beta > 0.0 && beta <= 1.0, "beta must be in (0, 1]");
  require(gamma > 0.0, "gamma must be positive");
  require(window_half_width >= 0 && window_half_width < 109, "window_half_width must be in [0, 108]");
  require(lambda > 0.0, "lambda must be positive");
  require(merge_threshold > 0.0 && merge_threshold < 1.0, "merge_threshold must be in (0, 1)");
  require(defuzz_resolution >= fuzzy::kMinResolution, "defuzz_resolution must be at least 101");
}

index::FqiParams RunConfig::fqi_params() const {
  return {window_half_width, beta, gamma, level_adapt_branch};
}

fuzzy::FuzzySystem RunConfig::fuzzy_system() const {
  fuzzy::FuzzySystem system = fuzzy_system_path ? fuzzy::load_system(*fuzzy_system_path)
                                                 : fuzzy::FuzzySystem::shipped_default();
  system.resolution = defuzz_resolution;
  system.validate();
  return system;
}

void apply_config_json(RunConfig& config, const nlohmann::json& j, const fs::path& base_dir) {
  static const std::vector<std::string> known = {
      "listening_level", "beta",          "gamma",     "window_half_width",
      "lambda",          "merge_threshold", "defuzz_resolution", "fuzzy_system",
      "mlp_model",       "level_adapt_branch"};
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InputError("config: unknown key '" + key + "'");
    }
  }
  try {
    config.listening_level = j.value("listening_level", config.listening_level);
    config.beta = j.value("beta", config.beta);
    config.gamma = j.value("gamma", config.gamma);
    config.window_half_width = j.value("window_half_width", config.window_half_width);
    config.lambda = j.value("lambda", config.lambda);
    config.merge_threshold = j.value("merge_threshold", config.merge_threshold);
    config.defuzz_resolution = j.value("defuzz_resolution", config.defuzz_resolution);
    if (j.contains("fuzzy_system")) config.fuzzy_system_path = base_dir / j["fuzzy_system"].get<std::string>();
    if (j.contains("mlp_model")) config.mlp_model_path = base_dir / j["mlp_model"].get<std::string>();
    if (j.contains("level_adapt_branch")) {
      config.level_adapt_branch =
          index::level_adapt_branch_from(j["level_adapt_branch"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open config");
  RunConfig config;
  try {
    apply_config_json(config, nlohmann::json::parse(in), path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return config;
}

nlohmann::json to_json(const AnalysisResult& result) {
  nlohmann::json j = {{"fqi", result.fqi},
                      {"i1", result.i1},
                      {"i2", result.i2},
                      {"frames", result.frames},
                      {"sample_rate", result.sample_rate}};
  if (result.odg) j["odg"] = *result.odg;
  return j;
}

Eigen::VectorXd load_movs(const fs::path& path) {
  const auto table = csv::read(path);
  if (table.rows.size() != 1) {
    throw InputError(path.string() + ": expected exactly one row of MOV values");
  }
  Eigen::VectorXd movs(static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    movs[static_cast<Eigen::Index>(c)] = table.number(0, c);
  }
  return movs;
}

namespace {

audio::AudioSignal load_mono(const fs::path& path) {
  return audio::downmix_mono(audio::load_wav(path));
}

void write_file(const fs::path& path, const auto& writer) {
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  writer(out);
}

std::optional<ann::MlpModel> configured_model(const RunConfig& config) {
  if (!config.mlp_model_path) return std::nullopt;
  return ann::load_model(*config.mlp_model_path);
}

}  // namespace

AnalysisResult analyze_pair(const AnalyzeOptions& options, const RunConfig& config,
                            const fuzzy::FuzzySystem& system,
                            const std::optional<ann::MlpModel>& model) {
  const auto pair = audio::align_pair(load_mono(options.reference), load_mono(options.test));
  const auto cal = ear::calibrate(config.listening_level, pair.reference.sample_rate);
  const auto patterns = ear::run_ear_model(pair, cal);
  const auto fqi = index::compute_fqi(patterns.reference.pitch.values, patterns.test.pitch.values,
                                      system, config.fqi_params());

  AnalysisResult result;
  result.fqi = fqi.fqi;
  result.i1 = fqi.inputs.i1;
  result.i2 = fqi.inputs.i2;
  result.frames = pair.frame_count;
  result.sample_rate = pair.reference.sample_rate;

  if (model && options.movs) {
    const Eigen::VectorXd movs = load_movs(*options.movs);
    if (movs.size() + 1 != model->inputs()) {
      throw InputError(options.movs->string() + ": model expects " +
                       std::to_string(model->inputs() - 1) + " MOVs plus FQI, got " +
                       std::to_string(movs.size()));
    }
    Eigen::VectorXd metrics(movs.size() + 1);
    metrics << movs, result.fqi;
    result.odg = ann::forward(*model, metrics);
  }

  if (options.omega_csv) {
    write_file(*options.omega_csv, [&](std::ostream& o) { index::write_omega_csv(o, fqi.inputs); });
  }
  if (options.pattern_dir) {
    fs::create_directories(*options.pattern_dir);
    const auto layout = ear::build_band_layout(pair.reference.sample_rate);
    auto dump = [&](const char* role, const ear::EarPatterns& p) {
      for (const auto* pattern : {&p.pitch, &p.excitation, &p.mask}) {
        const auto name = std::string(role) + "_" + ear::to_string(pattern->stage) + ".csv";
        write_file(*options.pattern_dir / name,
                   [&](std::ostream& o) { ear::write_pattern_csv(o, *pattern, layout); });
      }
    };
    dump("reference", patterns.reference);
    dump("test", patterns.test);
  }
  return result;
}

int cmd_analyze(const AnalyzeOptions& options, const RunConfig& config, std::ostream& out,
                std::ostream& err) {
  config.validate();
  const auto system = config.fuzzy_system();
  const auto model = configured_model(config);
  if (options.movs && !model) err << "note: MOV file given without an MLP model; ODG skipped\n";
  const auto result = analyze_pair(options, config, system, model);
  out << to_json(result).dump(2) << '\n';
  return kExitOk;
}

int cmd_calibrate(const CalibrateOptions& options, const RunConfig& config, std::ostream& out,
                  std::ostream& err) {
  config.validate();
  const auto table = csv::read(options.points_csv);
  const std::size_t c1 = table.column("i1");
  const std::size_t c2 = table.column("i2");
  if (table.rows.size() < static_cast<std::size_t>(std::max(options.clusters, 6))) {
    throw InputError(options.points_csv.string() + ": need at least " +
                     std::to_string(std::max(options.clusters, 6)) + " points, got " +
                     std::to_string(table.rows.size()));
  }
  Eigen::MatrixXd points(static_cast<Eigen::Index>(table.rows.size()), 2);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    points(static_cast<Eigen::Index>(r), 0) = table.number(r, c1);
    points(static_cast<Eigen::Index>(r), 1) = table.number(r, c2);
  }
  if ((points.array() < 0.0).any() || (points.array() > 1.0).any()) {
    throw InputError(options.points_csv.string() + ": I1 and I2 must lie in [0, 1]");
  }

  fcm::FcmOptions fcm_options;
  fcm_options.clusters = options.clusters;
  fcm_options.epsilon = options.epsilon;
  fcm_options.max_iterations = options.max_iterations;
  fcm_options.seed = options.seed;
  const auto model = fcm::fit(points, fcm_options);
  if (!model.converged) {
    err << "warning: FCM stopped after " << model.iterations << " iterations without converging\n";
  }
  const auto projected = fcm::project_variances(model, points, config.lambda);
  const auto merged1 = fcm::merge_mfs(fcm::axis_functions(projected, 0), config.merge_threshold);
  const auto merged2 = fcm::merge_mfs(fcm::axis_functions(projected, 1), config.merge_threshold);

  std::vector<fcm::ProjectedMF> merged = merged1;
  merged.insert(merged.end(), merged2.begin(), merged2.end());
  fcm::write_clusters_csv(out, merged);
  if (options.clusters_csv) {
    write_file(*options.clusters_csv, [&](std::ostream& o) { fcm::write_clusters_csv(o, merged); });
  }

  const auto system = fcm::build_system(merged1, merged2, fuzzy::RuleBase::standard(),
                                        fuzzy::default_output_terms(), config.defuzz_resolution);
  fuzzy::save_system(options.output, system);
  return kExitOk;
}

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
  const auto data = ann::load_training_set(options.training_csv);
  if (options.inputs && *options.inputs != data.metrics.cols()) {
    throw InputError(options.training_csv.string() + ": topology expects " +
                     std::to_string(*options.inputs) + " inputs, CSV has " +
                     std::to_string(data.metrics.cols()) + " metric columns");
  }
  ann::RpropOptions rprop;
  rprop.hidden = options.hidden;
  rprop.epochs = options.epochs;
  rprop.seed = options.seed;
  const auto result = ann::train_rprop(data, rprop);
  for (const auto& warning : result.warnings) err << "warning: " << warning << '\n';

  if (options.verbose || options.trace_csv) {
    auto write_trace = [&](std::ostream& o) {
      o << "epoch,mse\n";
      o.precision(10);
      for (std::size_t e = 0; e < result.mse_trace.size(); ++e) {
        o << e << ',' << result.mse_trace[e] << '\n';
      }
    };
    if (options.trace_csv) {
      write_file(*options.trace_csv, write_trace);
    } else {
      write_trace(err);
    }
  }
  ann::save_model(options.output, result.model);
  const auto fit = ann::evaluate_model(result.model, data);
  out.precision(10);
  out << "final_mse " << result.final_mse << '\n';
  out << "train_mse_sdg " << fit.mse << '\n';
  return kExitOk;
}

int cmd_report(const ReportOptions& options, const RunConfig& config, std::ostream& out,
               std::ostream& err) {
  config.validate();
  const auto manifest = csv::read(options.manifest);
  if (manifest.rows.empty()) throw InputError(options.manifest.string() + ": empty manifest");
  const std::size_t c_id = manifest.column("id");
  const std::size_t c_codec = manifest.column("codec");
  const std::size_t c_bitrate = manifest.column("bitrate");
  const std::size_t c_ref = manifest.column("reference");
  const std::size_t c_test = manifest.column("test");
  const std::optional<std::size_t> c_movs =
      manifest.has_column("movs") ? std::optional(manifest.column("movs")) : std::nullopt;
  const fs::path base = options.manifest.parent_path();

  std::map<std::string, double> sdg;
  if (options.sdg) {
    const auto table = csv::read(*options.sdg);
    const std::size_t id = table.column("id");
    const std::size_t value = table.column("sdg");
    for (std::size_t r = 0; r < table.rows.size(); ++r) sdg[table.text(r, id)] = table.number(r, value);
  }

  const auto system = config.fuzzy_system();
  const auto model = configured_model(config);
  const std::size_t count = manifest.rows.size();
  std::vector<std::optional<AnalysisResult>> results(count);
  std::vector<std::string> errors(count);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < count; r = next++) {
      try {
        AnalyzeOptions pair;
        pair.reference = base / manifest.text(r, c_ref);
        pair.test = base / manifest.text(r, c_test);
        if (c_movs && !manifest.text(r, *c_movs).empty()) pair.movs = base / manifest.text(r, *c_movs);
        results[r] = analyze_pair(pair, config, system, model);
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  const unsigned threads = std::max(
      1u, std::min<unsigned>(options.threads ? options.threads : std::thread::hardware_concurrency(),
                             static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  report::BatchResult batch;
  for (std::size_t r = 0; r < count; ++r) {
    const std::string& id = manifest.text(r, c_id);
    if (!results[r]) {
      err << "pair '" << id << "' failed: " << errors[r] << '\n';
      continue;
    }
    report::BatchRow row;
    row.id = id;
    row.codec = manifest.text(r, c_codec);
    row.bitrate = manifest.text(r, c_bitrate);
    row.fqi = results[r]->fqi;
    row.odg = results[r]->odg;
    if (const auto it = sdg.find(id); it != sdg.end()) row.sdg = it->second;
    batch.rows.push_back(std::move(row));
  }
  if (batch.rows.empty()) {
    err << "all " << count << " pairs failed\n";
    return kExitComputationError;
  }
  const auto summary = report::aggregate(batch, options.group_by);
  if (options.output) {
    write_file(*options.output, [&](std::ostream& o) { report::write_summary_csv(o, summary); });
  } else {
    report::write_summary_csv(out, summary);
  }
  return kExitOk;
}

}  // namespace fqi::cli
