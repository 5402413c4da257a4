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

#include "fqi/fuzzy.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <span>

#include "fqi/error.hpp"

namespace fqi::fuzzy {

namespace {

constexpr std::array<std::string_view, kInputTerms> kInputNames = {"LL", "LH", "M", "HL", "HH"};
constexpr std::array<std::string_view, kOutputTerms> kOutputNames = {"P", "M", "G", "H"};

InputTerms terms_from(const std::array<std::pair<double, double>, kInputTerms>& mean_variance) {
  InputTerms terms;
  for (std::size_t i = 0; i < kInputTerms; ++i) {
    terms[i] = {mean_variance[i].first, std::sqrt(mean_variance[i].second),
                std::string(kInputNames[i])};
  }
  return terms;
}

void validate_terms(std::span<const GaussianMF> terms, const char* which) {
  std::set<std::string> labels;
  for (const auto& mf : terms) {
    if (!(mf.sigma > 0.0) || !std::isfinite(mf.sigma) || !std::isfinite(mf.mean)) {
      throw InputError(std::string(which) + ": membership function '" + mf.label +
                       "' needs a finite mean and a positive sigma");
    }
    if (!labels.insert(mf.label).second) {
      throw InputError(std::string(which) + ": duplicate label '" + mf.label + "'");
    }
  }
}

}  // namespace

std::string_view to_string(InputLabel label) { return kInputNames[static_cast<std::size_t>(label)]; }
std::string_view to_string(OutputLabel label) { return kOutputNames[static_cast<std::size_t>(label)]; }

InputLabel input_label_from(std::string_view text) {
  for (std::size_t i = 0; i < kInputTerms; ++i) {
    if (kInputNames[i] == text) return static_cast<InputLabel>(i);
  }
  throw InputError("unknown input label '" + std::string(text) + "'");
}

OutputLabel output_label_from(std::string_view text) {
  for (std::size_t i = 0; i < kOutputTerms; ++i) {
    if (kOutputNames[i] == text) return static_cast<OutputLabel>(i);
  }
  throw InputError("unknown output label '" + std::string(text) + "'");
}

RuleBase RuleBase::standard() {
  using enum OutputLabel;
  RuleBase rules;
  rules.grid = {{
      {M, P, P, P, P},  // I1 = LL
      {M, M, P, P, P},  // I1 = LH
      {G, G, M, P, P},  // I1 = M
      {H, H, G, M, P},  // I1 = HL
      {H, H, H, M, P},  // I1 = HH
  }};
  return rules;
}

OutputTerms default_output_terms() {
  OutputTerms terms;
  for (std::size_t i = 0; i < kOutputTerms; ++i) {
    terms[i] = {0.125 + 0.25 * static_cast<double>(i), 0.15, std::string(kOutputNames[i])};
  }
  return terms;
}

FuzzySystem FuzzySystem::shipped_default() {
  // Cluster centroids and variances, ordered by ascending centroid.
  FuzzySystem system;
  system.input1 = terms_from({{{0.3738, 0.0741},
                               {0.5066, 0.0651},
                               {0.6862, 0.0826},
                               {0.8110, 0.0625},
                               {0.8799, 0.0405}}});
  system.input2 = terms_from({{{0.1697, 0.0543},
                               {0.2986, 0.0703},
                               {0.5313, 0.1040},
                               {0.6618, 0.0527},
                               {0.8343, 0.0903}}});
  system.output = default_output_terms();
  system.rules = RuleBase::standard();
  system.resolution = kDefaultResolution;
  return system;
}

void FuzzySystem::validate() const {
  validate_terms(input1, "input1");
  validate_terms(input2, "input2");
  validate_terms(output, "output");
  if (resolution < kMinResolution) {
    throw InputError("defuzzification resolution must be at least " +
                     std::to_string(kMinResolution));
  }
}

Degrees fuzzify(double x, const InputTerms& terms) {
  Degrees degrees;
  for (std::size_t i = 0; i < kInputTerms; ++i) degrees[static_cast<Eigen::Index>(i)] = terms[i](x);
  return degrees;
}

Activations rule_activations(const Degrees& deg1, const Degrees& deg2) {
  return deg1.replicate(1, kInputTerms).min(deg2.transpose().replicate(kInputTerms, 1));
}

Eigen::Array<double, kOutputTerms, 1> output_strengths(const Activations& activations,
                                                       const RuleBase& rules) {
  Eigen::Array<double, kOutputTerms, 1> strength = Eigen::Array<double, kOutputTerms, 1>::Zero();
  for (std::size_t a = 0; a < kInputTerms; ++a) {
    for (std::size_t b = 0; b < kInputTerms; ++b) {
      auto& s = strength[static_cast<Eigen::Index>(rules.grid[a][b])];
      s = std::max(s, activations(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    }
  }
  return strength;
}

Eigen::ArrayXd infer(const Degrees& deg1, const Degrees& deg2, const RuleBase& rules,
                     const OutputTerms& output, int resolution) {
  const auto strength = output_strengths(rule_activations(deg1, deg2), rules);
  const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(resolution, 0.0, 1.0);
  Eigen::ArrayXd aggregate = Eigen::ArrayXd::Zero(resolution);
  // Rules sharing a consequent collapse to their max activation before clipping.
  for (std::size_t o = 0; o < kOutputTerms; ++o) {
    const Eigen::ArrayXd clipped =
        membership(output[o], grid).min(strength[static_cast<Eigen::Index>(o)]);
    aggregate = aggregate.max(clipped);
  }
  return aggregate;
}

double defuzzify_centroid(const Eigen::Ref<const Eigen::ArrayXd>& curve) {
  const double mass = curve.sum();
  if (!(mass > 0.0)) throw ComputationError("cannot defuzzify an empty fuzzy set");
  const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(curve.size(), 0.0, 1.0);
  return (grid * curve).sum() / mass;
}

double evaluate(const FuzzySystem& system, double i1, double i2) {
  if (!std::isfinite(i1) || !std::isfinite(i2)) throw InputError("fuzzy inputs must be finite");
  const auto curve = infer(fuzzify(i1, system.input1), fuzzify(i2, system.input2), system.rules,
                           system.output, system.resolution);
  return defuzzify_centroid(curve);
}

void to_json(nlohmann::json& j, const GaussianMF& mf) {
  j = {{"label", mf.label}, {"mean", mf.mean}, {"sigma", mf.sigma}};
}

void from_json(const nlohmann::json& j, GaussianMF& mf) {
  j.at("label").get_to(mf.label);
  j.at("mean").get_to(mf.mean);
  j.at("sigma").get_to(mf.sigma);
}

void to_json(nlohmann::json& j, const FuzzySystem& system) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& row : system.rules.grid) {
    nlohmann::json cells = nlohmann::json::array();
    for (auto label : row) cells.push_back(std::string(to_string(label)));
    rules.push_back(cells);
  }
  j = {{"input1", system.input1},
       {"input2", system.input2},
       {"output", system.output},
       {"rules", rules},
       {"resolution", system.resolution}};
}

void from_json(const nlohmann::json& j, FuzzySystem& system) {
  auto read_terms = [&](const char* key, auto& terms) {
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != terms.size()) {
      throw InputError(std::string("fuzzy system: '") + key + "' must hold " +
                       std::to_string(terms.size()) + " membership functions");
    }
    for (std::size_t i = 0; i < terms.size(); ++i) arr[i].get_to(terms[i]);
  };
  read_terms("input1", system.input1);
  read_terms("input2", system.input2);
  read_terms("output", system.output);
  // Rows and columns are indexed by ascending-mean position, matching the label order.
  const auto& rules = j.at("rules");
  if (!rules.is_array() || rules.size() != kInputTerms) {
    throw InputError("fuzzy system: 'rules' must be a 5x5 grid");
  }
  for (std::size_t a = 0; a < kInputTerms; ++a) {
    if (!rules[a].is_array() || rules[a].size() != kInputTerms) {
      throw InputError("fuzzy system: 'rules' must be a 5x5 grid");
    }
    for (std::size_t b = 0; b < kInputTerms; ++b) {
      system.rules.grid[a][b] = output_label_from(rules[a][b].get<std::string>());
    }
  }
  system.resolution = j.value("resolution", kDefaultResolution);
}

FuzzySystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open fuzzy system");
  try {
    FuzzySystem system = nlohmann::json::parse(in).get<FuzzySystem>();
    system.validate();
    return system;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void save_system(const std::filesystem::path& path, const FuzzySystem& system) {
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  out << nlohmann::json(system).dump(2) << '\n';
}

}  // namespace fqi::fuzzy
