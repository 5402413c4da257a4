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

#include "fqi/report.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace fqi::report {

void BatchResult::validate() const {
  std::set<std::string> ids;
  for (const auto& row : rows) {
    if (!ids.insert(row.id).second) throw InputError("batch: duplicate pair id '" + row.id + "'");
    if (!(row.fqi >= 0.0 && row.fqi <= 1.0)) {
      throw ComputationError("batch: fqi of '" + row.id + "' outside [0, 1]");
    }
    if (row.odg && !(*row.odg >= -4.0 && *row.odg <= 0.0)) {
      throw ComputationError("batch: odg of '" + row.id + "' outside [-4, 0]");
    }
  }
}

std::vector<SummaryRow> aggregate(const BatchResult& batch, GroupBy group_by) {
  if (batch.rows.empty()) throw InputError("aggregate: empty batch");
  batch.validate();

  std::vector<std::string> order;
  std::map<std::string, std::vector<const BatchRow*>> groups;
  for (const auto& row : batch.rows) {
    std::string key = row.codec;
    if (group_by == GroupBy::codec_bitrate) key += "@" + row.bitrate;
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&row);
  }

  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& members = groups[key];
    SummaryRow summary;
    summary.group = key;
    summary.n = members.size();
    double fqi_sum = 0.0;
    double odg_sum = 0.0;
    std::size_t odg_count = 0;
    std::vector<double> fqi_scored, odg_scored, sdg;
    bool all_scored_have_odg = true;
    for (const auto* row : members) {
      fqi_sum += row->fqi;
      if (row->odg) {
        odg_sum += *row->odg;
        ++odg_count;
      }
      if (row->sdg) {
        sdg.push_back(*row->sdg);
        fqi_scored.push_back(row->fqi);
        if (row->odg) {
          odg_scored.push_back(*row->odg);
        } else {
          all_scored_have_odg = false;
        }
      }
    }
    summary.mean_fqi = fqi_sum / static_cast<double>(members.size());
    if (odg_count > 0) summary.mean_odg = odg_sum / static_cast<double>(odg_count);

    if (!sdg.empty()) {
      const Eigen::Map<const Eigen::VectorXd> target(sdg.data(), static_cast<Eigen::Index>(sdg.size()));
      const bool use_odg = all_scored_have_odg;
      const auto& predictor = use_odg ? odg_scored : fqi_scored;
      const Eigen::Map<const Eigen::VectorXd> pred(predictor.data(), target.size());
      try {
        summary.pearson = pearson(pred, target);
      } catch (const std::exception&) {
        // Fewer than two scored rows or a constant series: no correlation.
      }
      if (use_odg) summary.mse = mse(pred, target);
    }
    out.push_back(std::move(summary));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  out << "group,n,mean_fqi,mean_odg,pearson,mse\n";
  out.precision(10);
  for (const auto& row : rows) {
    out << row.group << ',' << row.n << ',' << row.mean_fqi << ',';
    opt(row.mean_odg);
    out << ',';
    opt(row.pearson);
    out << ',';
    opt(row.mse);
    out << '\n';
  }
}

}  // namespace fqi::report
