// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "portune/evaluation/experiments.hpp"
#include "portune/evaluation/report.hpp"
#include "portune/selectors/serialize.hpp"

namespace portune {

inline nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(r.method));
  j["kappa"] = r.kappa;
  j["runs"] = r.runs;
  j["geomean"] = r.geomean;
  j["median"] = r.median;
  if (r.mean_geomean) j["mean_geomean"] = *r.mean_geomean;
  if (r.ci95) j["ci95"] = {r.ci95->low, r.ci95->high};
  if (r.fleet_rate) j["fleet_rate"] = *r.fleet_rate;
  if (!r.run_geomeans.empty()) j["run_geomeans"] = r.run_geomeans;
  auto& chosen = j["chosen_params"] = nlohmann::ordered_json::array();
  for (const ParamConfig& c : r.chosen) chosen.push_back(c.values());
  auto& per_env = j["per_env"] = nlohmann::ordered_json::array();
  for (const auto& [env, s] : r.per_env) {
    auto e = environment_to_json(env);
    e["slowdown"] = s;
    if (auto it = r.per_env_ci95.find(env); it != r.per_env_ci95.end()) {
      e["ci95"] = {it->second.low, it->second.high};
    }
    per_env.push_back(std::move(e));
  }
  auto& cdf = j["cdf"] = nlohmann::ordered_json::array();
  for (const CdfPoint& p : r.cdf) cdf.push_back({p.threshold, p.fraction});
  return j;
}

namespace report_detail {
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace report_detail

// threshold,fraction
inline void write_cdf_csv(std::ostream& out, const EvaluationReport& r) {
  out << "threshold,fraction\n";
  for (const CdfPoint& p : r.cdf) out << report_detail::num(p.threshold) << ',' << report_detail::num(p.fraction) << '\n';
}

// One row per (kappa, method).
inline void write_sweep_csv(std::ostream& out, const std::vector<EvaluationReport>& reports) {
  using report_detail::num;
  out << "kappa,method,runs,geomean,mean_geomean,ci_low,ci_high,median\n";
  for (const EvaluationReport& r : reports) {
    const double mean = r.mean_geomean.value_or(r.geomean);
    const Interval ci = r.ci95.value_or(Interval{mean, mean});
    out << r.kappa << ',' << to_string(r.method) << ',' << r.runs << ',' << num(r.geomean) << ',' << num(mean) << ','
        << num(ci.low) << ',' << num(ci.high) << ',' << num(r.median) << '\n';
  }
}

inline void write_fleet_csv(std::ostream& out, const std::vector<FleetRow>& rows) {
  out << "label,median_rate_per_ms,tasks_per_hour,variants\n";
  for (const FleetRow& r : rows) {
    out << r.label << ',' << report_detail::num(r.median_rate) << ',' << report_detail::num(r.median_rate * 3.6e6)
        << ',' << r.variants.size() << '\n';
  }
}

inline nlohmann::ordered_json fleet_to_json(const std::vector<FleetRow>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const FleetRow& r : rows) {
    nlohmann::ordered_json row;
    row["label"] = r.label;
    row["median_rate_per_ms"] = r.median_rate;
    row["rates"] = r.rates;
    auto& vs = row["variants"] = nlohmann::ordered_json::array();
    for (const ParamConfig& c : r.variants) vs.push_back(c.values());
    j.push_back(std::move(row));
  }
  return j;
}

inline nlohmann::ordered_json holdout_to_json(const HoldoutOutcome& h) {
  nlohmann::ordered_json j;
  j["unseen"] = report_to_json(h.unseen);
  j["baseline"] = report_to_json(h.baseline);
  j["eval_device_reads"] = h.eval_device_reads;
  j["train_reads"] = h.train_reads;
  return j;
}

}  // namespace portune
