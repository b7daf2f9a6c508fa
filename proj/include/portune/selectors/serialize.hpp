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
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "portune/core/error.hpp"
#include "portune/selectors/job.hpp"

namespace portune {

inline nlohmann::ordered_json environment_to_json(const Environment& env) {
  nlohmann::ordered_json j;
  j["device"] = env.device;
  j["input"] = env.input.key();
  return j;
}

inline Environment environment_from_json(const nlohmann::json& j) {
  return Environment{j.at("device").get<std::string>(), KernelInput::parse(j.at("input").get<std::string>())};
}

// The matrix is not embedded; scope rows are written as environments so a job
// can be re-bound to any matrix that contains them.
template <SlowdownTable Table>
nlohmann::ordered_json job_to_json(const SelectionJob& job, const Table& table) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(job.method));
  j["objective"] = std::string(to_string(job.objective.kind));
  if (job.objective.fleet) j["fleet"] = to_json(*job.objective.fleet);
  j["kappa"] = job.kappa;
  j["budget_ms"] = job.budget_ms;
  j["seed"] = job.seed;
  j["enumeration_cap"] = job.enumeration_cap;
  j["max_restarts"] = job.stochastic.max_restarts;
  j["patience"] = job.stochastic.patience;
  auto& scope = j["scope"] = nlohmann::ordered_json::array();
  for (std::size_t e : job.scope) scope.push_back(environment_to_json(table.environments()[e]));
  return j;
}

template <SlowdownTable Table>
SelectionJob job_from_json(const nlohmann::json& j, const Table& table) {
  try {
    SelectionJob job;
    job.method = method_from_string(j.at("method").get<std::string>());
    if (j.at("objective").get<std::string>() == "fleet") {
      job.objective = Objective::fleet_rate(fleet_from_json(j.at("fleet")));
    }
    job.kappa = j.at("kappa").get<std::size_t>();
    job.budget_ms = j.value("budget_ms", job.budget_ms);
    job.seed = j.value("seed", job.seed);
    job.enumeration_cap = j.value("enumeration_cap", job.enumeration_cap);
    job.stochastic.max_restarts = j.value("max_restarts", job.stochastic.max_restarts);
    job.stochastic.patience = j.value("patience", job.stochastic.patience);
    std::vector<Environment> envs;
    for (const auto& e : j.at("scope")) envs.push_back(environment_from_json(e));
    job.scope = scope_of(table, envs);
    return job;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed selection job: ") + e.what());
  }
}

// With `timestamps` off the document is a pure function of the job, so repeated
// runs produce byte-identical output.
inline nlohmann::ordered_json result_to_json(const SelectionResult& r, bool timestamps = true) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(r.method));
  j["objective"] = std::string(to_string(r.objective));
  j["kappa"] = r.kappa;
  j["seed"] = r.seed;
  j["cost"] = r.cost;
  j["evaluations"] = r.evaluations;
  if (r.groups) j["groups"] = *r.groups;
  j["chosen"] = r.chosen.indices();
  auto& configs = j["chosen_params"] = nlohmann::ordered_json::array();
  for (const ParamConfig& c : r.chosen_configs) configs.push_back(c.values());
  auto& winners = j["winners"] = nlohmann::ordered_json::array();
  for (const auto& [env, v] : r.winners) {
    auto w = environment_to_json(env);
    w["variant"] = v;
    winners.push_back(std::move(w));
  }
  if (timestamps) j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

inline SelectionResult result_from_json(const nlohmann::json& j) {
  try {
    SelectionResult r;
    r.method = method_from_string(j.at("method").get<std::string>());
    r.objective = j.at("objective").get<std::string>() == "fleet" ? ObjectiveKind::kFleetRate
                                                                 : ObjectiveKind::kLibraryGeomean;
    r.kappa = j.at("kappa").get<std::size_t>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.cost = j.at("cost").get<double>();
    r.evaluations = j.value("evaluations", std::size_t{0});
    if (j.contains("groups")) r.groups = j["groups"].get<std::size_t>();
    r.chosen = CandidateSet(j.at("chosen").get<std::vector<std::size_t>>());
    for (const auto& c : j.at("chosen_params")) r.chosen_configs.emplace_back(c.get<std::vector<std::uint32_t>>());
    if (r.chosen_configs.size() != r.chosen.size()) throw Error("chosen and chosen_params differ in length");
    for (const auto& w : j.at("winners")) r.winners.emplace(environment_from_json(w), w.at("variant").get<std::size_t>());
    r.elapsed_ms = j.value("elapsed_ms", 0.0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed selection result: ") + e.what());
  }
}

// Convergence log for plotting: best cost against time.
inline void write_iteration_log(std::ostream& out, const SelectionResult& r, bool timestamps = true) {
  out << "iteration,timestamp_ms,evaluations,best_cost\n";
  char buf[64];
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.3f", timestamps ? r.log[i].elapsed_ms : 0.0);
    out << i << ',' << buf << ',' << r.log[i].evaluations << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.log[i].best_cost);
    out << buf << '\n';
  }
}

}  // namespace portune
