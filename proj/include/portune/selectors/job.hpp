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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/core/types.hpp"
#include "portune/objectives/objectives.hpp"

namespace portune {

enum class Method { kExhaustive, kStochastic, kKMeans, kDecisionTree };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::kExhaustive: return "exhaustive";
    case Method::kStochastic: return "stochastic";
    case Method::kKMeans: return "kmeans";
    case Method::kDecisionTree: return "tree";
  }
  return "unknown";
}

inline Method method_from_string(std::string_view s) {
  if (s == "exhaustive") return Method::kExhaustive;
  if (s == "stochastic") return Method::kStochastic;
  if (s == "kmeans") return Method::kKMeans;
  if (s == "tree" || s == "decision-tree") return Method::kDecisionTree;
  throw Error("unknown method '" + std::string(s) + "'");
}

struct StochasticOptions {
  // Random restarts after the greedy-seeded descent.
  std::size_t max_restarts = 64;
  // Stop after this many consecutive restarts that do not improve the best set.
  std::size_t patience = 16;
};

struct SelectionJob {
  Scope scope;
  Objective objective;
  std::size_t kappa = 1;
  double budget_ms = 30'000.0;
  std::uint64_t seed = 0;
  Method method = Method::kStochastic;
  std::uint64_t enumeration_cap = 10'000'000;
  StochasticOptions stochastic;
  std::size_t kmeans_max_iterations = 300;
};

struct IterationLogEntry {
  double elapsed_ms = 0.0;
  std::size_t evaluations = 0;
  double best_cost = 0.0;
};

struct SelectionResult {
  CandidateSet chosen;
  std::vector<ParamConfig> chosen_configs;  // parallel to chosen.indices()
  double cost = 0.0;
  ObjectiveKind objective = ObjectiveKind::kLibraryGeomean;
  std::map<Environment, std::size_t> winners;
  Method method = Method::kStochastic;
  std::size_t kappa = 0;
  std::uint64_t seed = 0;
  double elapsed_ms = 0.0;
  std::size_t evaluations = 0;
  // Tree leaves or non-empty clusters actually produced.
  std::optional<std::size_t> groups;
  std::vector<IterationLogEntry> log;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void check_job(const SelectionJob& job, std::size_t cols) {
  if (job.scope.empty()) throw PreconditionError("selection scope is empty");
  if (job.kappa == 0) throw PreconditionError("kappa must be >= 1");
  if (job.kappa > cols) {
    throw PreconditionError("kappa " + std::to_string(job.kappa) + " exceeds variant count " + std::to_string(cols));
  }
  if (!(job.budget_ms > 0.0)) throw PreconditionError("budget must be positive");
  if (job.objective.kind == ObjectiveKind::kFleetRate && !job.objective.fleet) {
    throw PreconditionError("fleet objective requires a fleet spec");
  }
}

// Columns with at least one valid cell in scope, or every column when fewer than
// kappa such columns exist.
template <SlowdownTable Table>
std::vector<std::size_t> candidate_pool(const Table& table, const Scope& scope, std::size_t kappa) {
  std::vector<std::uint8_t> measured(table.cols(), 0);
  for (std::size_t e : scope) {
    const auto valid = table.valid_row(e);
    for (std::size_t v = 0; v < valid.size(); ++v) measured[v] |= valid[v];
  }
  std::vector<std::size_t> pool;
  for (std::size_t v = 0; v < measured.size(); ++v) {
    if (measured[v]) pool.push_back(v);
  }
  if (pool.size() < kappa) {
    pool.resize(table.cols());
    for (std::size_t v = 0; v < pool.size(); ++v) pool[v] = v;
  }
  return pool;
}

// Fills cost (recomputed through the public objective), winners and configs.
template <SlowdownTable Table>
SelectionResult finalize_result(const Table& table, const SelectionJob& job, CandidateSet chosen, Method method,
                                const Stopwatch& clock, std::size_t evaluations) {
  SelectionResult r;
  r.cost = cost(job.objective, table, chosen, job.scope);
  const auto members = best_members(table, chosen, job.scope);
  for (std::size_t i = 0; i < job.scope.size(); ++i) {
    r.winners.emplace(table.environments()[job.scope[i]], members[i]);
  }
  for (std::size_t v : chosen) r.chosen_configs.push_back(table.variants()[v]);
  r.chosen = std::move(chosen);
  r.objective = job.objective.kind;
  r.method = method;
  r.kappa = job.kappa;
  r.seed = job.seed;
  r.evaluations = evaluations + 1;
  r.elapsed_ms = clock.elapsed_ms();
  return r;
}

// Exact-match lookup for environments seen during selection.
inline std::size_t dispatch(const SelectionResult& result, const Environment& env) {
  auto it = result.winners.find(env);
  if (it == result.winners.end()) throw NoMappingError("no variant mapping for environment " + env.to_string());
  return it->second;
}

}  // namespace portune
