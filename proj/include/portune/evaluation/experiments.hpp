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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/core/random.hpp"
#include "portune/dataset/slowdown_matrix.hpp"
#include "portune/evaluation/report.hpp"
#include "portune/selectors/select.hpp"

namespace portune {

struct SweepOptions {
  std::vector<std::size_t> kappas;
  std::vector<Method> methods;  // empty: the template's method
  std::size_t runs = 30;
  // Run r uses derive_seed(template seed, r); off means every run reuses the
  // template seed.
  bool vary_seeds = true;
  std::size_t workers = 1;
};

inline std::uint64_t run_seed(std::uint64_t seed, std::size_t run, bool vary) {
  return vary ? derive_seed(seed, run) : seed;
}

// One aggregated report per (kappa, method), kappa-major.
template <SlowdownTable Table>
std::vector<EvaluationReport> divergence_sweep(const Table& table, const SelectionJob& templ, const SweepOptions& opts,
                                               const FeatureMatrix& features = {}) {
  if (opts.kappas.empty()) throw PreconditionError("sweep needs at least one kappa");
  if (!std::is_sorted(opts.kappas.begin(), opts.kappas.end())) throw PreconditionError("sweep kappas must ascend");
  if (opts.runs == 0) throw PreconditionError("sweep needs at least one run");
  const std::vector<Method> methods = opts.methods.empty() ? std::vector<Method>{templ.method} : opts.methods;
  std::optional<FleetSpec> fleet;
  if (templ.objective.kind == ObjectiveKind::kFleetRate) fleet = templ.objective.fleet;

  std::vector<EvaluationReport> out;
  for (std::size_t kappa : opts.kappas) {
    for (Method method : methods) {
      std::vector<EvaluationReport> runs(opts.runs);
      parallel_for(opts.runs, opts.workers, [&](std::size_t r) {
        SelectionJob job = templ;
        job.kappa = kappa;
        job.method = method;
        job.seed = run_seed(templ.seed, r, opts.vary_seeds);
        runs[r] = evaluate(select(table, job, features), table, job.scope, fleet);
      });
      out.push_back(aggregate_runs(runs));
    }
  }
  return out;
}

struct HoldoutPlan {
  std::set<std::string> train_devices;
  std::vector<Environment> eval_environments;
  std::size_t repetitions = 30;
  // Requires train and eval devices to be disjoint.
  bool unseen = true;
};

struct HoldoutOutcome {
  EvaluationReport unseen;    // selected on train devices, evaluated on the eval set
  EvaluationReport baseline;  // selected and evaluated on the eval set
  // Row reads made by the train-side selections, split by whether the row
  // belongs to an eval device.
  std::size_t eval_device_reads = 0;
  std::size_t train_reads = 0;
};

// `count` devices drawn without replacement from `pool`.
inline std::set<std::string> random_devices(const std::vector<std::string>& pool, std::size_t count,
                                            std::uint64_t seed) {
  if (count > pool.size()) throw PreconditionError("cannot draw more devices than the pool holds");
  std::vector<std::string> p = pool;
  std::sort(p.begin(), p.end());
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) std::swap(p[i], p[i + rng.below(p.size() - i)]);
  return {p.begin(), p.begin() + static_cast<std::ptrdiff_t>(count)};
}

// Selects on train-device environments only (reads audited through a counting
// wrapper) and evaluates on the eval environments against their own oracles;
// the baseline selects directly on the eval environments with the same seeds.
inline HoldoutOutcome holdout_generalization(const SlowdownMatrix& matrix, const HoldoutPlan& plan,
                                             const SelectionJob& templ, std::size_t workers = 1) {
  if (plan.train_devices.empty()) throw ScopeError("holdout plan has no training devices");
  if (plan.eval_environments.empty()) throw ScopeError("holdout plan has no evaluation environments");
  if (plan.repetitions == 0) throw ScopeError("holdout plan needs at least one repetition");
  std::set<std::string> eval_devices;
  for (const Environment& e : plan.eval_environments) eval_devices.insert(e.device);
  if (plan.unseen) {
    for (const std::string& d : plan.train_devices) {
      if (eval_devices.count(d) != 0) {
        throw ScopeError("device '" + d + "' is both training and evaluation in an unseen plan");
      }
    }
  }
  const Scope train_scope = filter_scope(matrix, plan.train_devices);
  std::set<std::string> present;
  for (std::size_t e : train_scope) present.insert(matrix.environments()[e].device);
  for (const std::string& d : plan.train_devices) {
    if (present.count(d) == 0) throw ScopeError("training device '" + d + "' not in dataset");
  }
  const Scope eval_scope = scope_of(matrix, plan.eval_environments);
  for (std::size_t e : eval_scope) {
    const auto valid = matrix.valid_row(e);
    if (std::find(valid.begin(), valid.end(), std::uint8_t{1}) == valid.end()) {
      throw ScopeError("evaluation environment " + matrix.environments()[e].to_string() + " has no measurements");
    }
  }
  const CountingMatrix audited(matrix);
  std::vector<EvaluationReport> unseen(plan.repetitions), baseline(plan.repetitions);
  parallel_for(plan.repetitions, workers, [&](std::size_t r) {
    SelectionJob job = templ;
    job.seed = run_seed(templ.seed, r, true);
    job.scope = train_scope;
    unseen[r] = evaluate(select(audited, job), matrix, eval_scope);
    job.scope = eval_scope;
    baseline[r] = evaluate(select(matrix, job), matrix, eval_scope);
  });

  HoldoutOutcome out{aggregate_runs(unseen), aggregate_runs(baseline), 0, 0};
  for (std::size_t e = 0; e < matrix.rows(); ++e) {
    if (eval_devices.count(matrix.environments()[e].device) != 0 && plan.unseen) {
      out.eval_device_reads += audited.reads(e);
    } else {
      out.train_reads += audited.reads(e);
    }
  }
  return out;
}

inline HoldoutOutcome holdout_generalization(const PerformanceDataset& full, const HoldoutPlan& plan,
                                             const SelectionJob& templ, std::size_t workers = 1,
                                             PenaltyPolicy penalty = PenaltyPolicy::dataset_max()) {
  return holdout_generalization(build_slowdown_matrix(full, penalty), plan, templ, workers);
}

struct FleetRow {
  std::string label;  // method name, or "per-device" for the pooled baseline
  double median_rate = 0.0;
  std::vector<double> rates;
  std::vector<ParamConfig> variants;  // from the median run
};

// Every device and input in scope with quantity 1: one task is a single pass
// over each device's measured inputs.
template <SlowdownTable Table>
FleetSpec uniform_fleet(const Table& table, const Scope& scope) {
  FleetSpec f;
  for (std::size_t e : scope) {
    f.device_quantity[table.environments()[e].device] = 1.0;
    f.input_quantity[table.environments()[e].input] = 1.0;
  }
  return f;
}

// Median fleet rate per method, plus the baseline that pools each device's own
// best single variant.
template <SlowdownTable Table>
std::vector<FleetRow> fleet_experiment(const Table& table, const FleetSpec& fleet, const SelectionJob& templ,
                                       const std::vector<Method>& methods, std::size_t runs, std::size_t workers = 1,
                                       const FeatureMatrix& features = {}) {
  if (runs == 0) throw PreconditionError("fleet experiment needs at least one run");
  for (std::size_t e : templ.scope) {
    const Environment& env = table.environments()[e];
    if (fleet.device_quantity.count(env.device) == 0) throw ScopeError("fleet spec missing device '" + env.device + "'");
    if (fleet.input_quantity.count(env.input) == 0) throw ScopeError("fleet spec missing input " + env.input.key());
  }
  std::vector<FleetRow> rows;
  for (Method method : methods) {
    std::vector<SelectionResult> results(runs);
    parallel_for(runs, workers, [&](std::size_t r) {
      SelectionJob job = templ;
      job.method = method;
      job.objective = Objective::fleet_rate(fleet);
      job.seed = run_seed(templ.seed, r, true);
      results[r] = select(table, job, features);
    });
    FleetRow row{std::string(to_string(method)), 0.0, {}, {}};
    for (const SelectionResult& r : results) row.rates.push_back(fleet_rate(table, r.chosen, fleet, templ.scope));
    std::vector<std::size_t> order(runs);
    for (std::size_t i = 0; i < runs; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row.rates[a] < row.rates[b]; });
    row.median_rate = median_of(row.rates);
    row.variants = results[order[(runs - 1) / 2]].chosen_configs;
    rows.push_back(std::move(row));
  }

  std::set<std::string> devices;
  for (std::size_t e : templ.scope) devices.insert(table.environments()[e].device);
  std::vector<std::size_t> pooled;
  for (const std::string& d : devices) {
    SelectionJob job = templ;
    job.method = Method::kExhaustive;
    job.objective = Objective::library();
    job.kappa = 1;
    job.scope.clear();
    for (std::size_t e : templ.scope) {
      if (table.environments()[e].device == d) job.scope.push_back(e);
    }
    const SelectionResult r = select_exhaustive(table, job);
    pooled.push_back(r.chosen.indices().front());
  }
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
  const CandidateSet pool_set(pooled);
  FleetRow base{"per-device", fleet_rate(table, pool_set, fleet, templ.scope), {}, {}};
  base.rates.push_back(base.median_rate);
  for (std::size_t v : pool_set) base.variants.push_back(table.variants()[v]);
  rows.push_back(std::move(base));
  return rows;
}

}  // namespace portune
