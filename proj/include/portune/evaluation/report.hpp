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
#include <cmath>
#include <cstddef>
#include <exception>
#include <map>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/objectives/objectives.hpp"
#include "portune/selectors/job.hpp"

namespace portune {

struct Interval {
  double low = 0.0;
  double high = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct CdfPoint {
  double threshold = 0.0;  // slowdown
  double fraction = 0.0;   // share of environments at or below it
};

struct EvaluationReport {
  std::map<Environment, double> per_env;
  double geomean = 0.0;
  double median = 0.0;
  std::vector<CdfPoint> cdf;
  std::optional<double> fleet_rate;
  std::size_t kappa = 0;
  Method method = Method::kStochastic;
  std::vector<ParamConfig> chosen;

  // Filled when several runs are aggregated. The fields above then describe
  // the median-performing run.
  std::size_t runs = 1;
  std::optional<double> mean_geomean;
  std::optional<Interval> ci95;
  std::vector<double> run_geomeans;
  std::map<Environment, Interval> per_env_ci95;
};

// Maps a result's chosen configs onto `table` columns.
template <SlowdownTable Table>
CandidateSet bind_result(const SelectionResult& result, const Table& table) {
  std::vector<std::size_t> cols;
  const auto& variants = table.variants();
  for (const ParamConfig& c : result.chosen_configs) {
    auto it = std::lower_bound(variants.begin(), variants.end(), c);
    if (it == variants.end() || *it != c) throw ScopeError("chosen variant " + c.to_string() + " not in matrix");
    cols.push_back(static_cast<std::size_t>(it - variants.begin()));
  }
  if (cols.empty()) throw ScopeError("result has no chosen variants");
  return CandidateSet(std::move(cols));
}

inline double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

// Normal-approximation 95% interval for the mean of `values`.
inline Interval ci95_of(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, mean};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double half = 1.959963984540054 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return {mean - half, mean + half};
}

inline std::vector<CdfPoint> cdf_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<CdfPoint> cdf;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    cdf.push_back({values[i], static_cast<double>(i + 1) / n});
  }
  if (!cdf.empty()) cdf.back().fraction = 1.0;
  return cdf;
}

// Share of environments at or below `threshold` according to the CDF.
inline double cdf_at(const std::vector<CdfPoint>& cdf, double threshold) {
  double f = 0.0;
  for (const CdfPoint& p : cdf) {
    if (p.threshold <= threshold) f = p.fraction;
  }
  return f;
}

// Achieved slowdown per scope environment when dispatching to the best chosen variant.
template <SlowdownTable Table>
EvaluationReport evaluate(const SelectionResult& result, const Table& table, const Scope& scope,
                          const std::optional<FleetSpec>& fleet = std::nullopt) {
  if (scope.empty()) throw ScopeError("evaluation scope is empty");
  const CandidateSet chosen = bind_result(result, table);
  EvaluationReport rep;
  std::vector<double> values;
  values.reserve(scope.size());
  for (std::size_t e : scope) {
    if (e >= table.rows()) throw ScopeError("scope row out of range");
    const auto row = table.row(e);
    double best = row[chosen.indices().front()];
    for (std::size_t v : chosen) best = std::min(best, row[v]);
    rep.per_env.emplace(table.environments()[e], best);
    values.push_back(best);
  }
  rep.geomean = library_cost(table, chosen, scope);
  rep.median = median_of(values);
  rep.cdf = cdf_of(std::move(values));
  if (fleet) rep.fleet_rate = fleet_rate(table, chosen, *fleet, scope);
  rep.kappa = result.kappa;
  rep.method = result.method;
  rep.chosen = result.chosen_configs;
  return rep;
}

// Folds repeated runs into one report: the median-performing run (lower median
// by geomean, earliest on ties) supplies the per-environment view.
inline EvaluationReport aggregate_runs(const std::vector<EvaluationReport>& runs) {
  if (runs.empty()) throw Error("no runs to aggregate");
  std::vector<std::size_t> order(runs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].geomean < runs[b].geomean; });
  EvaluationReport out = runs[order[(runs.size() - 1) / 2]];
  out.runs = runs.size();
  out.run_geomeans.clear();
  for (const EvaluationReport& r : runs) out.run_geomeans.push_back(r.geomean);
  const Interval ci = ci95_of(out.run_geomeans);
  out.ci95 = ci;
  double mean = 0.0;
  for (double g : out.run_geomeans) mean += g;
  out.mean_geomean = mean / static_cast<double>(runs.size());
  out.per_env_ci95.clear();
  for (const auto& [env, s] : out.per_env) {
    std::vector<double> xs;
    for (const EvaluationReport& r : runs) xs.push_back(r.per_env.at(env));
    out.per_env_ci95.emplace(env, ci95_of(xs));
  }
  return out;
}

// Runs f(0..n-1) on up to `workers` threads; f must only touch its own slot.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& f) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace portune
