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
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/objectives/objectives.hpp"
#include "portune/selectors/job.hpp"

namespace portune::detail {

// Scope rows copied once into variant-major score columns so subset searches can
// evaluate many candidate sets cheaply. Per-environment scores are log slowdowns
// (library) or quantity-weighted runtimes (fleet); in both cases the per
// environment value of a set is the minimum score over its members.
class SetEvaluator {
 public:
  template <SlowdownTable Table>
  SetEvaluator(const Table& table, const SelectionJob& job, const std::vector<std::size_t>& pool)
      : kind_(job.objective.kind), envs_(job.scope.size()), pool_(pool) {
    column_of_.assign(table.cols(), kNone);
    for (std::size_t p = 0; p < pool_.size(); ++p) column_of_[pool_[p]] = p;
    scores_.resize(pool_.size() * envs_);
    const auto& environments = table.environments();
    if (kind_ == ObjectiveKind::kFleetRate) {
      const FleetSpec& fleet = *job.objective.fleet;
      std::map<std::string, std::size_t> group_of;
      group_.resize(envs_);
      for (std::size_t i = 0; i < envs_; ++i) {
        const Environment& env = environments[job.scope[i]];
        auto qd = fleet.device_quantity.find(env.device);
        if (qd == fleet.device_quantity.end()) throw ScopeError("fleet spec missing device '" + env.device + "'");
        auto [it, added] = group_of.emplace(env.device, group_of.size());
        if (added) device_quantity_.push_back(qd->second);
        group_[i] = it->second;
      }
    }
    for (std::size_t i = 0; i < envs_; ++i) {
      const std::size_t e = job.scope[i];
      if (kind_ == ObjectiveKind::kLibraryGeomean) {
        const auto row = table.row(e);
        for (std::size_t p = 0; p < pool_.size(); ++p) scores_[p * envs_ + i] = std::log(row[pool_[p]]);
      } else {
        const auto row = table.runtime_row(e);
        const auto& in = environments[e].input;
        auto qi = job.objective.fleet->input_quantity.find(in);
        if (qi == job.objective.fleet->input_quantity.end()) throw ScopeError("fleet spec missing input " + in.key());
        for (std::size_t p = 0; p < pool_.size(); ++p) scores_[p * envs_ + i] = row[pool_[p]] * qi->second;
      }
    }
    group_sum_.resize(device_quantity_.size());
  }

  std::size_t environments() const { return envs_; }
  const std::vector<std::size_t>& pool() const { return pool_; }
  std::size_t evaluations() const { return evaluations_; }

  // Scores of pool member p across the scope.
  std::span<const double> column(std::size_t p) const { return {scores_.data() + p * envs_, envs_}; }
  std::size_t pool_position(std::size_t variant) const { return column_of_[variant]; }

  // Cost from per-environment values produced by `value(i)`.
  template <typename F>
  double aggregate(F&& value) {
    ++evaluations_;
    if (kind_ == ObjectiveKind::kLibraryGeomean) {
      double sum = 0.0;
      for (std::size_t i = 0; i < envs_; ++i) sum += value(i);
      return std::exp(sum / static_cast<double>(envs_));
    }
    std::fill(group_sum_.begin(), group_sum_.end(), 0.0);
    for (std::size_t i = 0; i < envs_; ++i) group_sum_[group_[i]] += value(i);
    double rate = 0.0;
    for (std::size_t g = 0; g < group_sum_.size(); ++g) rate += device_quantity_[g] / group_sum_[g];
    return 1.0 / rate;
  }

  // Cost of a set given as pool positions.
  double cost_of(std::span<const std::size_t> members) {
    scratch_.assign(envs_, std::numeric_limits<double>::infinity());
    for (std::size_t p : members) {
      const auto col = column(p);
      for (std::size_t i = 0; i < envs_; ++i) scratch_[i] = std::min(scratch_[i], col[i]);
    }
    return aggregate([this](std::size_t i) { return scratch_[i]; });
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  ObjectiveKind kind_;
  std::size_t envs_;
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> column_of_;
  std::vector<double> scores_;
  std::vector<std::size_t> group_;
  std::vector<double> device_quantity_;
  std::vector<double> group_sum_;
  std::vector<double> scratch_;
  std::size_t evaluations_ = 0;
};

// Lowest-index argmin over pool columns of the mean of `rows` (scope positions).
template <SlowdownTable Table>
std::size_t argmin_of_mean(const Table& table, const Scope& scope, std::span<const std::size_t> rows,
                           const std::vector<std::size_t>& pool) {
  std::vector<double> sum(pool.size(), 0.0);
  for (std::size_t r : rows) {
    const auto row = table.row(scope[r]);
    for (std::size_t p = 0; p < pool.size(); ++p) sum[p] += row[pool[p]];
  }
  std::size_t best = 0;
  for (std::size_t p = 1; p < pool.size(); ++p) {
    if (sum[p] < sum[best]) best = p;
  }
  return pool[best];
}

}  // namespace portune::detail
