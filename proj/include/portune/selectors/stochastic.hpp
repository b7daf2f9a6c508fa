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
#include <limits>
#include <numeric>
#include <vector>

#include "portune/core/random.hpp"
#include "portune/selectors/job.hpp"
#include "portune/selectors/set_evaluator.hpp"

namespace portune {

namespace stochastic_detail {

struct SearchState {
  std::vector<std::size_t> members;  // sorted pool positions
  double cost = std::numeric_limits<double>::infinity();
};

// Steepest-descent over single swaps (one member out, one non-member in).
// Returns false if the time budget ran out.
inline bool descend(detail::SetEvaluator& eval, SearchState& state, const Stopwatch& clock, double budget_ms) {
  const std::size_t envs = eval.environments();
  const std::size_t n = eval.pool().size();
  const std::size_t k = state.members.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best(envs), second(envs), base(envs);
  std::vector<std::size_t> owner(envs);
  std::vector<std::uint8_t> in_set(n, 0);
  while (true) {
    std::fill(in_set.begin(), in_set.end(), 0);
    for (std::size_t p : state.members) in_set[p] = 1;
    std::fill(best.begin(), best.end(), kInf);
    std::fill(second.begin(), second.end(), kInf);
    for (std::size_t s = 0; s < k; ++s) {
      const auto col = eval.column(state.members[s]);
      for (std::size_t i = 0; i < envs; ++i) {
        if (col[i] < best[i]) {
          second[i] = best[i];
          best[i] = col[i];
          owner[i] = s;
        } else if (col[i] < second[i]) {
          second[i] = col[i];
        }
      }
    }
    double move_cost = state.cost;
    std::size_t move_slot = k;
    std::size_t move_in = n;
    for (std::size_t s = 0; s < k; ++s) {
      for (std::size_t i = 0; i < envs; ++i) base[i] = owner[i] == s ? second[i] : best[i];
      for (std::size_t p = 0; p < n; ++p) {
        if (in_set[p]) continue;
        const auto col = eval.column(p);
        const double c = eval.aggregate([&](std::size_t i) { return std::min(base[i], col[i]); });
        if (c < move_cost) {
          move_cost = c;
          move_slot = s;
          move_in = p;
        }
      }
      if (clock.elapsed_ms() > budget_ms) return false;
    }
    if (move_slot == k) return true;
    state.members[move_slot] = move_in;
    std::sort(state.members.begin(), state.members.end());
    state.cost = move_cost;
  }
}

}  // namespace stochastic_detail

// Multi-start swap local search. The first descent starts from the greedy
// marginal-gain set; later ones start from random kappa-subsets whose seeds are
// derived from (job seed, restart ordinal). Strict improvements only. With the
// budget not exhausted the result depends only on the job.
template <SlowdownTable Table>
SelectionResult select_stochastic(const Table& table, const SelectionJob& job) {
  using stochastic_detail::SearchState;
  Stopwatch clock;
  check_job(job, table.cols());
  const std::vector<std::size_t> pool = candidate_pool(table, job.scope, job.kappa);
  const std::size_t n = pool.size();
  const std::size_t k = job.kappa;
  if (k >= n) {
    SelectionResult r = finalize_result(table, job, CandidateSet(pool), Method::kStochastic, clock, 0);
    r.log.push_back({r.elapsed_ms, r.evaluations, r.cost});
    return r;
  }
  detail::SetEvaluator eval(table, job, pool);
  const std::size_t envs = eval.environments();
  std::vector<IterationLogEntry> log;

  // No set can beat dispatching every environment to its best pool member.
  std::vector<std::size_t> everything(n);
  std::iota(everything.begin(), everything.end(), std::size_t{0});
  const double floor_cost = eval.cost_of(everything);

  SearchState best_state;
  auto offer = [&](const SearchState& s) {
    if (s.cost < best_state.cost || (s.cost == best_state.cost && s.members < best_state.members)) {
      const bool improved = s.cost < best_state.cost;
      best_state = s;
      if (improved) log.push_back({clock.elapsed_ms(), eval.evaluations(), s.cost});
      return improved;
    }
    return false;
  };

  // Greedy marginal gain.
  SearchState greedy;
  {
    std::vector<double> cur(envs, std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> taken(n, 0);
    for (std::size_t step = 0; step < k; ++step) {
      double best_c = std::numeric_limits<double>::infinity();
      std::size_t pick = n;
      for (std::size_t p = 0; p < n; ++p) {
        if (taken[p]) continue;
        const auto col = eval.column(p);
        const double c = eval.aggregate([&](std::size_t i) { return std::min(cur[i], col[i]); });
        if (c < best_c) {
          best_c = c;
          pick = p;
        }
      }
      taken[pick] = 1;
      const auto col = eval.column(pick);
      for (std::size_t i = 0; i < envs; ++i) cur[i] = std::min(cur[i], col[i]);
      greedy.members.push_back(pick);
      greedy.cost = best_c;
    }
    std::sort(greedy.members.begin(), greedy.members.end());
  }
  offer(greedy);
  bool in_budget = stochastic_detail::descend(eval, greedy, clock, job.budget_ms);
  offer(greedy);

  std::vector<std::size_t> perm(n);
  std::size_t stale = 0;
  for (std::size_t restart = 1; in_budget && best_state.cost > floor_cost && restart <= job.stochastic.max_restarts;
       ++restart) {
    Rng rng(derive_seed(job.seed, restart));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
    SearchState s;
    s.members.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(s.members.begin(), s.members.end());
    s.cost = eval.cost_of(s.members);
    in_budget = stochastic_detail::descend(eval, s, clock, job.budget_ms);
    if (offer(s)) {
      stale = 0;
    } else if (++stale >= job.stochastic.patience) {
      break;
    }
  }

  std::vector<std::size_t> chosen;
  for (std::size_t p : best_state.members) chosen.push_back(pool[p]);
  SelectionResult r =
      finalize_result(table, job, CandidateSet(std::move(chosen)), Method::kStochastic, clock, eval.evaluations());
  r.log = std::move(log);
  r.log.push_back({r.elapsed_ms, r.evaluations, best_state.cost});
  return r;
}

}  // namespace portune
