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
#include <cstdint>
#include <limits>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/selectors/job.hpp"
#include "portune/selectors/set_evaluator.hpp"

namespace portune {

// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t combinations(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(c);
}

// Globally optimal set of size kappa over the candidate pool. Sets are visited in
// lexicographic index order and only a strictly lower cost replaces the incumbent.
template <SlowdownTable Table>
SelectionResult select_exhaustive(const Table& table, const SelectionJob& job) {
  Stopwatch clock;
  check_job(job, table.cols());
  const std::vector<std::size_t> pool = candidate_pool(table, job.scope, job.kappa);
  const std::uint64_t count = combinations(pool.size(), job.kappa);
  if (count > job.enumeration_cap) {
    throw EnumerationCapError("exhaustive search needs " + std::to_string(count) + " combinations (cap " +
                              std::to_string(job.enumeration_cap) + "); use another method");
  }
  detail::SetEvaluator eval(table, job, pool);
  const std::size_t envs = eval.environments();
  const std::size_t k = job.kappa;
  const std::size_t n = pool.size();

  // prefix[d] holds the per-environment minimum over the first d+1 members.
  std::vector<std::vector<double>> prefix(k, std::vector<double>(envs));
  std::vector<std::size_t> pick(k);
  std::vector<std::size_t> best_pick;
  double best_cost = std::numeric_limits<double>::infinity();

  auto descend = [&](auto&& self, std::size_t depth, std::size_t first) -> void {
    for (std::size_t p = first; p + (k - depth) <= n; ++p) {
      pick[depth] = p;
      const auto col = eval.column(p);
      if (depth + 1 == k) {
        const double c = depth == 0 ? eval.aggregate([&](std::size_t i) { return col[i]; })
                                    : eval.aggregate([&](std::size_t i) { return std::min(prefix[depth - 1][i], col[i]); });
        if (c < best_cost) {
          best_cost = c;
          best_pick = pick;
        }
        continue;
      }
      auto& cur = prefix[depth];
      if (depth == 0) {
        std::copy(col.begin(), col.end(), cur.begin());
      } else {
        for (std::size_t i = 0; i < envs; ++i) cur[i] = std::min(prefix[depth - 1][i], col[i]);
      }
      self(self, depth + 1, p + 1);
    }
  };
  descend(descend, 0, 0);

  std::vector<std::size_t> chosen;
  for (std::size_t p : best_pick) chosen.push_back(pool[p]);
  SelectionResult r = finalize_result(table, job, CandidateSet(std::move(chosen)), Method::kExhaustive, clock,
                                      eval.evaluations());
  r.log.push_back({r.elapsed_ms, r.evaluations, r.cost});
  return r;
}

}  // namespace portune
