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
#include <limits>
#include <span>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/core/random.hpp"
#include "portune/selectors/job.hpp"
#include "portune/selectors/set_evaluator.hpp"

namespace portune {

struct KMeansFit {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;        // k x dim, row-major
  std::vector<std::size_t> assignment;  // per point
  std::vector<double> wcss_history;     // after each Lloyd iteration
  std::size_t iterations = 0;
  std::size_t repairs = 0;
};

namespace kmeans_detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

}  // namespace kmeans_detail

// Lloyd's algorithm with k-means++ seeding over `points` (n x dim, row-major).
// A cluster left empty by an assignment step takes the point farthest from its
// current centroid (taken from a cluster with more than one member).
inline KMeansFit kmeans_fit(std::span<const double> points, std::size_t dim, std::size_t k, std::uint64_t seed,
                            std::size_t max_iterations = 300) {
  using kmeans_detail::sq_dist;
  if (dim == 0 || points.size() % dim != 0) throw PreconditionError("k-means point buffer has the wrong shape");
  const std::size_t n = points.size() / dim;
  if (k == 0 || k > n) throw PreconditionError("k-means needs 1 <= k <= number of points");
  auto point = [&](std::size_t i) { return points.subspan(i * dim, dim); };

  KMeansFit fit;
  fit.k = k;
  fit.dim = dim;
  fit.centroids.resize(k * dim);
  auto centroid = [&](std::size_t c) { return std::span<double>(fit.centroids).subspan(c * dim, dim); };

  Rng rng(seed);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(n);
  std::copy_n(point(first).begin(), dim, centroid(0).begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(point(i), centroid(c - 1)));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    std::copy_n(point(pick).begin(), dim, centroid(c).begin());
  }

  fit.assignment.assign(n, k);
  std::vector<double> dist(n);
  std::vector<std::size_t> members(k);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    std::fill(members.begin(), members.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = sq_dist(point(i), centroid(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(point(i), centroid(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed |= fit.assignment[i] != best;
      fit.assignment[i] = best;
      dist[i] = best_d;
      ++members[best];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (members[fit.assignment[i]] > 1 && dist[i] > 0.0 && (far == n || dist[i] > dist[far])) far = i;
      }
      if (far == n) continue;  // every point sits on a centroid
      --members[fit.assignment[far]];
      fit.assignment[far] = c;
      dist[far] = 0.0;
      ++members[c];
      std::copy_n(point(far).begin(), dim, centroid(c).begin());
      ++fit.repairs;
      changed = true;
    }
    if (!changed && iter > 0) break;

    std::vector<double> sums(k * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = point(i);
      double* s = sums.data() + fit.assignment[i] * dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid(c)[j] = sums[c * dim + j] / static_cast<double>(members[c]);
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) wcss += sq_dist(point(i), centroid(fit.assignment[i]));
    fit.wcss_history.push_back(wcss);
    fit.iterations = iter + 1;
  }
  return fit;
}

// Clusters scope environments by their slowdown rows (k = kappa) and takes, per
// cluster, the variant with the lowest mean slowdown. Duplicate picks collapse,
// so fewer than kappa variants may come back.
template <SlowdownTable Table>
SelectionResult select_kmeans(const Table& table, const SelectionJob& job) {
  Stopwatch clock;
  check_job(job, table.cols());
  if (job.scope.size() < job.kappa) {
    throw PreconditionError("k-means needs at least kappa environments in scope");
  }
  const std::vector<std::size_t> pool = candidate_pool(table, job.scope, job.kappa);
  const std::size_t dim = table.cols();
  std::vector<double> points(job.scope.size() * dim);
  for (std::size_t i = 0; i < job.scope.size(); ++i) {
    const auto row = table.row(job.scope[i]);
    std::copy(row.begin(), row.end(), points.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  const KMeansFit fit = kmeans_fit(points, dim, job.kappa, job.seed, job.kmeans_max_iterations);

  std::vector<std::size_t> picks;
  std::size_t clusters = 0;
  for (std::size_t c = 0; c < fit.k; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fit.assignment.size(); ++i) {
      if (fit.assignment[i] == c) rows.push_back(i);
    }
    if (rows.empty()) continue;
    ++clusters;
    picks.push_back(detail::argmin_of_mean(table, job.scope, rows, pool));
  }
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  SelectionResult r = finalize_result(table, job, CandidateSet(std::move(picks)), Method::kKMeans, clock, 0);
  r.groups = clusters;
  r.log.push_back({r.elapsed_ms, r.evaluations, r.cost});
  return r;
}

}  // namespace portune
