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
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/selectors/job.hpp"
#include "portune/selectors/set_evaluator.hpp"

namespace portune {

// Numeric description of each scope environment used for tree splits.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<double> values;  // rows x names.size()

  std::size_t dim() const { return names.size(); }
  std::size_t rows() const { return names.empty() ? 0 : values.size() / names.size(); }
  double at(std::size_t row, std::size_t f) const { return values[row * names.size() + f]; }
};

// (m, n, k, one-hot device) for the given environments, devices in sorted order.
inline FeatureMatrix default_features(std::span<const Environment> envs) {
  std::map<std::string, std::size_t> ordinal;
  for (const Environment& e : envs) ordinal.emplace(e.device, 0);
  std::size_t next = 0;
  for (auto& [name, idx] : ordinal) idx = next++;
  FeatureMatrix f;
  f.names = {"m", "n", "k"};
  for (const auto& [name, idx] : ordinal) f.names.push_back("device=" + name);
  f.values.reserve(envs.size() * f.names.size());
  for (const Environment& e : envs) {
    f.values.push_back(e.input.m);
    f.values.push_back(e.input.n);
    f.values.push_back(e.input.k);
    for (std::size_t d = 0; d < ordinal.size(); ++d) f.values.push_back(d == ordinal.at(e.device) ? 1.0 : 0.0);
  }
  return f;
}

struct TreeSplit {
  std::size_t leaf = 0;  // index into the leaf list at split time
  std::size_t feature = 0;
  double threshold = 0.0;  // left: value <= threshold
  double reduction = 0.0;
  double sse_before = 0.0;  // total over all leaves
  double sse_after = 0.0;
};

struct RegressionTreeFit {
  std::vector<std::vector<std::size_t>> leaves;  // point indices, ascending
  std::vector<TreeSplit> splits;
  double root_sse = 0.0;
};

namespace tree_detail {

struct Candidate {
  bool ok = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double reduction = 0.0;
  std::vector<std::size_t> left, right;
};

inline double node_sse(std::span<const double> targets, std::size_t dim, const std::vector<std::size_t>& rows) {
  std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
  for (std::size_t r : rows) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double x = targets[r * dim + j];
      sum[j] += x;
      sumsq[j] += x * x;
    }
  }
  double sse = 0.0;
  for (std::size_t j = 0; j < dim; ++j) sse += sumsq[j] - sum[j] * sum[j] / static_cast<double>(rows.size());
  return std::max(sse, 0.0);
}

inline Candidate best_split(std::span<const double> targets, std::size_t dim, const FeatureMatrix& features,
                            const std::vector<std::size_t>& rows, double min_gain) {
  Candidate best;
  const std::size_t n = rows.size();
  if (n < 2) return best;
  std::vector<double> total(dim, 0.0);
  for (std::size_t r : rows)
    for (std::size_t j = 0; j < dim; ++j) total[j] += targets[r * dim + j];
  double base = 0.0;
  for (std::size_t j = 0; j < dim; ++j) base += total[j] * total[j] / static_cast<double>(n);

  std::vector<std::size_t> order(rows);
  std::vector<double> left(dim);
  for (std::size_t f = 0; f < features.dim(); ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return features.at(a, f) < features.at(b, f); });
    std::fill(left.begin(), left.end(), 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t r = order[i];
      for (std::size_t j = 0; j < dim; ++j) left[j] += targets[r * dim + j];
      const double x0 = features.at(r, f);
      const double x1 = features.at(order[i + 1], f);
      if (!(x0 < x1)) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = static_cast<double>(n - i - 1);
      double score = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double rj = total[j] - left[j];
        score += left[j] * left[j] / nl + rj * rj / nr;
      }
      const double reduction = score - base;
      if (reduction > min_gain && (!best.ok || reduction > best.reduction)) {
        best.ok = true;
        best.feature = f;
        best.threshold = x0 + (x1 - x0) / 2.0;
        best.reduction = reduction;
      }
    }
  }
  if (best.ok) {
    for (std::size_t r : rows) (features.at(r, best.feature) <= best.threshold ? best.left : best.right).push_back(r);
  }
  return best;
}

}  // namespace tree_detail

// Best-first multi-output regression tree over `targets` (n x dim), growing at
// most `max_leaves` leaves. The leaf whose best axis-aligned split removes the
// most squared error is split next; splits that do not reduce error stop growth.
inline RegressionTreeFit fit_regression_tree(std::span<const double> targets, std::size_t dim,
                                             const FeatureMatrix& features, std::size_t max_leaves) {
  if (dim == 0 || targets.size() % dim != 0) throw PreconditionError("tree targets have the wrong shape");
  const std::size_t n = targets.size() / dim;
  if (features.rows() != n) throw PreconditionError("feature rows do not match targets");
  if (max_leaves == 0) throw PreconditionError("tree needs at least one leaf");

  RegressionTreeFit fit;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  fit.root_sse = tree_detail::node_sse(targets, dim, all);
  // Gains below this are rounding noise relative to the data scale.
  const double min_gain = 1e-12 * std::max(1.0, fit.root_sse);

  fit.leaves.push_back(std::move(all));
  std::vector<double> sse{fit.root_sse};
  std::vector<tree_detail::Candidate> cand{tree_detail::best_split(targets, dim, features, fit.leaves[0], min_gain)};
  double total = fit.root_sse;
  while (fit.leaves.size() < max_leaves) {
    std::size_t pick = fit.leaves.size();
    for (std::size_t l = 0; l < fit.leaves.size(); ++l) {
      if (cand[l].ok && (pick == fit.leaves.size() || cand[l].reduction > cand[pick].reduction)) pick = l;
    }
    if (pick == fit.leaves.size()) break;
    tree_detail::Candidate c = std::move(cand[pick]);
    TreeSplit split{pick, c.feature, c.threshold, c.reduction, total, 0.0};
    const double left_sse = tree_detail::node_sse(targets, dim, c.left);
    const double right_sse = tree_detail::node_sse(targets, dim, c.right);
    total += left_sse + right_sse - sse[pick];
    split.sse_after = total;
    fit.splits.push_back(split);

    fit.leaves[pick] = std::move(c.left);
    sse[pick] = left_sse;
    cand[pick] = tree_detail::best_split(targets, dim, features, fit.leaves[pick], min_gain);
    fit.leaves.push_back(std::move(c.right));
    sse.push_back(right_sse);
    cand.push_back(tree_detail::best_split(targets, dim, features, fit.leaves.back(), min_gain));
  }
  return fit;
}

// Fits a kappa-leaf tree predicting each scope environment's slowdown row from
// its features and takes, per leaf, the variant with the lowest leaf-mean
// slowdown. Duplicate picks collapse. An empty feature matrix selects the
// default (m, n, k, device one-hot) features.
template <SlowdownTable Table>
SelectionResult select_tree(const Table& table, const SelectionJob& job, const FeatureMatrix& features = {}) {
  Stopwatch clock;
  check_job(job, table.cols());
  const std::vector<std::size_t> pool = candidate_pool(table, job.scope, job.kappa);
  FeatureMatrix feats = features;
  if (feats.dim() == 0) {
    std::vector<Environment> envs;
    for (std::size_t e : job.scope) envs.push_back(table.environments()[e]);
    feats = default_features(envs);
  }
  if (feats.rows() != job.scope.size()) throw PreconditionError("feature matrix must cover every scope environment");

  const std::size_t dim = table.cols();
  std::vector<double> targets(job.scope.size() * dim);
  for (std::size_t i = 0; i < job.scope.size(); ++i) {
    const auto row = table.row(job.scope[i]);
    std::copy(row.begin(), row.end(), targets.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  const RegressionTreeFit fit = fit_regression_tree(targets, dim, feats, job.kappa);

  std::vector<std::size_t> picks;
  for (const auto& leaf : fit.leaves) picks.push_back(detail::argmin_of_mean(table, job.scope, leaf, pool));
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  SelectionResult r = finalize_result(table, job, CandidateSet(std::move(picks)), Method::kDecisionTree, clock, 0);
  r.groups = fit.leaves.size();
  r.log.push_back({r.elapsed_ms, r.evaluations, r.cost});
  return r;
}

}  // namespace portune
