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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "portune/selectors/select.hpp"

namespace portune {
namespace {

using testing::Rows;

SelectionJob library_job(const SlowdownMatrix& m, std::size_t kappa, Method method, std::uint64_t seed = 0) {
  SelectionJob job;
  job.scope = full_scope(m);
  job.kappa = kappa;
  job.method = method;
  job.seed = seed;
  return job;
}

struct Planted {
  SyntheticDataset syn;
  SlowdownMatrix m;
  std::vector<std::size_t> cols;
};

Planted make_planted(std::size_t devices, std::size_t inputs, std::size_t variants, std::size_t g, double gap,
                     std::uint64_t seed) {
  auto syn = generate_synthetic(testing::planted_spec(devices, inputs, variants, g, gap), seed);
  auto m = build_slowdown_matrix(syn.dataset);
  auto cols = testing::planted_columns(syn, m);
  return {std::move(syn), std::move(m), std::move(cols)};
}

TEST(Exhaustive, FullSetIsPerfect) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(5, 6, 3)));
  const auto r = select_exhaustive(m, library_job(m, 6, Method::kExhaustive));
  EXPECT_DOUBLE_EQ(r.cost, 1.0);
  EXPECT_EQ(r.chosen.size(), 6u);
}

TEST(Exhaustive, RecoversPlantedPair) {
  const auto p = make_planted(2, 4, 10, 2, 2.0, 7);
  const auto r = select_exhaustive(p.m, library_job(p.m, 2, Method::kExhaustive));
  EXPECT_EQ(r.chosen.indices(), p.cols);
  EXPECT_DOUBLE_EQ(r.cost, 1.0);
  EXPECT_EQ(r.chosen_configs, p.syn.planted);
}

// Slowdowns (rows) for a 3x4 problem, best pair computed by hand:
//   {0,1}: 1*1*3 = 3, {0,2}: 1*2*1 = 2, {0,3}: 1*1.5*2 = 3, {1,2}: 2*1*1 = 2,
//   {1,3}: 1.5*1*2 = 3, {2,3}: 3*1.5*1 = 4.5. Tie at 2: lexicographic first wins.
TEST(Exhaustive, HandWorkedThreeByFour) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows({{1, 2, 3, 1.5}, {4, 1, 2, 1.5}, {3, 9, 1, 2}}));
  const auto r = select_exhaustive(m, library_job(m, 2, Method::kExhaustive));
  EXPECT_EQ(r.chosen.indices(), (std::vector<std::size_t>{0, 2}));
  EXPECT_NEAR(r.cost, std::cbrt(2.0), 1e-12);
}

TEST(Exhaustive, MatchesBitmaskOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(7, 9, seed)));
    const Rows rows = testing::slowdown_rows(m);
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto oracle = testing::enumerate_subsets(9, k, [&](const auto& s) { return testing::brute_geomean(rows, s); });
      const auto r = select_exhaustive(m, library_job(m, k, Method::kExhaustive));
      EXPECT_NEAR(r.cost, oracle.cost, 1e-12 * oracle.cost) << seed << " k=" << k;
    }
  }
}

TEST(Exhaustive, CostNonIncreasingInKappa) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(8, 8, seed)));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 8; ++k) {
      const double c = select_exhaustive(m, library_job(m, k, Method::kExhaustive)).cost;
      EXPECT_LE(c, prev * (1 + 1e-12));
      prev = c;
    }
    EXPECT_DOUBLE_EQ(prev, 1.0);
  }
}

TEST(Exhaustive, EnumerationCap) {
  EXPECT_EQ(combinations(10, 3), 120u);
  EXPECT_EQ(combinations(5, 0), 1u);
  EXPECT_EQ(combinations(3, 5), 0u);
  EXPECT_EQ(combinations(1'000'000, 500'000), std::numeric_limits<std::uint64_t>::max());
  const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(2, 30, 1)));
  SelectionJob job = library_job(m, 10, Method::kExhaustive);
  EXPECT_THROW(select_exhaustive(m, job), EnumerationCapError);
  job.enumeration_cap = 100;
  job.kappa = 3;
  EXPECT_THROW(select_exhaustive(m, job), EnumerationCapError);
}

TEST(Stochastic, KappaOneMatchesExhaustive) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(10, 15, seed)));
    const auto ex = select_exhaustive(m, library_job(m, 1, Method::kExhaustive));
    const auto st = select_stochastic(m, library_job(m, 1, Method::kStochastic, seed));
    EXPECT_EQ(st.chosen, ex.chosen);
    EXPECT_DOUBLE_EQ(st.cost, ex.cost);
  }
}

TEST(Stochastic, NearExhaustiveAcrossSeeds) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(30, 18, 99)));
  const double best = select_exhaustive(m, library_job(m, 3, Method::kExhaustive)).cost;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto r = select_stochastic(m, library_job(m, 3, Method::kStochastic, seed));
    EXPECT_LE(r.cost, best * 1.05) << seed;
    EXPECT_GE(r.cost, best * (1 - 1e-12));
  }
}

TEST(Stochastic, DeterministicAndLogMonotone) {
  const auto p = make_planted(2, 16, 40, 4, 2.0, 3);
  const auto a = select_stochastic(p.m, library_job(p.m, 4, Method::kStochastic, 17));
  const auto b = select_stochastic(p.m, library_job(p.m, 4, Method::kStochastic, 17));
  EXPECT_EQ(a.chosen, b.chosen);
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_EQ(a.evaluations, b.evaluations);
  ASSERT_FALSE(a.log.empty());
  for (std::size_t i = 1; i < a.log.size(); ++i) {
    EXPECT_LE(a.log[i].best_cost, a.log[i - 1].best_cost);
    EXPECT_GE(a.log[i].evaluations, a.log[i - 1].evaluations);
  }
  EXPECT_DOUBLE_EQ(a.log.back().best_cost, a.cost);
  EXPECT_EQ(a.chosen.indices(), p.cols);
}

TEST(Stochastic, FleetObjectiveMatchesExhaustive) {
  const auto p = make_planted(3, 4, 12, 2, 2.0, 5);
  SelectionJob job = library_job(p.m, 2, Method::kExhaustive);
  FleetSpec f;
  for (const auto& d : p.syn.dataset.devices()) f.device_quantity[d.name] = 2;
  for (const auto& e : p.m.environments()) f.input_quantity[e.input] = 1;
  job.objective = Objective::fleet_rate(f);
  const auto ex = select_exhaustive(p.m, job);
  job.method = Method::kStochastic;
  const auto st = select_stochastic(p.m, job);
  EXPECT_NEAR(st.cost, ex.cost, 1e-12 * ex.cost);
  EXPECT_NEAR(1.0 / st.cost, fleet_rate(p.m, st.chosen, f, job.scope), 1e-12 / st.cost);
}

TEST(KMeans, KappaOneIsArgminOfMean) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(9, 7, seed)));
    const Rows rows = testing::slowdown_rows(m);
    std::size_t best = 0;
    double best_mean = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < 7; ++v) {
      double s = 0;
      for (const auto& r : rows) s += r[v];
      if (s / 9 < best_mean) best_mean = s / 9, best = v;
    }
    const auto r = select_kmeans(m, library_job(m, 1, Method::kKMeans, seed));
    EXPECT_EQ(r.chosen.indices(), (std::vector<std::size_t>{best}));
    EXPECT_EQ(r.groups, std::optional<std::size_t>(1));
  }
}

TEST(KMeans, RecoversWellSeparatedPlantedSet) {
  std::size_t hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = make_planted(2, 16, 20, 2, 10.0, seed);
    const auto r = select_kmeans(p.m, library_job(p.m, 2, Method::kKMeans, seed));
    hits += r.chosen.indices() == p.cols;
  }
  EXPECT_GE(hits, 18u);
}

TEST(KMeans, WcssNonIncreasingAndRepairsEmptyClusters) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Rows rows = testing::random_rows(40, 5, seed);
    std::vector<double> points;
    for (const auto& r : rows) points.insert(points.end(), r.begin(), r.end());
    const KMeansFit fit = kmeans_fit(points, 5, 6, seed, 300);
    ASSERT_FALSE(fit.wcss_history.empty());
    for (std::size_t i = 1; i < fit.wcss_history.size(); ++i) {
      EXPECT_LE(fit.wcss_history[i], fit.wcss_history[i - 1] * (1 + 1e-12));
    }
    std::vector<std::size_t> sizes(6, 0);
    for (std::size_t a : fit.assignment) ++sizes[a];
    for (std::size_t s : sizes) EXPECT_GT(s, 0u);
  }
  // Duplicate points: k-means++ cannot find distinct seeds, repair keeps k clusters non-empty.
  std::vector<double> dup = {1, 1, 1, 1, 1, 1, 5, 5};
  const KMeansFit fit = kmeans_fit(dup, 2, 3, 0, 50);
  EXPECT_EQ(fit.assignment.size(), 4u);
}

TEST(KMeans, NeedsKappaEnvironments) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(2, 5, 0)));
  EXPECT_THROW(select_kmeans(m, library_job(m, 3, Method::kKMeans)), PreconditionError);
}

TEST(Tree, KappaOneMatchesKMeans) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(9, 7, seed)));
    EXPECT_EQ(select_tree(m, library_job(m, 1, Method::kDecisionTree)).chosen,
              select_kmeans(m, library_job(m, 1, Method::kKMeans, seed)).chosen);
  }
}

TEST(Tree, FirstSplitSeparatesPlantedBlocksOnM) {
  SyntheticSpec spec = testing::planted_spec(1, 0, 10, 2, 3.0);
  spec.grid = {512, 1024};
  const auto syn = generate_synthetic(spec, 4);
  const auto m = build_slowdown_matrix(syn.dataset);
  std::vector<double> targets;
  for (std::size_t e = 0; e < m.rows(); ++e) targets.insert(targets.end(), m.row(e).begin(), m.row(e).end());
  const auto fit = fit_regression_tree(targets, m.cols(), default_features(m.environments()), 2);
  ASSERT_EQ(fit.splits.size(), 1u);
  EXPECT_EQ(fit.splits[0].feature, 0u);
  EXPECT_DOUBLE_EQ(fit.splits[0].threshold, 768.0);
  const auto r = select_tree(m, library_job(m, 2, Method::kDecisionTree));
  EXPECT_EQ(r.chosen.indices(), testing::planted_columns(syn, m));
}

TEST(Tree, SseStrictlyDecreasesPerSplit) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticSpec spec;
    spec.structure = SyntheticStructure::kLatent;
    spec.devices = 3;
    spec.inputs = 20;
    spec.variants = 30;
    const auto m = build_slowdown_matrix(generate_synthetic(spec, seed).dataset);
    std::vector<double> targets;
    for (std::size_t e = 0; e < m.rows(); ++e) targets.insert(targets.end(), m.row(e).begin(), m.row(e).end());
    const auto fit = fit_regression_tree(targets, m.cols(), default_features(m.environments()), 12);
    double prev = fit.root_sse;
    for (const auto& s : fit.splits) {
      EXPECT_DOUBLE_EQ(s.sse_before, prev);
      EXPECT_LT(s.sse_after, s.sse_before);
      prev = s.sse_after;
    }
    std::size_t covered = 0;
    for (const auto& l : fit.leaves) covered += l.size();
    EXPECT_EQ(covered, m.rows());
  }
}

TEST(Tree, IdenticalRowsStopSplitting) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows({{1, 2}, {1, 2}, {1, 2}}));
  const auto r = select_tree(m, library_job(m, 2, Method::kDecisionTree));
  EXPECT_EQ(r.groups, std::optional<std::size_t>(1));
  EXPECT_EQ(r.chosen.size(), 1u);
}

TEST(Selection, ResultsAreConsistentAcrossMethods) {
  const auto p = make_planted(2, 8, 15, 3, 2.0, 21);
  for (Method method : {Method::kExhaustive, Method::kStochastic, Method::kKMeans, Method::kDecisionTree}) {
    const auto job = library_job(p.m, 3, method, 5);
    const auto r = select(p.m, job);
    EXPECT_LE(r.chosen.size(), 3u);
    EXPECT_EQ(r.method, method);
    // Reported cost is the objective recomputed on the chosen set.
    EXPECT_DOUBLE_EQ(r.cost, library_cost(p.m, r.chosen, job.scope));
    // Dispatch returns the best member, never a variant outside the set.
    for (std::size_t e : job.scope) {
      const std::size_t v = dispatch(r, p.m.environments()[e]);
      EXPECT_TRUE(r.chosen.contains(v));
      for (std::size_t u : r.chosen) EXPECT_LE(p.m.value(e, v), p.m.value(e, u));
    }
  }
}

TEST(Selection, DispatchUnknownEnvironment) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows({{1, 2}, {2, 1}}));
  SelectionJob job = library_job(m, 1, Method::kExhaustive);
  job.scope = {0};
  const auto r = select(m, job);
  EXPECT_EQ(dispatch(r, m.environments()[0]), 0u);
  EXPECT_THROW(dispatch(r, m.environments()[1]), NoMappingError);
  EXPECT_THROW(dispatch(r, Environment{"nowhere", {1, 1, 1}}), NoMappingError);
}

TEST(Selection, NeverPicksVariantsUnmeasuredInScope) {
  // Column 2 is measured only on the last row, which is out of scope. With a
  // penalty of 1 it would look perfect, so the pool has to skip it.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto m = build_slowdown_matrix(
      testing::dataset_from_rows({{1, 4, nan, 3}, {4, 1, nan, 3}, {5, 5, nan, 1}, {2, 2, nan, 2}, {9, 9, 1, 9}}),
      PenaltyPolicy::explicit_value(1.0));
  for (Method method : {Method::kExhaustive, Method::kStochastic, Method::kKMeans, Method::kDecisionTree}) {
    for (std::size_t k = 1; k <= 3; ++k) {
      SelectionJob job = library_job(m, k, method, k);
      job.scope = {0, 1, 2, 3};
      const auto r = select(m, job);
      EXPECT_FALSE(r.chosen.contains(2)) << to_string(method) << " k=" << k;
    }
  }
}

TEST(Selection, JobValidation) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows({{1, 2}}));
  EXPECT_THROW(select(m, library_job(m, 0, Method::kExhaustive)), PreconditionError);
  EXPECT_THROW(select(m, library_job(m, 3, Method::kStochastic)), PreconditionError);
  SelectionJob job = library_job(m, 1, Method::kExhaustive);
  job.scope.clear();
  EXPECT_THROW(select(m, job), PreconditionError);
  job = library_job(m, 1, Method::kExhaustive);
  job.objective.kind = ObjectiveKind::kFleetRate;
  EXPECT_THROW(select(m, job), PreconditionError);
}

TEST(Selection, WorksThroughCountingMatrix) {
  const auto p = make_planted(2, 8, 12, 2, 2.0, 2);
  const CountingMatrix counted(p.m);
  SelectionJob job = library_job(p.m, 2, Method::kStochastic);
  job.scope = filter_scope(p.m, {"dev00"});
  const auto r = select(counted, job);
  EXPECT_GT(counted.total_reads(), 0u);
  for (std::size_t e : filter_scope(p.m, {"dev01"})) EXPECT_EQ(counted.reads(e), 0u);
  (void)r;
}

}  // namespace
}  // namespace portune
