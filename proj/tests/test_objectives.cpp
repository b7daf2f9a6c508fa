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
#include <numeric>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "portune/objectives/objectives.hpp"

namespace portune {
namespace {

using testing::Rows;

TEST(LibraryCost, SmallExamples) {
  const auto one = build_slowdown_matrix(testing::dataset_from_rows({{2.0, 4.0}}));
  EXPECT_DOUBLE_EQ(library_cost(one, {0}, full_scope(one)), 1.0);
  EXPECT_DOUBLE_EQ(library_cost(one, {1}, full_scope(one)), 2.0);
  EXPECT_DOUBLE_EQ(library_cost(one, {0, 1}, full_scope(one)), 1.0);

  // Slowdowns 1,4 and 4,1: a single variant scores sqrt(4) = 2.
  const auto two = build_slowdown_matrix(testing::dataset_from_rows({{1.0, 4.0}, {8.0, 2.0}}));
  EXPECT_DOUBLE_EQ(library_cost(two, {0}, full_scope(two)), 2.0);
  EXPECT_DOUBLE_EQ(library_cost(two, {1}, full_scope(two)), 2.0);
  EXPECT_DOUBLE_EQ(library_cost(two, {0, 1}, full_scope(two)), 1.0);
  EXPECT_DOUBLE_EQ(library_cost(two, {1}, Scope{0}), 4.0);
}

TEST(LibraryCost, MatchesBruteForceOnRandomTables) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(3, 4, seed)));
    const Rows rows = testing::slowdown_rows(m);
    for (std::uint32_t mask = 1; mask < 16; ++mask) {
      std::vector<std::size_t> set;
      for (std::size_t v = 0; v < 4; ++v)
        if (mask & (1u << v)) set.push_back(v);
      EXPECT_NEAR(library_cost(m, CandidateSet(set), full_scope(m)), testing::brute_geomean(rows, set), 1e-12);
    }
  }
}

TEST(LibraryCost, Properties) {
  std::mt19937_64 gen(11);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(6, 7, seed)));
    const Scope scope = full_scope(m);
    std::vector<std::size_t> cols(m.cols());
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), gen);
    // Adding a variant never hurts.
    double prev = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> growing;
    for (std::size_t v : cols) {
      growing.push_back(v);
      const double c = library_cost(m, CandidateSet([&] {
                                      auto s = growing;
                                      std::sort(s.begin(), s.end());
                                      return s;
                                    }()),
                                    scope);
      EXPECT_LE(c, prev + 1e-15);
      EXPECT_GE(c, 1.0);
      prev = c;
    }
    EXPECT_DOUBLE_EQ(prev, 1.0);
    // Scope order does not matter.
    Scope shuffled = scope;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const CandidateSet set(std::vector<std::size_t>{std::min(cols[0], cols[1]), std::max(cols[0], cols[1])});
    EXPECT_NEAR(library_cost(m, set, shuffled), library_cost(m, set, scope), 1e-12);
  }
}

TEST(LibraryCost, CostEqualsOneIffEveryOracleCovered) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(5, 6, seed)));
    const Rows rows = testing::slowdown_rows(m);
    for (std::uint32_t mask = 1; mask < 64; ++mask) {
      std::vector<std::size_t> set;
      for (std::size_t v = 0; v < 6; ++v)
        if (mask & (1u << v)) set.push_back(v);
      bool covers = true;
      for (const auto& r : rows) {
        covers &= std::any_of(set.begin(), set.end(), [&](std::size_t v) { return r[v] == 1.0; });
      }
      EXPECT_EQ(library_cost(m, CandidateSet(set), full_scope(m)) == 1.0, covers);
    }
  }
}

TEST(CandidateSet, RejectsDuplicatesAndOutOfRange) {
  EXPECT_THROW(CandidateSet({1, 1}), PreconditionError);
  const auto m = build_slowdown_matrix(testing::dataset_from_rows({{2.0, 4.0}}));
  EXPECT_THROW(library_cost(m, CandidateSet(), full_scope(m)), PreconditionError);
  EXPECT_THROW(library_cost(m, {0}, Scope{}), PreconditionError);
  EXPECT_THROW(library_cost(m, {5}, full_scope(m)), PreconditionError);
  EXPECT_EQ(CandidateSet({3, 1}).indices(), (std::vector<std::size_t>{1, 3}));
}

std::vector<Environment> grid_envs(std::size_t devices, std::size_t inputs) {
  std::vector<Environment> envs;
  for (std::size_t d = 0; d < devices; ++d)
    for (std::size_t i = 0; i < inputs; ++i)
      envs.push_back({"d" + std::to_string(d), {static_cast<std::uint32_t>(i + 1), 1, 1}});
  return envs;
}

FleetSpec uniform_spec(std::size_t devices, std::size_t inputs, double dq = 1.0, double iq = 1.0) {
  FleetSpec f;
  for (std::size_t d = 0; d < devices; ++d) f.device_quantity["d" + std::to_string(d)] = dq;
  for (std::size_t i = 0; i < inputs; ++i) f.input_quantity[{static_cast<std::uint32_t>(i + 1), 1, 1}] = iq;
  return f;
}

TEST(FleetRate, SingleDeviceSingleInput) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows({{2.0, 8.0}}, grid_envs(1, 1)));
  const FleetSpec f = uniform_spec(1, 1);
  EXPECT_DOUBLE_EQ(fleet_rate(m, {0}, f, full_scope(m)), 0.5);
  EXPECT_DOUBLE_EQ(fleet_rate(m, {1}, f, full_scope(m)), 0.125);
  EXPECT_DOUBLE_EQ(cost(Objective::fleet_rate(f), m, {0}, full_scope(m)), 2.0);
  // Lower cost is better under both objectives.
  EXPECT_LT(cost(Objective::fleet_rate(f), m, {0}, full_scope(m)), cost(Objective::fleet_rate(f), m, {1}, full_scope(m)));
  EXPECT_LT(cost(Objective::library(), m, {0}, full_scope(m)), cost(Objective::library(), m, {1}, full_scope(m)));
}

TEST(FleetRate, ScalesWithDeviceQuantities) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(6, 4, seed), grid_envs(2, 3)));
    const FleetSpec f = uniform_spec(2, 3, 1.5, 2.0);
    FleetSpec doubled = f;
    for (auto& [d, q] : doubled.device_quantity) q *= 2.0;
    const CandidateSet set{0, 2};
    EXPECT_NEAR(fleet_rate(m, set, doubled, full_scope(m)), 2.0 * fleet_rate(m, set, f, full_scope(m)), 1e-12);
  }
}

TEST(FleetRate, AgreesWithEventSimulation) {
  std::mt19937_64 gen(5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t devices = 3, inputs = 4;
    const Rows runtimes = testing::random_rows(devices * inputs, 5, seed, 0.5, 20.0);
    const auto m = build_slowdown_matrix(testing::dataset_from_rows(runtimes, grid_envs(devices, inputs)));
    FleetSpec f;
    std::vector<testing::SimDevice> sim(devices);
    std::vector<int> iq(inputs);
    for (auto& q : iq) q = 1 + static_cast<int>(gen() % 4);
    for (std::size_t i = 0; i < inputs; ++i) f.input_quantity[{static_cast<std::uint32_t>(i + 1), 1, 1}] = iq[i];
    const std::vector<std::size_t> set = {1, 3};
    for (std::size_t d = 0; d < devices; ++d) {
      sim[d].copies = 1 + static_cast<int>(gen() % 3);
      f.device_quantity["d" + std::to_string(d)] = sim[d].copies;
      for (std::size_t i = 0; i < inputs; ++i) {
        const auto& row = runtimes[d * inputs + i];
        sim[d].work.push_back({std::min(row[1], row[3]), iq[i]});
      }
    }
    const double simulated = testing::simulate_fleet(sim, 25);
    EXPECT_NEAR(fleet_rate(m, CandidateSet(set), f, full_scope(m)), simulated, 1e-9 * simulated);
  }
}

TEST(FleetRate, MissingFleetEntriesAreScopeErrors) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows({{1.0}, {2.0}}, grid_envs(1, 2)));
  FleetSpec f = uniform_spec(1, 1);
  EXPECT_THROW(fleet_rate(m, {0}, f, full_scope(m)), ScopeError);
  EXPECT_NO_THROW(fleet_rate(m, {0}, f, Scope{0}));
  f = uniform_spec(1, 2);
  f.device_quantity.clear();
  f.device_quantity["other"] = 1;
  EXPECT_THROW(fleet_rate(m, {0}, f, full_scope(m)), ScopeError);
}

TEST(FleetSpec, JsonRoundTrip) {
  std::istringstream in(R"({"devices": {"Vega": 3, "Iris": 1}, "inputs": {"512x1024x256": 2}})");
  const FleetSpec f = read_fleet(in);
  EXPECT_EQ(f.device_quantity.at("Vega"), 3.0);
  EXPECT_EQ(f.input_quantity.at((KernelInput{512, 1024, 256})), 2.0);
  EXPECT_EQ(fleet_from_json(nlohmann::json::parse(to_json(f).dump())), f);
  std::istringstream bad(R"({"devices": {"Vega": 0}, "inputs": {}})");
  EXPECT_THROW(read_fleet(bad), Error);
}

TEST(Scope, FilterByDevicesAndInputs) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows(testing::random_rows(6, 2, 1), grid_envs(2, 3)));
  EXPECT_EQ(filter_scope(m, {"d1"}, {}), (Scope{3, 4, 5}));
  EXPECT_EQ(filter_scope(m, {}, {KernelInput{2, 1, 1}}), (Scope{1, 4}));
  EXPECT_EQ(full_scope(m).size(), 6u);
}

TEST(BestMembers, TiesGoToLowestIndex) {
  const auto m = build_slowdown_matrix(testing::dataset_from_rows({{1.0, 1.0, 3.0}, {5.0, 2.0, 1.0}}));
  EXPECT_EQ(best_members(m, {0, 1, 2}, full_scope(m)), (std::vector<std::size_t>{0, 2}));
}

}  // namespace
}  // namespace portune
