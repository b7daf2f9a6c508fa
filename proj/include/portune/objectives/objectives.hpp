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
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "portune/core/error.hpp"
#include "portune/core/types.hpp"
#include "portune/dataset/slowdown_matrix.hpp"

namespace portune {

// Row indices into a slowdown table.
using Scope = std::vector<std::size_t>;

template <SlowdownTable Table>
Scope full_scope(const Table& table) {
  Scope s(table.rows());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i;
  return s;
}

// Rows whose device is in `devices` (all devices if empty) and whose input is in
// `inputs` (all inputs if empty).
template <SlowdownTable Table>
Scope filter_scope(const Table& table, const std::set<std::string>& devices,
                   const std::set<KernelInput>& inputs = {}) {
  Scope s;
  const auto& envs = table.environments();
  for (std::size_t i = 0; i < envs.size(); ++i) {
    if (!devices.empty() && devices.count(envs[i].device) == 0) continue;
    if (!inputs.empty() && inputs.count(envs[i].input) == 0) continue;
    s.push_back(i);
  }
  return s;
}

template <SlowdownTable Table>
Scope scope_of(const Table& table, std::span<const Environment> envs) {
  Scope s;
  for (const Environment& e : envs) {
    const auto idx = table.index_of(e);
    if (!idx) throw ScopeError("environment " + e.to_string() + " not in matrix");
    s.push_back(*idx);
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

// A set of variant (column) indices; kept sorted and unique.
class CandidateSet {
 public:
  CandidateSet() = default;
  explicit CandidateSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
      throw PreconditionError("candidate set has duplicate variant indices");
    }
  }
  CandidateSet(std::initializer_list<std::size_t> indices) : CandidateSet(std::vector<std::size_t>(indices)) {}

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t v) const { return std::binary_search(indices_.begin(), indices_.end(), v); }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  void check(std::size_t cols) const {
    if (indices_.empty()) throw PreconditionError("candidate set is empty");
    if (indices_.back() >= cols) {
      throw PreconditionError("variant index " + std::to_string(indices_.back()) + " out of range");
    }
  }

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
  friend auto operator<=>(const CandidateSet&, const CandidateSet&) = default;

 private:
  std::vector<std::size_t> indices_;
};

// Per-device and per-input multiplicities for fleet objectives.
struct FleetSpec {
  std::map<std::string, double> device_quantity;
  std::map<KernelInput, double> input_quantity;

  friend bool operator==(const FleetSpec&, const FleetSpec&) = default;
};

// {"devices": {"Vega": 3}, "inputs": {"512x1024x256": 1}}
inline FleetSpec fleet_from_json(const nlohmann::json& doc) {
  FleetSpec f;
  try {
    for (const auto& [name, q] : doc.at("devices").items()) {
      const double v = q.get<double>();
      if (!(v > 0.0) || !std::isfinite(v)) throw Error("fleet quantity for device '" + name + "' must be > 0");
      f.device_quantity[name] = v;
    }
    for (const auto& [key, q] : doc.at("inputs").items()) {
      const double v = q.get<double>();
      if (!(v > 0.0) || !std::isfinite(v)) throw Error("fleet quantity for input '" + key + "' must be > 0");
      f.input_quantity[KernelInput::parse(key)] = v;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed fleet spec: ") + e.what());
  }
  return f;
}

inline FleetSpec read_fleet(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("unparseable fleet spec: ") + e.what());
  }
  return fleet_from_json(doc);
}

inline nlohmann::ordered_json to_json(const FleetSpec& f) {
  nlohmann::ordered_json doc;
  doc["devices"] = nlohmann::ordered_json::object();
  for (const auto& [name, q] : f.device_quantity) doc["devices"][name] = q;
  doc["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [in, q] : f.input_quantity) doc["inputs"][in.key()] = q;
  return doc;
}

enum class ObjectiveKind { kLibraryGeomean, kFleetRate };

inline std::string_view to_string(ObjectiveKind k) {
  return k == ObjectiveKind::kFleetRate ? "fleet" : "library";
}

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kLibraryGeomean;
  std::optional<FleetSpec> fleet;

  static Objective library() { return {}; }
  static Objective fleet_rate(FleetSpec spec) { return {ObjectiveKind::kFleetRate, std::move(spec)}; }
};

namespace objective_detail {

inline void check_scope(const Scope& scope, std::size_t rows) {
  if (scope.empty()) throw PreconditionError("objective scope is empty");
  for (std::size_t e : scope) {
    if (e >= rows) throw ScopeError("scope row " + std::to_string(e) + " out of range");
  }
}

}  // namespace objective_detail

// Geometric mean over the scope of each environment's best slowdown within the set.
template <SlowdownTable Table>
double library_cost(const Table& table, const CandidateSet& set, const Scope& scope) {
  objective_detail::check_scope(scope, table.rows());
  set.check(table.cols());
  double log_sum = 0.0;
  for (std::size_t e : scope) {
    const auto row = table.row(e);
    double best = row[set.indices().front()];
    for (std::size_t v : set) best = std::min(best, row[v]);
    log_sum += std::log(best);
  }
  return std::exp(log_sum / static_cast<double>(scope.size()));
}

// Tasks per millisecond: sum over devices of quantity(d) divided by that device's
// time for one task, a pass over its in-scope inputs each weighted by quantity(i).
// Absolute runtimes are used; unmeasured cells cost penalty * oracle.
template <SlowdownTable Table>
double fleet_rate(const Table& table, const CandidateSet& set, const FleetSpec& fleet, const Scope& scope) {
  objective_detail::check_scope(scope, table.rows());
  set.check(table.cols());
  const auto& envs = table.environments();
  std::map<std::string, double> task_ms;
  for (std::size_t e : scope) {
    const Environment& env = envs[e];
    auto qi = fleet.input_quantity.find(env.input);
    if (qi == fleet.input_quantity.end()) throw ScopeError("fleet spec missing input " + env.input.key());
    if (fleet.device_quantity.count(env.device) == 0) {
      throw ScopeError("fleet spec missing device '" + env.device + "'");
    }
    const auto row = table.runtime_row(e);
    double best = row[set.indices().front()];
    for (std::size_t v : set) best = std::min(best, row[v]);
    task_ms[env.device] += best * qi->second;
  }
  double rate = 0.0;
  for (const auto& [device, ms] : task_ms) rate += fleet.device_quantity.at(device) / ms;
  return rate;
}

// Minimization-oriented scalar consumed by every selector.
template <SlowdownTable Table>
double cost(const Objective& objective, const Table& table, const CandidateSet& set, const Scope& scope) {
  if (objective.kind == ObjectiveKind::kLibraryGeomean) return library_cost(table, set, scope);
  if (!objective.fleet) throw PreconditionError("fleet objective requires a fleet spec");
  return 1.0 / fleet_rate(table, set, *objective.fleet, scope);
}

// Best member of the set per scope row (lowest slowdown, ties to the lowest index).
template <SlowdownTable Table>
std::vector<std::size_t> best_members(const Table& table, const CandidateSet& set, const Scope& scope) {
  set.check(table.cols());
  std::vector<std::size_t> out;
  out.reserve(scope.size());
  for (std::size_t e : scope) {
    const auto row = table.row(e);
    std::size_t best = set.indices().front();
    for (std::size_t v : set) {
      if (row[v] < row[best]) best = v;
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace portune
