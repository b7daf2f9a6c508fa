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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/core/types.hpp"

namespace portune {

struct OracleEntry {
  double runtime_ms = 0.0;
  ParamConfig config;
};

// Validated, immutable collection of tuning records.
//
// Records are kept sorted by (environment, config) with at most one record per
// pair; duplicates are collapsed to the minimum runtime at construction. The
// oracle of an environment is its minimum runtime, tied to the lexicographically
// smallest config; the worst is its maximum runtime.
class PerformanceDataset {
 public:
  PerformanceDataset(std::vector<TuningRecord> records, std::size_t param_arity,
                     std::vector<DeviceId> devices = {},
                     TimingStatistic statistic = TimingStatistic::kUnknown)
      : param_arity_(param_arity), statistic_(statistic) {
    if (param_arity_ == 0) throw IngestError("parameter arity must be positive");
    if (records.empty()) throw IngestError("empty dataset");
    for (const TuningRecord& r : records) validate(r);

    std::sort(records.begin(), records.end(), [](const TuningRecord& a, const TuningRecord& b) {
      if (a.env != b.env) return a.env < b.env;
      if (a.config != b.config) return a.config < b.config;
      return a.runtime_ms < b.runtime_ms;
    });
    // Keep the first (fastest) of each equal (env, config) run.
    for (TuningRecord& r : records) {
      if (!records_.empty() && records_.back().env == r.env && records_.back().config == r.config) {
        continue;
      }
      records_.push_back(std::move(r));
    }

    std::set<std::string> seen_devices;
    for (DeviceId& d : devices) {
      if (d.name.empty()) throw IngestError("device name must be non-empty");
      if (!seen_devices.insert(d.name).second) {
        throw IngestError("duplicate device '" + d.name + "'");
      }
      devices_.push_back(std::move(d));
    }
    for (const TuningRecord& r : records_) {
      if (seen_devices.insert(r.env.device).second) devices_.push_back(DeviceId{r.env.device, {}, {}});
    }
    std::sort(devices_.begin(), devices_.end(),
              [](const DeviceId& a, const DeviceId& b) { return a.name < b.name; });

    std::set<ParamConfig> variants;
    for (std::size_t i = 0; i < records_.size();) {
      std::size_t j = i;
      EnvSlice slice{records_[i].env, i, i, {}, 0.0};
      slice.oracle = {records_[i].runtime_ms, records_[i].config};
      slice.worst_ms = records_[i].runtime_ms;
      for (; j < records_.size() && records_[j].env == slice.env; ++j) {
        const TuningRecord& r = records_[j];
        variants.insert(r.config);
        // Configs ascend inside a slice, so strict < keeps the smallest config on ties.
        if (r.runtime_ms < slice.oracle.runtime_ms) slice.oracle = {r.runtime_ms, r.config};
        slice.worst_ms = std::max(slice.worst_ms, r.runtime_ms);
      }
      slice.end = j;
      envs_.push_back(std::move(slice));
      i = j;
    }
    variants_.assign(variants.begin(), variants.end());
  }

  std::span<const TuningRecord> records() const { return records_; }
  std::size_t param_arity() const { return param_arity_; }
  const std::vector<DeviceId>& devices() const { return devices_; }
  TimingStatistic timing_statistic() const { return statistic_; }
  std::size_t num_environments() const { return envs_.size(); }

  // Sorted, unique.
  std::vector<Environment> environments() const {
    std::vector<Environment> out;
    out.reserve(envs_.size());
    for (const EnvSlice& s : envs_) out.push_back(s.env);
    return out;
  }

  // Every config seen anywhere, sorted.
  const std::vector<ParamConfig>& variants() const { return variants_; }

  bool contains(const Environment& env) const { return find(env) != nullptr; }

  std::span<const TuningRecord> records_for(const Environment& env) const {
    const EnvSlice* s = find(env);
    if (s == nullptr) return {};
    return std::span<const TuningRecord>(records_).subspan(s->begin, s->end - s->begin);
  }

  const OracleEntry& oracle(const Environment& env) const { return require(env).oracle; }
  double worst(const Environment& env) const { return require(env).worst_ms; }

  std::optional<double> runtime(const Environment& env, const ParamConfig& config) const {
    auto recs = records_for(env);
    auto it = std::lower_bound(recs.begin(), recs.end(), config,
                               [](const TuningRecord& r, const ParamConfig& c) { return r.config < c; });
    if (it == recs.end() || it->config != config) return std::nullopt;
    return it->runtime_ms;
  }

  // Restriction to records whose device is in `names`.
  PerformanceDataset filter_devices(const std::set<std::string>& names) const {
    std::vector<TuningRecord> kept;
    for (const TuningRecord& r : records_) {
      if (names.count(r.env.device) != 0) kept.push_back(r);
    }
    std::vector<DeviceId> devs;
    for (const DeviceId& d : devices_) {
      if (names.count(d.name) != 0) devs.push_back(d);
    }
    return PerformanceDataset(std::move(kept), param_arity_, std::move(devs), statistic_);
  }

  friend bool operator==(const PerformanceDataset& a, const PerformanceDataset& b) {
    return a.param_arity_ == b.param_arity_ && a.statistic_ == b.statistic_ &&
           a.devices_ == b.devices_ && a.records_ == b.records_;
  }

 private:
  struct EnvSlice {
    Environment env;
    std::size_t begin;
    std::size_t end;
    OracleEntry oracle;
    double worst_ms;
  };

  void validate(const TuningRecord& r) const {
    if (r.env.device.empty()) throw IngestError("device name must be non-empty");
    if (r.env.input.m == 0 || r.env.input.n == 0 || r.env.input.k == 0) {
      throw IngestError("input dimensions must be >= 1 for " + r.env.to_string());
    }
    if (r.config.arity() != param_arity_) {
      throw IngestError("inconsistent parameter arity: expected " + std::to_string(param_arity_) +
                        ", got " + std::to_string(r.config.arity()));
    }
    if (!(r.runtime_ms > 0.0) || !std::isfinite(r.runtime_ms)) {
      throw IngestError("runtime must be positive and finite for " + r.env.to_string());
    }
    if (r.compile_ms && (!(*r.compile_ms > 0.0) || !std::isfinite(*r.compile_ms))) {
      throw IngestError("compile time must be positive and finite for " + r.env.to_string());
    }
  }

  const EnvSlice* find(const Environment& env) const {
    auto it = std::lower_bound(envs_.begin(), envs_.end(), env,
                               [](const EnvSlice& s, const Environment& e) { return s.env < e; });
    if (it == envs_.end() || it->env != env) return nullptr;
    return &*it;
  }

  const EnvSlice& require(const Environment& env) const {
    const EnvSlice* s = find(env);
    if (s == nullptr) throw ScopeError("environment " + env.to_string() + " not in dataset");
    return *s;
  }

  std::vector<TuningRecord> records_;
  std::size_t param_arity_;
  TimingStatistic statistic_;
  std::vector<DeviceId> devices_;
  std::vector<EnvSlice> envs_;
  std::vector<ParamConfig> variants_;
};

// Union of two datasets over disjoint device sets (e.g. a crowdsourced training
// pool plus a locally measured evaluation set).
inline PerformanceDataset merge_datasets(const PerformanceDataset& a, const PerformanceDataset& b) {
  if (a.param_arity() != b.param_arity()) {
    throw IngestError("cannot merge datasets with parameter arity " + std::to_string(a.param_arity()) +
                      " and " + std::to_string(b.param_arity()));
  }
  std::vector<TuningRecord> records(a.records().begin(), a.records().end());
  records.insert(records.end(), b.records().begin(), b.records().end());
  std::vector<DeviceId> devices = a.devices();
  for (const DeviceId& d : b.devices()) {
    for (const DeviceId& e : a.devices()) {
      if (e.name == d.name) throw IngestError("device '" + d.name + "' present in both datasets");
    }
    devices.push_back(d);
  }
  const TimingStatistic stat =
      a.timing_statistic() == b.timing_statistic() ? a.timing_statistic() : TimingStatistic::kUnknown;
  return PerformanceDataset(std::move(records), a.param_arity(), std::move(devices), stat);
}

}  // namespace portune
