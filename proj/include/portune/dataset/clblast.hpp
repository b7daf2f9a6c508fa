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
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "portune/core/error.hpp"
#include "portune/core/types.hpp"
#include "portune/dataset/dataset.hpp"

namespace portune {

struct ClblastOptions {
  // Sections whose "kernel_family" differs are ignored (not counted as warnings).
  std::string kernel_family = "xgemm";
  // Empty keeps every precision.
  std::string precision = "32";
  // A section must carry at least one of these, non-empty, to be kept. Older
  // library versions did not record driver information.
  std::vector<std::string> driver_keys = {"device_driver", "clblast_device_architecture"};
  // Parameter names dropped before ordering the remaining ones alphabetically.
  std::set<std::string> ignored_parameters = {"PRECISION"};
};

struct ClblastWarnings {
  std::size_t missing_driver = 0;
  std::size_t missing_input = 0;
  std::size_t duplicate_device = 0;
  std::size_t arity_mismatch = 0;
  std::size_t bad_results = 0;

  std::size_t total() const {
    return missing_driver + missing_input + duplicate_device + arity_mismatch + bad_results;
  }
};

struct ClblastIngest {
  PerformanceDataset dataset;
  ClblastWarnings warnings;
  std::size_t sections_seen = 0;
};

namespace clblast_detail {

using nlohmann::json;

inline std::optional<std::string> text_field(const json& section, const std::string& key) {
  auto it = section.find(key);
  if (it == section.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  return std::nullopt;
}

inline std::optional<std::uint32_t> dim_field(const json& section, const std::string& key) {
  auto it = section.find(key);
  if (it == section.end()) return std::nullopt;
  if (it->is_number_unsigned() || it->is_number_integer()) {
    const auto v = it->get<std::int64_t>();
    if (v < 1 || v > 0xffffffffll) return std::nullopt;
    return static_cast<std::uint32_t>(v);
  }
  if (it->is_string()) {
    const std::string s = it->get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 10) {
      return std::nullopt;
    }
    const auto v = std::stoull(s);
    if (v < 1 || v > 0xffffffffull) return std::nullopt;
    return static_cast<std::uint32_t>(v);
  }
  return std::nullopt;
}

inline std::optional<ParamConfig> parse_parameters(const json& params, const ClblastOptions& opts) {
  std::vector<std::uint32_t> values;
  if (params.is_object()) {
    std::map<std::string, const json*> sorted;
    for (auto it = params.begin(); it != params.end(); ++it) {
      if (opts.ignored_parameters.count(it.key()) == 0) sorted.emplace(it.key(), &it.value());
    }
    for (const auto& [name, v] : sorted) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < 0) return std::nullopt;
      values.push_back(static_cast<std::uint32_t>(v->get<std::int64_t>()));
    }
  } else if (params.is_array()) {
    for (const json& v : params) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) return std::nullopt;
      values.push_back(static_cast<std::uint32_t>(v.get<std::int64_t>()));
    }
  } else {
    return std::nullopt;
  }
  if (values.empty()) return std::nullopt;
  return ParamConfig(std::move(values));
}

}  // namespace clblast_detail

// Adapter for the crowdsourced tuning database: {"sections": [...]} where each
// section describes one device/kernel-family run with "results":
// [{"parameters": {...}, "time": ms}]. A bare array of sections, or a single
// section object, is accepted too. Each device contributes the single input
// environment of its first surviving section.
inline ClblastIngest ingest_clblast_db(std::istream& source, const ClblastOptions& opts = {}) {
  using clblast_detail::json;
  json doc;
  try {
    source >> doc;
  } catch (const json::exception& e) {
    throw IngestError(std::string("unparseable JSON: ") + e.what());
  }
  std::vector<const json*> sections;
  if (doc.is_object() && doc.contains("sections") && doc["sections"].is_array()) {
    for (const json& s : doc["sections"]) sections.push_back(&s);
  } else if (doc.is_array()) {
    for (const json& s : doc) sections.push_back(&s);
  } else if (doc.is_object() && doc.contains("results")) {
    sections.push_back(&doc);
  } else {
    throw IngestError("unrecognized database layout (expected \"sections\")");
  }

  struct Candidate {
    DeviceId device;
    KernelInput input;
    std::vector<std::pair<ParamConfig, double>> results;
  };
  ClblastWarnings warnings;
  std::vector<Candidate> candidates;
  std::set<std::string> seen_devices;
  std::size_t seen = 0;
  for (const json* sp : sections) {
    const json& s = *sp;
    if (!s.is_object()) continue;
    const auto family = clblast_detail::text_field(s, "kernel_family");
    if (!opts.kernel_family.empty() && family.value_or("") != opts.kernel_family) continue;
    const auto precision = clblast_detail::text_field(s, "precision");
    if (!opts.precision.empty() && precision && *precision != opts.precision) continue;
    ++seen;

    const bool has_driver = std::any_of(opts.driver_keys.begin(), opts.driver_keys.end(), [&](const auto& key) {
      const auto v = clblast_detail::text_field(s, key);
      return v && !v->empty();
    });
    if (!has_driver) {
      ++warnings.missing_driver;
      continue;
    }
    auto name = clblast_detail::text_field(s, "clblast_device_name");
    if (!name || name->empty()) name = clblast_detail::text_field(s, "device");
    if (!name || name->empty()) {
      ++warnings.bad_results;
      continue;
    }
    const auto m = clblast_detail::dim_field(s, "arg_m");
    const auto n = clblast_detail::dim_field(s, "arg_n");
    const auto k = clblast_detail::dim_field(s, "arg_k");
    if (!m || !n || !k) {
      ++warnings.missing_input;
      continue;
    }
    if (seen_devices.count(*name) != 0) {
      ++warnings.duplicate_device;
      continue;
    }
    Candidate c;
    c.device.name = *name;
    c.device.vendor = clblast_detail::text_field(s, "clblast_device_vendor");
    if (!c.device.vendor) c.device.vendor = clblast_detail::text_field(s, "device_vendor");
    if (const auto units = clblast_detail::dim_field(s, "device_compute_units")) {
      c.device.compute_units = static_cast<int>(*units);
    }
    c.input = {*m, *n, *k};
    auto results = s.find("results");
    if (results == s.end() || !results->is_array()) {
      ++warnings.bad_results;
      continue;
    }
    for (const json& r : *results) {
      if (!r.is_object() || !r.contains("parameters") || !r.contains("time") || !r["time"].is_number()) {
        ++warnings.bad_results;
        continue;
      }
      const double t = r["time"].get<double>();
      auto config = clblast_detail::parse_parameters(r["parameters"], opts);
      if (!config || !(t > 0.0) || !std::isfinite(t)) {
        ++warnings.bad_results;
        continue;
      }
      c.results.emplace_back(std::move(*config), t);
    }
    if (c.results.empty()) {
      ++warnings.bad_results;
      continue;
    }
    seen_devices.insert(c.device.name);
    candidates.push_back(std::move(c));
  }

  // Keep the most common arity; ties go to the larger.
  std::map<std::size_t, std::size_t> arity_votes;
  for (const Candidate& c : candidates) {
    for (const auto& [cfg, t] : c.results) ++arity_votes[cfg.arity()];
  }
  std::size_t arity = 0;
  std::size_t best_votes = 0;
  for (const auto& [a, votes] : arity_votes) {
    if (votes >= best_votes) {
      arity = a;
      best_votes = votes;
    }
  }

  std::vector<TuningRecord> records;
  std::vector<DeviceId> devices;
  for (Candidate& c : candidates) {
    bool any = false;
    for (auto& [cfg, t] : c.results) {
      if (cfg.arity() != arity) {
        ++warnings.arity_mismatch;
        continue;
      }
      records.push_back(TuningRecord{Environment{c.device.name, c.input}, std::move(cfg), t, std::nullopt});
      any = true;
    }
    if (any) devices.push_back(std::move(c.device));
  }
  if (records.empty()) throw IngestError("zero devices survived pruning");
  return ClblastIngest{PerformanceDataset(std::move(records), arity, std::move(devices), TimingStatistic::kMinimum),
                       warnings, seen};
}

}  // namespace portune
