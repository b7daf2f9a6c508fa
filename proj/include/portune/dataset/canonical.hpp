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

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "portune/core/error.hpp"
#include "portune/core/types.hpp"
#include "portune/dataset/dataset.hpp"

namespace portune {

inline constexpr const char* kCanonicalFormat = "portune-dataset";
inline constexpr int kCanonicalVersion = 1;

// Canonical self-describing dataset document:
//
//   {"format": "portune-dataset", "version": 1, "param_arity": 16,
//    "timing_statistic": "mean",
//    "devices": [{"name": "Vega", "vendor": "AMD", "compute_units": 64}],
//    "records": [{"device": "Vega", "m": 512, "n": 1024, "k": 256,
//                 "params": [0, 1, ...], "runtime_ms": 2.03, "compile_ms": 55.1}]}
//
// Records appear in dataset order, so serialization is deterministic.
inline nlohmann::ordered_json to_json(const PerformanceDataset& ds) {
  nlohmann::ordered_json doc;
  doc["format"] = kCanonicalFormat;
  doc["version"] = kCanonicalVersion;
  doc["param_arity"] = ds.param_arity();
  doc["timing_statistic"] = std::string(to_string(ds.timing_statistic()));
  auto& devices = doc["devices"] = nlohmann::ordered_json::array();
  for (const DeviceId& d : ds.devices()) {
    nlohmann::ordered_json j;
    j["name"] = d.name;
    if (d.vendor) j["vendor"] = *d.vendor;
    if (d.compute_units) j["compute_units"] = *d.compute_units;
    devices.push_back(std::move(j));
  }
  auto& records = doc["records"] = nlohmann::ordered_json::array();
  for (const TuningRecord& r : ds.records()) {
    nlohmann::ordered_json j;
    j["device"] = r.env.device;
    j["m"] = r.env.input.m;
    j["n"] = r.env.input.n;
    j["k"] = r.env.input.k;
    j["params"] = r.config.values();
    j["runtime_ms"] = r.runtime_ms;
    if (r.compile_ms) j["compile_ms"] = *r.compile_ms;
    records.push_back(std::move(j));
  }
  return doc;
}

inline PerformanceDataset dataset_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kCanonicalFormat) {
      throw IngestError("not a canonical dataset document");
    }
    if (doc.at("version").get<int>() != kCanonicalVersion) {
      throw IngestError("unsupported canonical dataset version " + doc.at("version").dump());
    }
    const auto arity = doc.at("param_arity").get<std::size_t>();
    const TimingStatistic stat =
        timing_statistic_from_string(doc.value("timing_statistic", std::string("unknown")));
    std::vector<DeviceId> devices;
    for (const auto& j : doc.at("devices")) {
      DeviceId d{j.at("name").get<std::string>(), {}, {}};
      if (j.contains("vendor")) d.vendor = j["vendor"].get<std::string>();
      if (j.contains("compute_units")) d.compute_units = j["compute_units"].get<int>();
      devices.push_back(std::move(d));
    }
    std::vector<TuningRecord> records;
    std::size_t index = 0;
    for (const auto& j : doc.at("records")) {
      ++index;
      TuningRecord r;
      r.env.device = j.at("device").get<std::string>();
      r.env.input = {j.at("m").get<std::uint32_t>(), j.at("n").get<std::uint32_t>(),
                     j.at("k").get<std::uint32_t>()};
      r.config = ParamConfig(j.at("params").get<std::vector<std::uint32_t>>());
      r.runtime_ms = j.at("runtime_ms").get<double>();
      if (j.contains("compile_ms")) r.compile_ms = j["compile_ms"].get<double>();
      if (r.config.arity() != arity) {
        throw IngestError("record " + std::to_string(index) + ": inconsistent parameter arity");
      }
      records.push_back(std::move(r));
    }
    return PerformanceDataset(std::move(records), arity, std::move(devices), stat);
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(std::string("malformed canonical dataset: ") + e.what());
  }
}

inline void write_canonical(std::ostream& out, const PerformanceDataset& ds) {
  out << to_json(ds).dump(1) << '\n';
}

inline PerformanceDataset read_canonical(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(std::string("unparseable JSON: ") + e.what());
  }
  return dataset_from_json(doc);
}

}  // namespace portune
