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

// Shared builders for the unit tests.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "portune/dataset/dataset.hpp"
#include "portune/dataset/slowdown_matrix.hpp"
#include "portune/dataset/synthetic.hpp"
#include "oracles.hpp"

namespace portune::testing {

// Runtime table to dataset. Row e becomes environment envs[e]; column v
// becomes config (v). NaN marks an unmeasured cell.
inline PerformanceDataset dataset_from_rows(const Rows& runtimes, const std::vector<Environment>& envs) {
  std::vector<TuningRecord> records;
  for (std::size_t e = 0; e < runtimes.size(); ++e) {
    for (std::size_t v = 0; v < runtimes[e].size(); ++v) {
      if (std::isnan(runtimes[e][v])) continue;
      records.push_back({envs[e], ParamConfig{static_cast<std::uint32_t>(v)}, runtimes[e][v], std::nullopt});
    }
  }
  return PerformanceDataset(std::move(records), 1);
}

// One device, environments dev@(e+1)x1x1 in row order.
inline PerformanceDataset dataset_from_rows(const Rows& runtimes) {
  std::vector<Environment> envs;
  for (std::size_t e = 0; e < runtimes.size(); ++e) {
    envs.push_back({"dev", {static_cast<std::uint32_t>(e + 1), 1, 1}});
  }
  return dataset_from_rows(runtimes, envs);
}

inline Rows random_rows(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = 1.0, double hi = 10.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Rows out(rows, std::vector<double>(cols));
  for (auto& r : out)
    for (double& x : r) x = dist(gen);
  return out;
}

inline Rows slowdown_rows(const SlowdownMatrix& m) {
  Rows out;
  for (std::size_t e = 0; e < m.rows(); ++e) out.emplace_back(m.row(e).begin(), m.row(e).end());
  return out;
}

inline SyntheticSpec planted_spec(std::size_t devices, std::size_t inputs, std::size_t variants, std::size_t g,
                                  double gap) {
  SyntheticSpec spec;
  spec.devices = devices;
  spec.inputs = inputs;
  spec.variants = variants;
  spec.planted = g;
  spec.gap = gap;
  return spec;
}

inline std::vector<std::size_t> planted_columns(const SyntheticDataset& syn, const SlowdownMatrix& m) {
  std::vector<std::size_t> out;
  for (const ParamConfig& c : syn.planted) out.push_back(*m.variant_index(c));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace portune::testing
