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
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/core/random.hpp"
#include "portune/core/types.hpp"
#include "portune/dataset/dataset.hpp"

namespace portune {

// The 64-point GEMM shape grid (each of M, N, K from the same value list).
inline std::vector<KernelInput> grid_inputs(const std::vector<std::uint32_t>& values = {256, 512, 1024, 4096}) {
  std::vector<KernelInput> out;
  for (auto m : values)
    for (auto n : values)
      for (auto k : values) out.push_back({m, n, k});
  std::sort(out.begin(), out.end());
  return out;
}

// How planted blocks partition the environments.
enum class BlockRule {
  kInputM,            // contiguous chunks of the distinct M values
  kDevice,            // contiguous chunks of devices
  kEnvironmentIndex,  // contiguous chunks of the sorted environment list
};

enum class SyntheticStructure {
  // g specialists, each exactly optimal on its own block; everything else is
  // at least `gap` slower. The specialist set is the unique cost-1 set of size g.
  kPlanted,
  // Smooth performance landscape: environments and variants live in a small
  // latent space and slowdown grows with distance to a variant's sweet spot.
  kLatent,
};

struct SyntheticSpec {
  SyntheticStructure structure = SyntheticStructure::kPlanted;
  std::size_t devices = 2;
  std::vector<std::uint32_t> grid = {256, 512, 1024, 4096};
  // 0 takes the full grid; otherwise an evenly strided subset of it.
  std::size_t inputs = 0;
  std::size_t variants = 10;
  std::size_t param_arity = 16;

  // kPlanted
  std::size_t planted = 2;
  double gap = 2.0;
  double spread = 1.5;       // non-specialist block profile in [gap, gap * spread]
  double cell_noise = 0.05;  // per-cell multiplicative jitter on top of the profile
  BlockRule blocks = BlockRule::kInputM;

  // kLatent
  double device_spread = 1.0;
  double input_weight = 0.35;
  double sharpness = 1.0;
  double quality_spread = 0.3;

  // Fraction of non-oracle cells dropped, for sparse-data tests.
  double missing_fraction = 0.0;
};

struct SyntheticDataset {
  PerformanceDataset dataset;
  std::vector<ParamConfig> planted;           // empty for kLatent
  std::map<Environment, std::size_t> block;   // planted block per environment
};

namespace synthetic_detail {

inline std::vector<ParamConfig> make_configs(std::size_t count, std::size_t arity, Rng& rng) {
  static constexpr std::array<std::uint32_t, 9> kLevels = {0, 1, 2, 4, 8, 16, 32, 64, 128};
  std::set<ParamConfig> seen;
  std::vector<ParamConfig> out;
  while (out.size() < count) {
    std::vector<std::uint32_t> v(arity);
    for (auto& x : v) x = kLevels[rng.below(kLevels.size())];
    ParamConfig c(std::move(v));
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<std::size_t> chunk_of(std::size_t items, std::size_t chunks) {
  std::vector<std::size_t> out(items);
  for (std::size_t i = 0; i < items; ++i) out[i] = i * chunks / items;
  return out;
}

}  // namespace synthetic_detail

inline SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.devices == 0) throw Error("synthetic spec needs at least one device");
  if (spec.variants == 0) throw Error("synthetic spec needs at least one variant");
  if (spec.param_arity == 0) throw Error("synthetic spec needs a positive parameter arity");
  if (spec.grid.empty()) throw Error("synthetic spec needs a non-empty input grid");
  if (!(spec.missing_fraction >= 0.0 && spec.missing_fraction < 1.0)) {
    throw Error("missing fraction must be in [0, 1)");
  }
  const bool planted = spec.structure == SyntheticStructure::kPlanted;
  if (planted) {
    if (!(spec.gap > 1.0)) throw Error("planted gap must be > 1");
    if (spec.planted == 0) throw Error("planted variant count must be >= 1");
    if (spec.variants < spec.planted) throw Error("variant count must be >= planted count");
    if (!(spec.spread >= 1.0) || !(spec.cell_noise >= 0.0)) throw Error("spread must be >= 1 and noise >= 0");
  }

  Rng rng(seed);
  std::vector<KernelInput> all = grid_inputs(spec.grid);
  std::vector<KernelInput> inputs;
  if (spec.inputs == 0 || spec.inputs >= all.size()) {
    inputs = all;
  } else {
    for (std::size_t i = 0; i < spec.inputs; ++i) inputs.push_back(all[i * all.size() / spec.inputs]);
  }

  std::vector<DeviceId> devices;
  std::vector<double> throughput;  // GFLOP/s
  for (std::size_t d = 0; d < spec.devices; ++d) {
    char name[16];
    std::snprintf(name, sizeof(name), "dev%02zu", d);
    devices.push_back({name, std::string("synthetic"), static_cast<int>(8 + rng.below(57))});
    throughput.push_back(rng.uniform(50.0, 500.0));
  }

  std::vector<Environment> envs;
  std::vector<std::size_t> env_device;
  for (std::size_t d = 0; d < devices.size(); ++d) {
    for (const KernelInput& in : inputs) {
      envs.push_back({devices[d].name, in});
      env_device.push_back(d);
    }
  }
  std::vector<double> base_ms(envs.size());
  for (std::size_t e = 0; e < envs.size(); ++e) {
    const KernelInput& in = envs[e].input;
    const double flops = 2.0 * in.m * static_cast<double>(in.n) * in.k;
    base_ms[e] = flops / (throughput[env_device[e]] * 1e9) * 1e3 * rng.uniform(0.9, 1.1);
  }

  std::vector<ParamConfig> configs = synthetic_detail::make_configs(spec.variants, spec.param_arity, rng);
  std::vector<double> slow(envs.size() * spec.variants, 1.0);
  std::vector<std::size_t> block(envs.size(), 0);
  std::vector<std::size_t> specialist_of_block;

  if (planted) {
    const std::size_t g = spec.planted;
    switch (spec.blocks) {
      case BlockRule::kInputM: {
        std::vector<std::uint32_t> ms;
        for (const KernelInput& in : inputs) ms.push_back(in.m);
        std::sort(ms.begin(), ms.end());
        ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
        if (ms.size() < g) throw Error("fewer distinct M values than planted blocks");
        const auto chunk = synthetic_detail::chunk_of(ms.size(), g);
        for (std::size_t e = 0; e < envs.size(); ++e) {
          const auto pos = std::lower_bound(ms.begin(), ms.end(), envs[e].input.m) - ms.begin();
          block[e] = chunk[static_cast<std::size_t>(pos)];
        }
        break;
      }
      case BlockRule::kDevice: {
        if (devices.size() < g) throw Error("fewer devices than planted blocks");
        const auto chunk = synthetic_detail::chunk_of(devices.size(), g);
        for (std::size_t e = 0; e < envs.size(); ++e) block[e] = chunk[env_device[e]];
        break;
      }
      case BlockRule::kEnvironmentIndex: {
        if (envs.size() < g) throw Error("fewer environments than planted blocks");
        std::vector<std::size_t> order(envs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return envs[a] < envs[b]; });
        const auto chunk = synthetic_detail::chunk_of(envs.size(), g);
        for (std::size_t i = 0; i < order.size(); ++i) block[order[i]] = chunk[i];
        break;
      }
    }
    // Partial Fisher-Yates for the specialist columns.
    std::vector<std::size_t> perm(spec.variants);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = 0; i < g; ++i) std::swap(perm[i], perm[i + rng.below(perm.size() - i)]);
    specialist_of_block.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(g));

    std::vector<double> profile(spec.variants * g);
    for (double& p : profile) p = spec.gap * (1.0 + (spec.spread - 1.0) * rng.uniform());
    for (std::size_t e = 0; e < envs.size(); ++e) {
      for (std::size_t v = 0; v < spec.variants; ++v) {
        slow[e * spec.variants + v] = profile[v * g + block[e]] * (1.0 + spec.cell_noise * rng.uniform());
      }
      slow[e * spec.variants + specialist_of_block[block[e]]] = 1.0;
    }
  } else {
    constexpr std::size_t kDim = 3;
    std::vector<std::array<double, kDim>> dev_pos(devices.size());
    for (auto& p : dev_pos)
      for (double& x : p) x = rng.uniform(-spec.device_spread, spec.device_spread);
    std::vector<std::array<double, kDim>> env_pos(envs.size());
    for (std::size_t e = 0; e < envs.size(); ++e) {
      const KernelInput& in = envs[e].input;
      const double f[kDim] = {std::log2(in.m) - 10.0, std::log2(in.n) - 10.0, std::log2(in.k) - 10.0};
      for (std::size_t i = 0; i < kDim; ++i) env_pos[e][i] = dev_pos[env_device[e]][i] + spec.input_weight * f[i] / 2.0;
    }
    std::vector<double> log_slow(slow.size());
    for (std::size_t v = 0; v < spec.variants; ++v) {
      // Sweet spot near a random environment, with per-variant sharpness and quality.
      const auto& anchor = env_pos[rng.below(envs.size())];
      std::array<double, kDim> spot{};
      for (std::size_t i = 0; i < kDim; ++i) spot[i] = anchor[i] + rng.uniform(-0.5, 0.5) * spec.input_weight;
      const double sharp = spec.sharpness * rng.uniform(0.5, 1.5);
      const double quality = spec.quality_spread * rng.uniform();
      for (std::size_t e = 0; e < envs.size(); ++e) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < kDim; ++i) d2 += (env_pos[e][i] - spot[i]) * (env_pos[e][i] - spot[i]);
        log_slow[e * spec.variants + v] = sharp * d2 + quality + 0.05 * rng.uniform();
      }
    }
    for (std::size_t e = 0; e < envs.size(); ++e) {
      const double* row = log_slow.data() + e * spec.variants;
      const double best = *std::min_element(row, row + spec.variants);
      for (std::size_t v = 0; v < spec.variants; ++v) slow[e * spec.variants + v] = std::exp(row[v] - best);
    }
  }

  std::vector<TuningRecord> records;
  records.reserve(slow.size());
  for (std::size_t e = 0; e < envs.size(); ++e) {
    for (std::size_t v = 0; v < spec.variants; ++v) {
      const double s = slow[e * spec.variants + v];
      // Oracle-tying cells are never dropped, so every row keeps its 1.0.
      if (spec.missing_fraction > 0.0 && s > 1.0 && rng.uniform() < spec.missing_fraction) continue;
      records.push_back({envs[e], configs[v], s == 1.0 ? base_ms[e] : base_ms[e] * s, std::nullopt});
    }
  }

  std::vector<ParamConfig> planted_configs;
  for (std::size_t b : specialist_of_block) planted_configs.push_back(configs[b]);
  std::sort(planted_configs.begin(), planted_configs.end());
  std::map<Environment, std::size_t> block_of;
  if (planted) {
    for (std::size_t e = 0; e < envs.size(); ++e) block_of.emplace(envs[e], block[e]);
  }
  return SyntheticDataset{PerformanceDataset(std::move(records), spec.param_arity, devices, TimingStatistic::kMean),
                          std::move(planted_configs), std::move(block_of)};
}

}  // namespace portune
