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
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/core/types.hpp"
#include "portune/dataset/dataset.hpp"

namespace portune {

// How unmeasured (environment, variant) cells are scored.
struct PenaltyPolicy {
  enum class Kind { kDatasetMax, kExplicit };
  Kind kind = Kind::kDatasetMax;
  double value = 0.0;  // used by kExplicit, must be >= 1

  static PenaltyPolicy dataset_max() { return {}; }
  static PenaltyPolicy explicit_value(double v) { return {Kind::kExplicit, v}; }
};

// Environments x variants slowdown-over-oracle table.
//
// Every valid cell holds runtime / oracle >= 1, and each row has a valid 1.0
// at its oracle variant. Invalid cells hold `penalty()`; their runtime entry is
// penalty * oracle so absolute-time objectives stay defined. Rows follow the
// dataset's environment order and columns its sorted variant order.
class SlowdownMatrix {
 public:
  SlowdownMatrix(std::vector<Environment> environments, std::vector<ParamConfig> variants,
                 std::vector<double> values, std::vector<std::uint8_t> valid, std::vector<double> oracle_ms,
                 double penalty)
      : environments_(std::move(environments)),
        variants_(std::move(variants)),
        values_(std::move(values)),
        valid_(std::move(valid)),
        oracle_ms_(std::move(oracle_ms)),
        penalty_(penalty) {
    const std::size_t cells = environments_.size() * variants_.size();
    if (values_.size() != cells || valid_.size() != cells || oracle_ms_.size() != environments_.size()) {
      throw Error("slowdown matrix shape mismatch");
    }
    if (!(penalty_ >= 1.0)) throw Error("penalty must be >= 1");
    if (!std::is_sorted(environments_.begin(), environments_.end())) {
      throw Error("slowdown matrix environments must be sorted");
    }
    runtime_.resize(cells);
    for (std::size_t e = 0; e < environments_.size(); ++e) {
      for (std::size_t v = 0; v < variants_.size(); ++v) {
        const std::size_t c = e * variants_.size() + v;
        if (!valid_[c]) values_[c] = penalty_;
        runtime_[c] = values_[c] * oracle_ms_[e];
      }
    }
  }

  std::size_t rows() const { return environments_.size(); }
  std::size_t cols() const { return variants_.size(); }
  const std::vector<Environment>& environments() const { return environments_; }
  const std::vector<ParamConfig>& variants() const { return variants_; }
  double penalty() const { return penalty_; }

  std::span<const double> row(std::size_t e) const { return {values_.data() + e * cols(), cols()}; }
  std::span<const std::uint8_t> valid_row(std::size_t e) const { return {valid_.data() + e * cols(), cols()}; }
  std::span<const double> runtime_row(std::size_t e) const { return {runtime_.data() + e * cols(), cols()}; }
  double oracle_ms(std::size_t e) const { return oracle_ms_[e]; }

  double value(std::size_t e, std::size_t v) const { return values_[e * cols() + v]; }
  bool valid(std::size_t e, std::size_t v) const { return valid_[e * cols() + v] != 0; }

  std::optional<std::size_t> index_of(const Environment& env) const {
    auto it = std::lower_bound(environments_.begin(), environments_.end(), env);
    if (it == environments_.end() || *it != env) return std::nullopt;
    return static_cast<std::size_t>(it - environments_.begin());
  }

  std::optional<std::size_t> variant_index(const ParamConfig& config) const {
    auto it = std::lower_bound(variants_.begin(), variants_.end(), config);
    if (it == variants_.end() || *it != config) return std::nullopt;
    return static_cast<std::size_t>(it - variants_.begin());
  }

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
  }

 private:
  std::vector<Environment> environments_;
  std::vector<ParamConfig> variants_;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
  std::vector<double> oracle_ms_;
  std::vector<double> runtime_;
  double penalty_;
};

inline SlowdownMatrix build_slowdown_matrix(const PerformanceDataset& ds,
                                            PenaltyPolicy policy = PenaltyPolicy::dataset_max()) {
  std::vector<Environment> envs = ds.environments();
  const std::vector<ParamConfig>& variants = ds.variants();
  const std::size_t cols = variants.size();
  std::vector<double> values(envs.size() * cols, 0.0);
  std::vector<std::uint8_t> valid(envs.size() * cols, 0);
  std::vector<double> oracle(envs.size());
  double max_slowdown = 1.0;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    const double best = ds.oracle(envs[e]).runtime_ms;
    oracle[e] = best;
    auto recs = ds.records_for(envs[e]);
    std::size_t v = 0;
    // Both the slice and the variant list are sorted by config.
    for (const TuningRecord& r : recs) {
      while (variants[v] != r.config) ++v;
      const double s = r.runtime_ms / best;
      values[e * cols + v] = s;
      valid[e * cols + v] = 1;
      max_slowdown = std::max(max_slowdown, s);
    }
  }
  double penalty = max_slowdown;
  if (policy.kind == PenaltyPolicy::Kind::kExplicit) {
    if (!(policy.value >= 1.0) || !std::isfinite(policy.value)) throw Error("explicit penalty must be >= 1");
    penalty = policy.value;
  }
  return SlowdownMatrix(std::move(envs), variants, std::move(values), std::move(valid), std::move(oracle), penalty);
}

// Read interface shared by SlowdownMatrix and wrappers around it. Selectors
// and objectives are written against this so row reads can be audited.
template <typename T>
concept SlowdownTable = requires(const T& t, std::size_t i, const Environment& env) {
  { t.rows() } -> std::convertible_to<std::size_t>;
  { t.cols() } -> std::convertible_to<std::size_t>;
  { t.environments() } -> std::convertible_to<const std::vector<Environment>&>;
  { t.variants() } -> std::convertible_to<const std::vector<ParamConfig>&>;
  { t.penalty() } -> std::convertible_to<double>;
  { t.row(i) } -> std::convertible_to<std::span<const double>>;
  { t.valid_row(i) } -> std::convertible_to<std::span<const std::uint8_t>>;
  { t.runtime_row(i) } -> std::convertible_to<std::span<const double>>;
  { t.index_of(env) } -> std::convertible_to<std::optional<std::size_t>>;
};

// Counts row reads per environment. Metadata (environment and variant lists,
// penalty) is not counted; only cell data is.
class CountingMatrix {
 public:
  explicit CountingMatrix(const SlowdownMatrix& inner)
      : inner_(&inner), reads_(std::make_unique<std::atomic<std::size_t>[]>(inner.rows())) {
    for (std::size_t i = 0; i < inner.rows(); ++i) reads_[i].store(0);
  }

  std::size_t rows() const { return inner_->rows(); }
  std::size_t cols() const { return inner_->cols(); }
  const std::vector<Environment>& environments() const { return inner_->environments(); }
  const std::vector<ParamConfig>& variants() const { return inner_->variants(); }
  double penalty() const { return inner_->penalty(); }
  std::optional<std::size_t> index_of(const Environment& env) const { return inner_->index_of(env); }

  std::span<const double> row(std::size_t e) const {
    touch(e);
    return inner_->row(e);
  }
  std::span<const std::uint8_t> valid_row(std::size_t e) const {
    touch(e);
    return inner_->valid_row(e);
  }
  std::span<const double> runtime_row(std::size_t e) const {
    touch(e);
    return inner_->runtime_row(e);
  }

  std::size_t reads(std::size_t e) const { return reads_[e].load(); }
  std::size_t total_reads() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < rows(); ++i) total += reads_[i].load();
    return total;
  }
  const SlowdownMatrix& inner() const { return *inner_; }

 private:
  void touch(std::size_t e) const { reads_[e].fetch_add(1, std::memory_order_relaxed); }

  const SlowdownMatrix* inner_;
  std::unique_ptr<std::atomic<std::size_t>[]> reads_;
};

static_assert(SlowdownTable<SlowdownMatrix>);
static_assert(SlowdownTable<CountingMatrix>);

}  // namespace portune
