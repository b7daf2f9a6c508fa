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

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "portune/core/error.hpp"

namespace portune {

struct DeviceId {
  std::string name;
  std::optional<std::string> vendor;
  std::optional<int> compute_units;

  friend bool operator==(const DeviceId&, const DeviceId&) = default;
};

// GEMM problem shape. All dimensions are >= 1.
struct KernelInput {
  std::uint32_t m = 1;
  std::uint32_t n = 1;
  std::uint32_t k = 1;

  friend auto operator<=>(const KernelInput&, const KernelInput&) = default;

  // "MxNxK", the key used by fleet specs and CLI filters.
  std::string key() const {
    return std::to_string(m) + "x" + std::to_string(n) + "x" + std::to_string(k);
  }

  static KernelInput parse(std::string_view text) {
    KernelInput in;
    std::uint32_t* dims[3] = {&in.m, &in.n, &in.k};
    std::size_t pos = 0;
    for (int d = 0; d < 3; ++d) {
      const std::size_t end = d < 2 ? text.find('x', pos) : text.size();
      if (end == std::string_view::npos || end == pos) {
        throw Error("malformed input key '" + std::string(text) + "' (expected MxNxK)");
      }
      std::uint64_t value = 0;
      for (std::size_t i = pos; i < end; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') {
          throw Error("malformed input key '" + std::string(text) + "' (expected MxNxK)");
        }
        value = value * 10 + static_cast<std::uint64_t>(c - '0');
        if (value > 0xffffffffull) throw Error("input dimension out of range in '" + std::string(text) + "'");
      }
      if (value == 0) throw Error("input dimensions must be >= 1 in '" + std::string(text) + "'");
      *dims[d] = static_cast<std::uint32_t>(value);
      pos = end + 1;
    }
    return in;
  }
};

// One tuning-parameter assignment; this is the identity of a kernel variant.
class ParamConfig {
 public:
  ParamConfig() = default;
  explicit ParamConfig(std::vector<std::uint32_t> values) : values_(std::move(values)) {}
  ParamConfig(std::initializer_list<std::uint32_t> values) : values_(values) {}

  const std::vector<std::uint32_t>& values() const { return values_; }
  std::size_t arity() const { return values_.size(); }

  // "(0,1,32,...)" for display.
  std::string to_string() const { return "(" + join(",") + ")"; }
  std::string join(std::string_view sep) const {
    std::ostringstream out;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (i > 0) out << sep;
      out << values_[i];
    }
    return out.str();
  }

  friend auto operator<=>(const ParamConfig&, const ParamConfig&) = default;
  friend bool operator==(const ParamConfig&, const ParamConfig&) = default;

 private:
  std::vector<std::uint32_t> values_;
};

// An execution environment: (device, input).
struct Environment {
  std::string device;
  KernelInput input;

  friend auto operator<=>(const Environment&, const Environment&) = default;
  friend bool operator==(const Environment&, const Environment&) = default;

  std::string to_string() const { return device + "@" + input.key(); }
};

struct TuningRecord {
  Environment env;
  ParamConfig config;
  double runtime_ms = 0.0;
  std::optional<double> compile_ms;

  friend bool operator==(const TuningRecord&, const TuningRecord&) = default;
};

// Which per-sample statistic the runtimes represent. Values are treated the same way
// regardless; the label travels with the data.
enum class TimingStatistic { kUnknown, kMean, kMinimum };

inline std::string_view to_string(TimingStatistic s) {
  switch (s) {
    case TimingStatistic::kMean: return "mean";
    case TimingStatistic::kMinimum: return "minimum";
    case TimingStatistic::kUnknown: break;
  }
  return "unknown";
}

inline TimingStatistic timing_statistic_from_string(std::string_view s) {
  if (s == "mean") return TimingStatistic::kMean;
  if (s == "minimum") return TimingStatistic::kMinimum;
  if (s == "unknown") return TimingStatistic::kUnknown;
  throw Error("unknown timing statistic '" + std::string(s) + "'");
}

}  // namespace portune

template <>
struct std::hash<portune::KernelInput> {
  std::size_t operator()(const portune::KernelInput& in) const noexcept {
    std::uint64_t h = in.m;
    h = h * 0x9E3779B97F4A7C15ull ^ in.n;
    h = h * 0x9E3779B97F4A7C15ull ^ in.k;
    return static_cast<std::size_t>(h);
  }
};

template <>
struct std::hash<portune::Environment> {
  std::size_t operator()(const portune::Environment& e) const noexcept {
    return std::hash<std::string>{}(e.device) * 31u ^ std::hash<portune::KernelInput>{}(e.input);
  }
};
