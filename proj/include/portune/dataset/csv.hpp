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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "portune/core/error.hpp"
#include "portune/core/types.hpp"
#include "portune/dataset/dataset.hpp"

namespace portune {

// Maps CSV header names onto record fields. Optional columns are ignored when
// their header is absent.
struct CsvSchema {
  std::string device = "device";
  std::string m = "m";
  std::string n = "n";
  std::string k = "k";
  std::string params = "params";
  std::string runtime_ms = "runtime_ms";
  std::string compile_ms = "compile_ms";  // optional
  std::string vendor = "vendor";          // optional
  std::string compute_units = "compute_units";  // optional
  char delimiter = ',';
  char param_delimiter = ';';
  TimingStatistic statistic = TimingStatistic::kUnknown;
};

namespace csv_detail {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180-style splitter: quoted fields may contain delimiters, doubled quotes
// and newlines. Blank lines are skipped.
inline std::vector<Row> split(std::string_view text, char delim) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  row.line = 1;
  auto end_row = [&] {
    if (field_started || !row.fields.empty() || !field.empty()) {
      row.fields.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    field.clear();
    row = Row{};
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == delim) {
      row.fields.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
      ++line;
      row.line = line;
    } else {
      if (row.fields.empty() && field.empty()) row.line = line;
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw IngestError("unterminated quoted field", row.line);
  end_row();
  return rows;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::uint32_t parse_uint(std::string_view s, std::size_t line, std::string_view what) {
  s = trim(s);
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw IngestError("malformed " + std::string(what) + " '" + std::string(s) + "'", line);
  }
  return v;
}

inline double parse_double(std::string_view s, std::size_t line, std::string_view what) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw IngestError("malformed " + std::string(what) + " '" + std::string(s) + "'", line);
  }
  return v;
}

inline ParamConfig parse_params(std::string_view s, char sep, std::size_t line) {
  s = trim(s);
  if (!s.empty() && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  std::vector<std::uint32_t> values;
  if (s.empty()) throw IngestError("empty parameter list", line);
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = s.find(sep, pos);
    const std::string_view part = s.substr(pos, end == std::string_view::npos ? s.npos : end - pos);
    values.push_back(parse_uint(part, line, "parameter"));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return ParamConfig(std::move(values));
}

}  // namespace csv_detail

// Reads a header-led CSV benchmark table. Duplicate (environment, config) rows
// collapse to their minimum runtime.
inline PerformanceDataset ingest_csv(std::istream& source, const CsvSchema& schema = {}) {
  const std::string text{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
  std::vector<csv_detail::Row> rows = csv_detail::split(text, schema.delimiter);
  if (rows.empty()) throw IngestError("missing CSV header");

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    std::string name(csv_detail::trim(rows[0].fields[i]));
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
    column.emplace(std::move(name), i);
  }
  auto required = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) throw IngestError("missing required column '" + name + "'", rows[0].line);
    return it->second;
  };
  auto optional = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = column.find(name);
    if (it == column.end()) return std::nullopt;
    return it->second;
  };
  const std::size_t c_device = required(schema.device);
  const std::size_t c_m = required(schema.m);
  const std::size_t c_n = required(schema.n);
  const std::size_t c_k = required(schema.k);
  const std::size_t c_params = required(schema.params);
  const std::size_t c_runtime = required(schema.runtime_ms);
  const auto c_compile = optional(schema.compile_ms);
  const auto c_vendor = optional(schema.vendor);
  const auto c_units = optional(schema.compute_units);

  std::vector<TuningRecord> records;
  std::map<std::string, DeviceId> devices;
  std::optional<std::size_t> arity;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv_detail::Row& row = rows[r];
    if (row.fields.size() != rows[0].fields.size()) {
      throw IngestError("malformed row: expected " + std::to_string(rows[0].fields.size()) +
                            " fields, got " + std::to_string(row.fields.size()),
                        row.line);
    }
    TuningRecord rec;
    rec.env.device = std::string(csv_detail::trim(row.fields[c_device]));
    if (rec.env.device.empty()) throw IngestError("malformed row: empty device", row.line);
    rec.env.input.m = csv_detail::parse_uint(row.fields[c_m], row.line, "m");
    rec.env.input.n = csv_detail::parse_uint(row.fields[c_n], row.line, "n");
    rec.env.input.k = csv_detail::parse_uint(row.fields[c_k], row.line, "k");
    if (rec.env.input.m == 0 || rec.env.input.n == 0 || rec.env.input.k == 0) {
      throw IngestError("malformed row: input dimensions must be >= 1", row.line);
    }
    rec.config = csv_detail::parse_params(row.fields[c_params], schema.param_delimiter, row.line);
    if (!arity) arity = rec.config.arity();
    if (rec.config.arity() != *arity) {
      throw IngestError("inconsistent parameter arity: expected " + std::to_string(*arity) + ", got " +
                            std::to_string(rec.config.arity()),
                        row.line);
    }
    rec.runtime_ms = csv_detail::parse_double(row.fields[c_runtime], row.line, "runtime");
    if (!(rec.runtime_ms > 0.0) || !std::isfinite(rec.runtime_ms)) {
      throw IngestError("non-positive runtime", row.line);
    }
    if (c_compile && !csv_detail::trim(row.fields[*c_compile]).empty()) {
      const double c = csv_detail::parse_double(row.fields[*c_compile], row.line, "compile time");
      if (!(c > 0.0) || !std::isfinite(c)) throw IngestError("non-positive compile time", row.line);
      rec.compile_ms = c;
    }
    DeviceId& dev = devices.try_emplace(rec.env.device, DeviceId{rec.env.device, {}, {}}).first->second;
    if (c_vendor) {
      const std::string_view v = csv_detail::trim(row.fields[*c_vendor]);
      if (!v.empty()) dev.vendor = std::string(v);
    }
    if (c_units && !csv_detail::trim(row.fields[*c_units]).empty()) {
      const std::uint32_t u = csv_detail::parse_uint(row.fields[*c_units], row.line, "compute units");
      if (u == 0) throw IngestError("compute units must be positive", row.line);
      dev.compute_units = static_cast<int>(u);
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw IngestError("empty dataset");
  std::vector<DeviceId> devs;
  for (auto& [name, d] : devices) devs.push_back(std::move(d));
  return PerformanceDataset(std::move(records), *arity, std::move(devs), schema.statistic);
}

// Writes the default-schema CSV. Runtimes use round-trip precision.
inline void write_csv(std::ostream& out, const PerformanceDataset& ds) {
  out << "device,vendor,compute_units,m,n,k,params,runtime_ms,compile_ms\n";
  std::map<std::string, const DeviceId*> devices;
  for (const DeviceId& d : ds.devices()) devices.emplace(d.name, &d);
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q.push_back('"');
      q.push_back(c);
    }
    return q + "\"";
  };
  char buf[64];
  auto num = [&buf](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  for (const TuningRecord& r : ds.records()) {
    const DeviceId& d = *devices.at(r.env.device);
    out << quote(d.name) << ',' << quote(d.vendor.value_or("")) << ','
        << (d.compute_units ? std::to_string(*d.compute_units) : "") << ',' << r.env.input.m << ','
        << r.env.input.n << ',' << r.env.input.k << ',' << r.config.join(";") << ','
        << num(r.runtime_ms) << ',' << (r.compile_ms ? num(*r.compile_ms) : "") << '\n';
  }
}

}  // namespace portune
