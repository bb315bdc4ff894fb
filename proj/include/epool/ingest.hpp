// Copyright 2026 The epool Authors
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
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "epool/csv.hpp"
#include "epool/error.hpp"
#include "epool/schema.hpp"

namespace epool {

using NumericColumn = std::vector<std::optional<double>>;
using CategoricalColumn = std::vector<std::optional<std::string>>;
using Column = std::variant<NumericColumn, CategoricalColumn>;

struct TableMetadata {
  std::vector<std::string> dropped_columns;  // file columns absent from the schema
  std::vector<std::string> all_missing_numeric;  // filled with 0 by impute
  std::size_t dropped_column_count() const noexcept { return dropped_columns.size(); }
};

/// Column-oriented table typed by its schema. columns[i] corresponds to
/// schema.columns()[i]; a nullopt cell is a missing marker.
struct RawTable {
  Schema schema;
  std::vector<Column> columns;
  std::size_t row_count = 0;
  bool label_present = true;
  TableMetadata meta;

  const NumericColumn& numeric(std::size_t i) const { return std::get<NumericColumn>(columns[i]); }
  const CategoricalColumn& categorical(std::size_t i) const {
    return std::get<CategoricalColumn>(columns[i]);
  }

  std::size_t missing_count() const {
    std::size_t n = 0;
    for (const auto& col : columns)
      std::visit([&n](const auto& v) {
        for (const auto& cell : v) n += !cell.has_value();
      }, col);
    return n;
  }
};

struct LoadOptions {
  /// When false, a file without the label column is accepted (prediction
  /// input); the label column is then all-missing and label_present is false.
  bool require_label = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

inline RawTable read_csv(std::istream& in, const Schema& schema, const LoadOptions& options = {}) {
  csv::Reader reader(in);
  csv::Record header;
  if (!reader.next(header)) throw Error(ErrorKind::parse, "ingest", "input has no header row");

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    std::string name(detail::trim(header.fields[i]));
    if (!position.emplace(name, i).second)
      throw Error(ErrorKind::parse, "ingest", "duplicate header column '" + name + "'");
  }

  RawTable table;
  table.schema = schema;
  std::vector<std::optional<std::size_t>> source(schema.columns().size());
  for (std::size_t i = 0; i < schema.columns().size(); ++i) {
    const auto& spec = schema.columns()[i];
    auto it = position.find(spec.name);
    if (it == position.end()) {
      if (spec.role == Role::label && !options.require_label) {
        table.label_present = false;
      } else {
        throw Error(ErrorKind::schema_mismatch, "ingest",
                    "header is missing schema column '" + spec.name + "'");
      }
    } else {
      source[i] = it->second;
    }
    if (spec.kind == Kind::numeric) table.columns.emplace_back(NumericColumn{});
    else table.columns.emplace_back(CategoricalColumn{});
  }
  for (const auto& [name, idx] : position)
    if (!schema.find(name)) table.meta.dropped_columns.push_back(name);

  csv::Record rec;
  std::size_t row = 0;
  while (reader.next(rec)) {
    ++row;
    if (rec.fields.size() != header.fields.size())
      throw Error(ErrorKind::parse, "ingest",
                  "row " + std::to_string(row) + " (line " + std::to_string(rec.line) + ") has " +
                      std::to_string(rec.fields.size()) + " fields, header has " +
                      std::to_string(header.fields.size()));
    for (std::size_t i = 0; i < source.size(); ++i) {
      std::visit([&](auto& col) {
        using T = std::decay_t<decltype(col)>;
        if (!source[i]) {
          col.emplace_back(std::nullopt);
          return;
        }
        const std::string& cell = rec.fields[*source[i]];
        if constexpr (std::is_same_v<T, NumericColumn>) {
          col.push_back(detail::parse_number(cell));
        } else {
          if (detail::trim(cell).empty()) col.emplace_back(std::nullopt);
          else col.emplace_back(cell);
        }
      }, table.columns[i]);
    }
  }
  table.row_count = row;
  return table;
}

inline RawTable load_csv(const std::filesystem::path& path, const Schema& schema,
                         const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "ingest", "cannot open " + path.string());
  return read_csv(in, schema, options);
}

/// Per-column fill values: the mean of each numeric column's non-missing
/// cells, or 0 when the column is entirely missing.
struct ImputeValues {
  std::map<std::string, double> numeric_fill;
};

inline ImputeValues fit_impute(const RawTable& table) {
  ImputeValues values;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    const auto* col = std::get_if<NumericColumn>(&table.columns[i]);
    if (!col) continue;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& cell : *col)
      if (cell) {
        sum += *cell;
        ++n;
      }
    values.numeric_fill[table.schema.columns()[i].name] = n ? sum / static_cast<double>(n) : 0.0;
  }
  return values;
}

/// Fills missing cells with the given values (numeric) or the MISSING token
/// (categorical). Numeric columns absent from `values` fall back to 0.
inline RawTable impute(RawTable table, const ImputeValues& values) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    const auto& spec = table.schema.columns()[i];
    if (auto* col = std::get_if<NumericColumn>(&table.columns[i])) {
      bool all_missing = !col->empty();
      for (const auto& cell : *col) all_missing = all_missing && !cell;
      auto it = values.numeric_fill.find(spec.name);
      const double fill = it != values.numeric_fill.end() ? it->second : 0.0;
      if (all_missing) table.meta.all_missing_numeric.push_back(spec.name);
      for (auto& cell : *col)
        if (!cell) cell = fill;
    } else {
      for (auto& cell : std::get<CategoricalColumn>(table.columns[i]))
        if (!cell) cell = std::string(kMissingToken);
    }
  }
  return table;
}

/// Mean-fill numerics from the table's own cells, MISSING for categoricals.
inline RawTable impute(RawTable table) {
  const auto values = fit_impute(table);
  return impute(std::move(table), values);
}

}  // namespace epool
