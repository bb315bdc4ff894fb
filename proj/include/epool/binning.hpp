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

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "epool/error.hpp"
#include "epool/ingest.hpp"

namespace epool {

inline constexpr std::array<double, 3> kBinFractions = {0.25, 0.50, 0.75};

inline constexpr std::string_view kBinBelow25 = "L25";
inline constexpr std::string_view kBin25To50 = "B25_50";
inline constexpr std::string_view kBin50To75 = "B50_75";
inline constexpr std::string_view kBinAbove75 = "G75";

/// Thresholds at fixed fractions of a column's training maximum.
struct BinEdges {
  std::string column;
  double max_value = 0.0;
  std::array<double, 3> thresholds{0.0, 0.0, 0.0};

  static BinEdges from_max(std::string column, double max_value) {
    BinEdges e{std::move(column), max_value, {}};
    for (std::size_t i = 0; i < 3; ++i) e.thresholds[i] = kBinFractions[i] * max_value;
    return e;
  }

  /// Lower-inclusive intervals; anything at or above the top threshold is G75.
  std::string_view token(double v) const {
    if (v < thresholds[0]) return kBinBelow25;
    if (v < thresholds[1]) return kBin25To50;
    if (v < thresholds[2]) return kBin50To75;
    return kBinAbove75;
  }

  bool operator==(const BinEdges&) const = default;
};

inline nlohmann::json to_json(const BinEdges& e) {
  return {{"column", e.column},
          {"max_value", e.max_value},
          {"thresholds", {e.thresholds[0], e.thresholds[1], e.thresholds[2]}}};
}

inline BinEdges bin_edges_from_json(const nlohmann::json& j) {
  BinEdges e;
  e.column = j.at("column").get<std::string>();
  e.max_value = j.at("max_value").get<double>();
  const auto& t = j.at("thresholds");
  if (!t.is_array() || t.size() != 3)
    throw Error(ErrorKind::model_io, "binning", "bin edges for '" + e.column + "' need 3 thresholds");
  for (std::size_t i = 0; i < 3; ++i) e.thresholds[i] = t[i].get<double>();
  return e;
}

/// All-categorical view of a table: feature attributes in schema order
/// (ignore columns dropped) plus the separate label vector.
struct CategoricalTable {
  std::vector<std::string> attributes;
  std::vector<std::vector<std::string>> columns;  // columns[attribute][row]
  std::string label_name;
  std::vector<std::string> labels;  // empty when the source had no label column
  std::size_t row_count = 0;

  bool has_labels() const noexcept { return !labels.empty() || row_count == 0; }

  std::vector<std::string> row(std::size_t r) const {
    std::vector<std::string> out;
    out.reserve(columns.size());
    for (const auto& col : columns) out.push_back(col[r]);
    return out;
  }

  std::set<std::string> label_tokens() const { return {labels.begin(), labels.end()}; }
};

/// Max of every numeric feature column. Expects an imputed table.
inline std::vector<BinEdges> fit_bins(const RawTable& table) {
  std::vector<BinEdges> edges;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    const auto& spec = table.schema.columns()[i];
    if (spec.role != Role::feature || spec.kind != Kind::numeric) continue;
    const auto& col = table.numeric(i);
    bool first = true;
    double mx = 0.0;
    for (const auto& cell : col) {
      if (!cell) continue;
      if (first || *cell > mx) mx = *cell;
      first = false;
    }
    edges.push_back(BinEdges::from_max(spec.name, mx));
  }
  return edges;
}

inline CategoricalTable apply_bins(const RawTable& table, const std::vector<BinEdges>& edges) {
  std::map<std::string, const BinEdges*> by_name;
  for (const auto& e : edges) {
    auto idx = table.schema.find(e.column);
    if (!idx) throw Error(ErrorKind::schema_mismatch, "binning", "bin edges name unknown column '" + e.column + "'");
    const auto& spec = table.schema.columns()[*idx];
    if (spec.kind != Kind::numeric || spec.role != Role::feature)
      throw Error(ErrorKind::schema_mismatch, "binning",
                  "bin edges name non-numeric or non-feature column '" + e.column + "'");
    by_name[e.column] = &e;
  }

  CategoricalTable out;
  out.row_count = table.row_count;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    const auto& spec = table.schema.columns()[i];
    if (spec.role == Role::ignore) continue;
    if (spec.role == Role::label) {
      out.label_name = spec.name;
      if (!table.label_present) continue;
      for (const auto& cell : table.categorical(i))
        out.labels.push_back(cell ? *cell : std::string(kMissingToken));
      continue;
    }
    std::vector<std::string> tokens;
    tokens.reserve(table.row_count);
    if (spec.kind == Kind::numeric) {
      auto it = by_name.find(spec.name);
      if (it == by_name.end())
        throw Error(ErrorKind::schema_mismatch, "binning", "no bin edges for numeric column '" + spec.name + "'");
      for (const auto& cell : table.numeric(i)) {
        if (!cell)
          throw Error(ErrorKind::schema_mismatch, "binning",
                      "column '" + spec.name + "' has missing cells; impute before binning");
        tokens.emplace_back(it->second->token(*cell));
      }
    } else {
      for (const auto& cell : table.categorical(i))
        tokens.push_back(cell ? *cell : std::string(kMissingToken));
    }
    out.attributes.push_back(spec.name);
    out.columns.push_back(std::move(tokens));
  }
  return out;
}

enum class Encoding { categorical, onehot };

struct OneHotAttribute {
  std::string name;
  bool expanded = false;
  std::vector<std::string> categories;  // sorted; populated when expanded

  bool operator==(const OneHotAttribute&) const = default;
};

/// Training-time decision of which attributes expand and into which
/// indicator columns. Prediction tables are expanded with the same layout,
/// so a category unseen in training yields all-zero indicators.
struct OneHotLayout {
  std::vector<OneHotAttribute> attributes;
  bool operator==(const OneHotLayout&) const = default;
};

/// Attributes with three or more categories are expanded; two-category
/// attributes only when expand_binary is set.
inline OneHotLayout fit_one_hot(const CategoricalTable& table, bool expand_binary = false) {
  OneHotLayout layout;
  for (std::size_t a = 0; a < table.attributes.size(); ++a) {
    std::set<std::string> cats(table.columns[a].begin(), table.columns[a].end());
    OneHotAttribute attr{table.attributes[a], false, {}};
    if (cats.size() >= 3 || (expand_binary && cats.size() == 2)) {
      attr.expanded = true;
      attr.categories.assign(cats.begin(), cats.end());
    }
    layout.attributes.push_back(std::move(attr));
  }
  return layout;
}

inline CategoricalTable one_hot_expand(const CategoricalTable& table, const OneHotLayout& layout) {
  CategoricalTable out;
  out.row_count = table.row_count;
  out.label_name = table.label_name;
  out.labels = table.labels;
  for (const auto& attr : layout.attributes) {
    auto pos = std::find(table.attributes.begin(), table.attributes.end(), attr.name);
    if (pos == table.attributes.end())
      throw Error(ErrorKind::schema_mismatch, "binning", "one-hot layout names unknown attribute '" + attr.name + "'");
    const auto& col = table.columns[static_cast<std::size_t>(pos - table.attributes.begin())];
    if (!attr.expanded) {
      out.attributes.push_back(attr.name);
      out.columns.push_back(col);
      continue;
    }
    for (const auto& cat : attr.categories) {
      std::vector<std::string> indicator;
      indicator.reserve(col.size());
      for (const auto& v : col) indicator.emplace_back(v == cat ? "1" : "0");
      out.attributes.push_back(attr.name + "_" + cat);
      out.columns.push_back(std::move(indicator));
    }
  }
  return out;
}

inline CategoricalTable one_hot_expand(const CategoricalTable& table, bool expand_binary = false) {
  return one_hot_expand(table, fit_one_hot(table, expand_binary));
}

inline nlohmann::json to_json(const OneHotLayout& layout) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : layout.attributes)
    arr.push_back({{"name", a.name}, {"expanded", a.expanded}, {"categories", a.categories}});
  return arr;
}

inline OneHotLayout one_hot_layout_from_json(const nlohmann::json& j) {
  OneHotLayout layout;
  for (const auto& a : j)
    layout.attributes.push_back({a.at("name").get<std::string>(), a.at("expanded").get<bool>(),
                                 a.at("categories").get<std::vector<std::string>>()});
  return layout;
}

}  // namespace epool
