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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "epool/error.hpp"

namespace epool {

enum class Role { feature, label, ignore };
enum class Kind { numeric, categorical };
enum class MissingPolicy { mean, missing_category };

inline constexpr std::string_view kMissingToken = "MISSING";

struct ColumnSpec {
  std::string name;
  Role role = Role::feature;
  Kind kind = Kind::categorical;
  MissingPolicy missing_policy = MissingPolicy::missing_category;

  ColumnSpec() = default;
  ColumnSpec(std::string n, Role r, Kind k)
      : name(std::move(n)),
        role(r),
        kind(k),
        missing_policy(k == Kind::numeric ? MissingPolicy::mean
                                          : MissingPolicy::missing_category) {}

  bool operator==(const ColumnSpec&) const = default;
};

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::feature: return "feature";
    case Role::label: return "label";
    case Role::ignore: return "ignore";
  }
  return "";
}

inline std::string_view to_string(Kind k) {
  return k == Kind::numeric ? "numeric" : "categorical";
}

/// Ordered column declarations. Construction validates that exactly one
/// categorical label column exists and that names are unique.
class Schema {
 public:
  Schema() = default;

  explicit Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
    validate();
  }

  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }

  const ColumnSpec& label() const { return columns_[label_index_]; }
  std::size_t label_index() const noexcept { return label_index_; }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name == name) return i;
    return std::nullopt;
  }

  /// FNV-1a over the canonical "name|role|kind" lines, as 16 hex digits.
  std::string fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    };
    for (const auto& c : columns_) {
      mix(c.name);
      mix("|");
      mix(to_string(c.role));
      mix("|");
      mix(to_string(c.kind));
      mix("\n");
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
  }

  bool operator==(const Schema& o) const { return columns_ == o.columns_; }

 private:
  void validate() {
    std::set<std::string> seen;
    std::optional<std::size_t> label;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      const auto& c = columns_[i];
      if (c.name.empty()) throw Error(ErrorKind::schema_mismatch, "ingest", "column with empty name");
      if (!seen.insert(c.name).second)
        throw Error(ErrorKind::schema_mismatch, "ingest", "duplicate column '" + c.name + "'");
      if (c.role == Role::label) {
        if (label)
          throw Error(ErrorKind::schema_mismatch, "ingest",
                      "more than one label column ('" + columns_[*label].name + "', '" + c.name + "')");
        if (c.kind != Kind::categorical)
          throw Error(ErrorKind::schema_mismatch, "ingest",
                      "label column '" + c.name + "' must be categorical");
        label = i;
      }
    }
    if (!label) throw Error(ErrorKind::schema_mismatch, "ingest", "schema has no label column");
    label_index_ = *label;
  }

  std::vector<ColumnSpec> columns_;
  std::size_t label_index_ = 0;
};

inline nlohmann::json to_json(const Schema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns())
    cols.push_back({{"name", c.name},
                    {"role", std::string(to_string(c.role))},
                    {"kind", std::string(to_string(c.kind))}});
  return {{"columns", std::move(cols)}};
}

inline Schema schema_from_json(const nlohmann::json& doc) {
  auto fail = [](const std::string& msg) -> Error {
    return Error(ErrorKind::schema_mismatch, "ingest", "schema: " + msg);
  };
  if (!doc.is_object()) throw fail("document must be an object");
  for (const auto& [key, _] : doc.items())
    if (key != "columns") throw fail("unknown key '" + key + "'");
  if (!doc.contains("columns") || !doc["columns"].is_array())
    throw fail("'columns' must be an array");

  std::vector<ColumnSpec> columns;
  for (const auto& entry : doc["columns"]) {
    if (!entry.is_object()) throw fail("column entry must be an object");
    for (const auto& [key, _] : entry.items())
      if (key != "name" && key != "role" && key != "kind")
        throw fail("unknown column key '" + key + "'");
    if (!entry.contains("name") || !entry["name"].is_string()) throw fail("column needs a string 'name'");
    const std::string name = entry["name"].get<std::string>();

    const std::string role = entry.value("role", std::string("feature"));
    Role r;
    if (role == "feature") r = Role::feature;
    else if (role == "label") r = Role::label;
    else if (role == "ignore") r = Role::ignore;
    else throw fail("column '" + name + "': unknown role '" + role + "'");

    if (!entry.contains("kind") || !entry["kind"].is_string())
      throw fail("column '" + name + "' needs a string 'kind'");
    const std::string kind = entry["kind"].get<std::string>();
    Kind k;
    if (kind == "numeric") k = Kind::numeric;
    else if (kind == "categorical") k = Kind::categorical;
    else throw fail("column '" + name + "': unknown kind '" + kind + "'");

    columns.emplace_back(name, r, k);
  }
  return Schema(std::move(columns));
}

inline Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "ingest", "cannot open schema file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, "ingest", "schema file " + path.string() + ": " + e.what());
  }
  return schema_from_json(doc);
}

}  // namespace epool
