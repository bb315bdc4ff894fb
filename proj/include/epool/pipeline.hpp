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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "epool/binning.hpp"
#include "epool/classifier.hpp"
#include "epool/entropy.hpp"
#include "epool/ingest.hpp"

namespace epool {

inline std::string_view to_string(Encoding e) { return e == Encoding::onehot ? "onehot" : "categorical"; }

inline Encoding parse_encoding(std::string_view s) {
  if (s == "categorical") return Encoding::categorical;
  if (s == "onehot") return Encoding::onehot;
  throw Error(ErrorKind::usage, "binning", "unknown encoding '" + std::string(s) + "'");
}

/// Training-time preprocessing state: imputation fill values, bin edges and
/// the one-hot layout. Prediction data goes through transform() and never
/// refits any of these.
struct Preprocessor {
  Schema schema;
  ImputeValues impute_values;
  std::vector<BinEdges> bin_edges;
  Encoding encoding = Encoding::categorical;
  bool expand_binary = false;
  OneHotLayout one_hot;

  static Preprocessor fit(const RawTable& train, Encoding encoding, bool expand_binary = false) {
    Preprocessor p;
    p.schema = train.schema;
    p.impute_values = fit_impute(train);
    p.bin_edges = fit_bins(impute(train, p.impute_values));
    p.encoding = encoding;
    p.expand_binary = expand_binary;
    if (encoding == Encoding::onehot) {
      auto binned = apply_bins(impute(train, p.impute_values), p.bin_edges);
      p.one_hot = fit_one_hot(binned, expand_binary);
    }
    return p;
  }

  CategoricalTable transform(const RawTable& table) const {
    if (!(table.schema == schema))
      throw Error(ErrorKind::schema_mismatch, "binning", "table schema differs from the model schema");
    auto binned = apply_bins(impute(table, impute_values), bin_edges);
    if (encoding == Encoding::onehot) return one_hot_expand(binned, one_hot);
    return binned;
  }
};

/// Everything prediction needs: preprocessing state plus the two pools.
struct TrainedModel {
  Preprocessor preprocessor;
  ClassifierModel classifier;
};

struct TrainOptions {
  Encoding encoding = Encoding::categorical;
  bool expand_binary = false;
  LabelMapping label_mapping;
  TieBreak tie_break = TieBreak::rejected;
};

inline TrainedModel train(const RawTable& raw, const TrainOptions& options = {}) {
  auto pre = Preprocessor::fit(raw, options.encoding, options.expand_binary);
  auto table = pre.transform(raw);
  auto model = fit(table, options.label_mapping, options.tie_break);
  return TrainedModel{std::move(pre), std::move(model)};
}

inline constexpr int kModelFormat = 1;
inline constexpr double kAlphaRecheckTolerance = 1e-12;

namespace detail {

inline nlohmann::json pool_to_json(const PoolStats& pool) {
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t a = 0; a < pool.attributes().size(); ++a) {
    nlohmann::json table = nlohmann::json::object();
    const auto& c = pool.counts(a);
    for (std::size_t i = 0; i < c.arity(); ++i) table[c.categories()[i]] = c.counts()[i];
    counts[pool.attributes()[a]] = std::move(table);
  }
  return {{"tag", std::string(to_string(pool.tag()))},
          {"n_rows", pool.n_rows()},
          {"counts", std::move(counts)},
          {"profile",
           {{"entropies", std::vector<double>(pool.entropies().begin(), pool.entropies().end())},
            {"metric_sum", pool.reference_metric()}}}};
}

inline PoolStats pool_from_json(const nlohmann::json& j, ClassTag expected,
                                const std::vector<std::string>& attributes) {
  const auto tag = j.at("tag").get<std::string>();
  if (tag != to_string(expected))
    throw Error(ErrorKind::model_io, "classifier", "expected pool '" + std::string(to_string(expected)) +
                                                        "', found '" + tag + "'");
  const auto n_rows = j.at("n_rows").get<std::uint64_t>();
  std::vector<std::map<std::string, std::uint64_t>> counts;
  for (const auto& a : attributes) {
    const auto& table = j.at("counts").at(a);
    std::map<std::string, std::uint64_t> m;
    for (const auto& [cat, c] : table.items()) m.emplace(cat, c.get<std::uint64_t>());
    counts.push_back(std::move(m));
  }
  PoolStats pool(expected, attributes, counts, n_rows);
  const double cached = j.at("profile").at("metric_sum").get<double>();
  if (!(std::abs(cached - pool.reference_metric()) <= kAlphaRecheckTolerance))
    throw Error(ErrorKind::model_io, "classifier",
                "cached reference metric of pool '" + tag + "' disagrees with its counts");
  return pool;
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedModel& m) {
  const auto& pre = m.preprocessor;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : pre.bin_edges) edges.push_back(to_json(e));
  nlohmann::json fill = nlohmann::json::object();
  for (const auto& [col, v] : pre.impute_values.numeric_fill) fill[col] = v;
  return {
      {"format", kModelFormat},
      {"schema_fingerprint", pre.schema.fingerprint()},
      {"schema", to_json(pre.schema)},
      {"preprocessing",
       {{"encoding", std::string(to_string(pre.encoding))},
        {"expand_binary", pre.expand_binary},
        {"impute", std::move(fill)},
        {"bin_edges", std::move(edges)},
        {"one_hot", to_json(pre.one_hot)}}},
      {"label_mapping", {{"positive", m.classifier.label_mapping.positive},
                         {"negative", m.classifier.label_mapping.negative}}},
      {"tie_break", std::string(to_string(m.classifier.tie_break))},
      {"attributes", m.classifier.attributes()},
      {"pools", {detail::pool_to_json(m.classifier.pool_positive),
                 detail::pool_to_json(m.classifier.pool_negative)}},
  };
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("format"))
      throw Error(ErrorKind::model_io, "classifier", "not a model file (no format field)");
    const int format = j.at("format").get<int>();
    if (format != kModelFormat)
      throw Error(ErrorKind::model_io, "classifier",
                  "model format version " + std::to_string(format) + " is not supported (expected " +
                      std::to_string(kModelFormat) + ")");
    Preprocessor pre;
    pre.schema = schema_from_json(j.at("schema"));
    if (pre.schema.fingerprint() != j.at("schema_fingerprint").get<std::string>())
      throw Error(ErrorKind::model_io, "classifier", "schema fingerprint mismatch");
    const auto& p = j.at("preprocessing");
    pre.encoding = parse_encoding(p.at("encoding").get<std::string>());
    pre.expand_binary = p.at("expand_binary").get<bool>();
    for (const auto& [col, v] : p.at("impute").items()) pre.impute_values.numeric_fill[col] = v.get<double>();
    for (const auto& e : p.at("bin_edges")) pre.bin_edges.push_back(bin_edges_from_json(e));
    pre.one_hot = one_hot_layout_from_json(p.at("one_hot"));

    LabelMapping mapping{j.at("label_mapping").at("positive").get<std::string>(),
                         j.at("label_mapping").at("negative").get<std::string>()};
    const auto attributes = j.at("attributes").get<std::vector<std::string>>();
    const auto& pools = j.at("pools");
    if (!pools.is_array() || pools.size() != 2)
      throw Error(ErrorKind::model_io, "classifier", "model must hold exactly two pools");
    ClassifierModel classifier{detail::pool_from_json(pools[0], ClassTag::positive, attributes),
                               detail::pool_from_json(pools[1], ClassTag::negative, attributes), mapping,
                               parse_tie_break(j.at("tie_break").get<std::string>())};
    return TrainedModel{std::move(pre), std::move(classifier)};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::model_io) throw;
    throw Error(ErrorKind::model_io, "classifier", std::string("invalid model: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::model_io, "classifier", std::string("invalid model: ") + e.what());
  }
}

inline void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::model_io, "classifier", "cannot write " + path.string());
  out << to_json(model).dump(1) << '\n';
  if (!out) throw Error(ErrorKind::model_io, "classifier", "write failed for " + path.string());
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::model_io, "classifier", "cannot open model " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::model_io, "classifier", "corrupt model " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace epool
