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
#include <exception>
#include <map>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "epool/binning.hpp"
#include "epool/entropy.hpp"
#include "epool/error.hpp"

namespace epool {

/// Which label token denotes the accepted (C+) and rejected (C-) class.
struct LabelMapping {
  std::string positive = "1";
  std::string negative = "0";

  std::optional<ClassTag> tag_of(const std::string& token) const {
    if (token == positive) return ClassTag::positive;
    if (token == negative) return ClassTag::negative;
    return std::nullopt;
  }
  const std::string& token_of(ClassTag t) const { return t == ClassTag::positive ? positive : negative; }

  bool operator==(const LabelMapping&) const = default;
};

inline std::string_view to_string(TieBreak t) { return t == TieBreak::rejected ? "rejected" : "accepted"; }

inline TieBreak parse_tie_break(std::string_view s) {
  if (s == "rejected") return TieBreak::rejected;
  if (s == "accepted") return TieBreak::accepted;
  throw Error(ErrorKind::usage, "classifier", "unknown tie-break '" + std::string(s) + "'");
}

/// The two class pools over a shared attribute list.
struct ClassifierModel {
  PoolStats pool_positive;
  PoolStats pool_negative;
  LabelMapping label_mapping;
  TieBreak tie_break = TieBreak::rejected;

  const std::vector<std::string>& attributes() const noexcept { return pool_positive.attributes(); }
  const PoolStats& pool(ClassTag t) const { return t == ClassTag::positive ? pool_positive : pool_negative; }
  double alpha(ClassTag t) const { return pool(t).reference_metric(); }
};

/// Row indices of each class, validated against the mapping.
inline std::array<std::vector<std::size_t>, 2> partition_by_label(const CategoricalTable& train,
                                                                  const LabelMapping& mapping) {
  if (!train.has_labels() || train.labels.size() != train.row_count)
    throw Error(ErrorKind::schema_mismatch, "classifier", "training table has no label column");
  const auto tokens = train.label_tokens();
  if (tokens.size() > 2)
    throw Error(ErrorKind::schema_mismatch, "classifier",
                "label '" + train.label_name + "' has " + std::to_string(tokens.size()) +
                    " distinct values; a binary label is required");
  for (const auto& t : tokens)
    if (!mapping.tag_of(t))
      throw Error(ErrorKind::schema_mismatch, "classifier",
                  "label token '" + t + "' is neither the positive ('" + mapping.positive +
                      "') nor the negative ('" + mapping.negative + "') label");
  std::array<std::vector<std::size_t>, 2> rows;
  for (std::size_t r = 0; r < train.row_count; ++r)
    rows[index_of(*mapping.tag_of(train.labels[r]))].push_back(r);
  return rows;
}

/// Splits the training rows by label into the two pools. No resampling:
/// each pool holds exactly its class's rows.
inline ClassifierModel fit(const CategoricalTable& train, const LabelMapping& mapping,
                           TieBreak tie_break = TieBreak::rejected) {
  const auto rows = partition_by_label(train, mapping);
  for (ClassTag t : {ClassTag::positive, ClassTag::negative})
    if (rows[index_of(t)].empty())
      throw Error(ErrorKind::unfittable, "classifier",
                  "class '" + std::string(to_string(t)) + "' (label '" + mapping.token_of(t) +
                      "') has no training rows");
  return ClassifierModel{build_pool(train, rows[0], ClassTag::positive),
                         build_pool(train, rows[1], ClassTag::negative), mapping, tie_break};
}

inline DemEvaluation predict_one(const ClassifierModel& model, std::span<const std::string> candidate) {
  if (candidate.size() != model.attributes().size())
    throw Error(ErrorKind::schema_mismatch, "classifier",
                "candidate has " + std::to_string(candidate.size()) + " attributes, model has " +
                    std::to_string(model.attributes().size()));
  return decide(dem(model.pool_positive, candidate), dem(model.pool_negative, candidate), model.tie_break);
}

struct Prediction {
  std::string label;
  DemEvaluation evaluation;
  bool operator==(const Prediction&) const = default;
};

/// Column positions in `table` for each model attribute, by name.
inline std::vector<std::size_t> align_attributes(const ClassifierModel& model, const CategoricalTable& table) {
  std::map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < table.attributes.size(); ++i) pos.emplace(table.attributes[i], i);
  std::vector<std::size_t> out;
  std::string missing;
  for (const auto& a : model.attributes()) {
    auto it = pos.find(a);
    if (it == pos.end()) {
      missing += (missing.empty() ? "" : ", ") + a;
      continue;
    }
    out.push_back(it->second);
  }
  if (!missing.empty())
    throw Error(ErrorKind::schema_mismatch, "classifier", "candidates lack model attributes: " + missing);
  return out;
}

inline std::size_t resolve_threads(std::size_t threads) {
  if (threads != 0) return threads;
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Evaluates every row against the unmodified pools. Output order follows
/// input order and does not depend on the thread count.
inline std::vector<Prediction> predict_batch(const ClassifierModel& model, const CategoricalTable& candidates,
                                             std::size_t threads = 1) {
  const auto cols = align_attributes(model, candidates);
  std::vector<Prediction> out(candidates.row_count);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<std::string> row(cols.size());
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t a = 0; a < cols.size(); ++a) row[a] = candidates.columns[cols[a]][r];
      auto eval = predict_one(model, row);
      out[r] = Prediction{model.label_mapping.token_of(eval.predicted_class), eval};
    }
  };
  const std::size_t n = candidates.row_count;
  const std::size_t workers = std::min(resolve_threads(threads), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    work(0, n);
    return out;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0, begin = 0; begin < n; ++w, begin += chunk)
      pool.emplace_back([&, w, begin] {
        try {
          work(begin, std::min(n, begin + chunk));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace epool
