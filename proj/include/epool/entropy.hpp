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

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "epool/binning.hpp"
#include "epool/error.hpp"

namespace epool {

/// C+ holds the accepted (non-defaulter) rows, C- the rejected (defaulter) rows.
enum class ClassTag { positive, negative };

inline constexpr ClassTag other(ClassTag t) {
  return t == ClassTag::positive ? ClassTag::negative : ClassTag::positive;
}
inline constexpr std::size_t index_of(ClassTag t) { return t == ClassTag::positive ? 0 : 1; }
inline std::string_view to_string(ClassTag t) {
  return t == ClassTag::positive ? "positive" : "negative";
}

/// Maps -0.0 to +0.0; every other value passes through.
inline double normalize_zero(double x) { return x == 0.0 ? 0.0 : x; }

/// Shannon entropy in bits of a frequency table, evaluated term by term as
/// -sum (c/n) log2(c/n) with 0 log 0 = 0.
inline double attribute_entropy(std::span<const std::uint64_t> counts, std::uint64_t n) {
  if (n == 0) throw Error(ErrorKind::undefined_entropy, "entropy_core", "entropy of an empty table");
  const double total = static_cast<double>(n);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return normalize_zero(h);
}

inline double attribute_entropy(const std::map<std::string, std::uint64_t>& counts, std::uint64_t n) {
  std::vector<std::uint64_t> v;
  v.reserve(counts.size());
  for (const auto& [_, c] : counts) v.push_back(c);
  return attribute_entropy(v, n);
}

namespace detail {

// (x+1) log2(x+1) - x log2(x), the growth of sum c log2 c when one count
// goes from x to x+1. Written with log1p to avoid cancellation at large x.
inline double insertion_gain(std::uint64_t x) {
  if (x == 0) return 0.0;
  const double d = static_cast<double>(x);
  return std::log2(d + 1.0) + d * std::log1p(1.0 / d) / std::numbers::ln2;
}

}  // namespace detail

/// Category counts of one attribute within a pool, categories sorted.
class AttributeCounts {
 public:
  AttributeCounts() = default;

  explicit AttributeCounts(const std::map<std::string, std::uint64_t>& counts) {
    for (const auto& [cat, c] : counts) {
      if (c == 0) continue;
      index_.emplace(cat, categories_.size());
      categories_.push_back(cat);
      counts_.push_back(c);
      total_ += c;
    }
  }

  std::uint64_t count(const std::string& category) const {
    auto it = index_.find(category);
    return it == index_.end() ? 0 : counts_[it->second];
  }

  const std::vector<std::string>& categories() const noexcept { return categories_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::size_t arity() const noexcept { return categories_.size(); }
  std::uint64_t total() const noexcept { return total_; }

  std::map<std::string, std::uint64_t> as_map() const {
    std::map<std::string, std::uint64_t> m;
    for (std::size_t i = 0; i < categories_.size(); ++i) m.emplace(categories_[i], counts_[i]);
    return m;
  }

 private:
  std::vector<std::string> categories_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t total_ = 0;
};

/// Per-attribute entropies in pool attribute order and their sequential sum.
/// For a stored pool the sum is the reference metric (alpha); after virtual
/// insertion of a candidate it is the final metric (beta).
struct EntropyProfile {
  std::vector<std::string> attributes;
  std::vector<double> entropies;
  double metric_sum = 0.0;
};

inline double sequential_sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return normalize_zero(s);
}

/// Counts how many category terms the incremental path evaluated.
struct ProbeCounter {
  std::size_t terms = 0;
};

/// Category-count tables of one class pool. Immutable after construction;
/// the per-attribute entropies are computed once and cached.
class PoolStats {
 public:
  PoolStats(ClassTag tag, std::vector<std::string> attributes,
            const std::vector<std::map<std::string, std::uint64_t>>& counts, std::uint64_t n_rows)
      : tag_(tag), attributes_(std::move(attributes)), n_rows_(n_rows) {
    if (n_rows_ == 0)
      throw Error(ErrorKind::empty_pool, "entropy_core", std::string("pool '") +
                                                             std::string(to_string(tag)) + "' has no rows");
    if (counts.size() != attributes_.size())
      throw Error(ErrorKind::schema_mismatch, "entropy_core", "count tables do not match attribute list");
    tables_.reserve(counts.size());
    entropies_.reserve(counts.size());
    for (std::size_t a = 0; a < counts.size(); ++a) {
      tables_.emplace_back(counts[a]);
      if (tables_.back().total() != n_rows_)
        throw Error(ErrorKind::schema_mismatch, "entropy_core",
                    "counts of attribute '" + attributes_[a] + "' sum to " +
                        std::to_string(tables_.back().total()) + ", pool has " + std::to_string(n_rows_) +
                        " rows");
      entropies_.push_back(attribute_entropy(tables_.back().counts(), n_rows_));
    }
    alpha_ = sequential_sum(entropies_);
  }

  ClassTag tag() const noexcept { return tag_; }
  const std::vector<std::string>& attributes() const noexcept { return attributes_; }
  std::uint64_t n_rows() const noexcept { return n_rows_; }
  const AttributeCounts& counts(std::size_t attribute) const { return tables_[attribute]; }
  std::span<const double> entropies() const noexcept { return entropies_; }
  double reference_metric() const noexcept { return alpha_; }

  /// Entropy of one attribute after virtually adding `token`, from the
  /// cached entropy and the two count terms the insertion changes.
  double inserted_entropy(std::size_t attribute, const std::string& token,
                          ProbeCounter* probe = nullptr) const {
    const auto& table = tables_[attribute];
    const std::uint64_t k = table.count(token);
    if (probe) probe->terms += 2;
    if (k == n_rows_) return 0.0;  // candidate joins the only category
    const double n = static_cast<double>(n_rows_);
    const double h = (n * entropies_[attribute] + detail::insertion_gain(n_rows_) -
                      detail::insertion_gain(k)) /
                     (n + 1.0);
    return h > 0.0 ? h : 0.0;
  }

 private:
  ClassTag tag_;
  std::vector<std::string> attributes_;
  std::uint64_t n_rows_ = 0;
  std::vector<AttributeCounts> tables_;
  std::vector<double> entropies_;
  double alpha_ = 0.0;
};

/// Pool from the listed rows of a categorical table.
inline PoolStats build_pool(const CategoricalTable& table, std::span<const std::size_t> rows, ClassTag tag) {
  if (rows.empty())
    throw Error(ErrorKind::empty_pool, "entropy_core",
                std::string("cannot build pool '") + std::string(to_string(tag)) + "' from zero rows");
  std::vector<std::map<std::string, std::uint64_t>> counts(table.attributes.size());
  for (std::size_t a = 0; a < table.attributes.size(); ++a)
    for (auto r : rows) ++counts[a][table.columns[a][r]];
  return PoolStats(tag, table.attributes, counts, rows.size());
}

/// Pool from row-major token rows aligned with `attributes`.
inline PoolStats build_pool(const std::vector<std::string>& attributes,
                            const std::vector<std::vector<std::string>>& rows, ClassTag tag) {
  if (rows.empty())
    throw Error(ErrorKind::empty_pool, "entropy_core",
                std::string("cannot build pool '") + std::string(to_string(tag)) + "' from zero rows");
  std::vector<std::map<std::string, std::uint64_t>> counts(attributes.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != attributes.size())
      throw Error(ErrorKind::schema_mismatch, "entropy_core",
                  "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                      " tokens, expected " + std::to_string(attributes.size()));
    for (std::size_t a = 0; a < attributes.size(); ++a) ++counts[a][rows[r][a]];
  }
  return PoolStats(tag, attributes, counts, rows.size());
}

inline EntropyProfile entropy_profile(const PoolStats& pool) {
  EntropyProfile p;
  p.attributes = pool.attributes();
  p.entropies.assign(pool.entropies().begin(), pool.entropies().end());
  p.metric_sum = pool.reference_metric();
  return p;
}

namespace detail {

inline void check_candidate(const PoolStats& pool, std::span<const std::string> candidate) {
  if (candidate.size() != pool.attributes().size())
    throw Error(ErrorKind::schema_mismatch, "entropy_core",
                "candidate has " + std::to_string(candidate.size()) + " tokens, pool has " +
                    std::to_string(pool.attributes().size()) + " attributes");
}

inline void inserted_entropies(const PoolStats& pool, std::span<const std::string> candidate,
                               std::vector<double>& out, ProbeCounter* probe) {
  check_candidate(pool, candidate);
  out.resize(candidate.size());
  for (std::size_t a = 0; a < candidate.size(); ++a)
    out[a] = pool.inserted_entropy(a, candidate[a], probe);
}

}  // namespace detail

/// Profile of the pool as if `candidate` were appended. The pool is not
/// modified; the cost is independent of n_rows.
inline EntropyProfile global_profile(const PoolStats& pool, std::span<const std::string> candidate,
                                     ProbeCounter* probe = nullptr) {
  EntropyProfile p;
  detail::inserted_entropies(pool, candidate, p.entropies, probe);
  p.attributes = pool.attributes();
  p.metric_sum = sequential_sum(p.entropies);
  return p;
}

struct DemResult {
  double alpha = 0.0;  // reference metric
  double beta = 0.0;   // final metric
  double dem = 0.0;    // alpha - beta
};

/// Difference of entropy metrics for one pool. Positive when inserting the
/// candidate lowers the pool's total attribute entropy.
inline DemResult dem(const PoolStats& pool, std::span<const std::string> candidate) {
  thread_local std::vector<double> scratch;
  detail::inserted_entropies(pool, candidate, scratch, nullptr);
  DemResult r;
  r.alpha = pool.reference_metric();
  r.beta = sequential_sum(scratch);
  r.dem = r.alpha - r.beta;
  return r;
}

/// A new pool with the candidate physically appended, every entropy
/// recomputed from the full count tables.
inline PoolStats inserted_pool(const PoolStats& pool, std::span<const std::string> candidate) {
  detail::check_candidate(pool, candidate);
  std::vector<std::map<std::string, std::uint64_t>> counts;
  counts.reserve(candidate.size());
  for (std::size_t a = 0; a < candidate.size(); ++a) {
    counts.push_back(pool.counts(a).as_map());
    ++counts.back()[candidate[a]];
  }
  return PoolStats(pool.tag(), pool.attributes(), counts, pool.n_rows() + 1);
}

inline constexpr double kIncrementalTolerance = 1e-9;

/// Checks the incremental insertion path against a full rebuild, attribute
/// by attribute, to within kIncrementalTolerance.
inline bool verify_incremental(const PoolStats& pool, std::span<const std::string> candidate) {
  const auto fast = global_profile(pool, candidate);
  const auto full = inserted_pool(pool, candidate);
  for (std::size_t a = 0; a < fast.entropies.size(); ++a)
    if (!(std::abs(fast.entropies[a] - full.entropies()[a]) <= kIncrementalTolerance)) return false;
  return true;
}

enum class TieBreak { rejected, accepted };

struct ClassDem {
  double reference_alpha = 0.0;
  double final_beta = 0.0;
  double dem = 0.0;
  bool operator==(const ClassDem&) const = default;
};

/// DEM against both pools and the resulting decision.
struct DemEvaluation {
  std::array<ClassDem, 2> per_class{};  // indexed by index_of(ClassTag)
  ClassTag predicted_class = ClassTag::negative;
  double decision_margin = 0.0;  // dem(predicted) - dem(other)

  const ClassDem& of(ClassTag t) const { return per_class[index_of(t)]; }
  bool operator==(const DemEvaluation&) const = default;
};

/// argmax over the two DEMs; an exact tie goes to the tie-break class
/// (negative/rejected by default).
inline DemEvaluation decide(const DemResult& positive, const DemResult& negative,
                            TieBreak tie_break = TieBreak::rejected) {
  DemEvaluation e;
  e.per_class[index_of(ClassTag::positive)] = {positive.alpha, positive.beta, positive.dem};
  e.per_class[index_of(ClassTag::negative)] = {negative.alpha, negative.beta, negative.dem};
  if (positive.dem > negative.dem) e.predicted_class = ClassTag::positive;
  else if (negative.dem > positive.dem) e.predicted_class = ClassTag::negative;
  else e.predicted_class = tie_break == TieBreak::rejected ? ClassTag::negative : ClassTag::positive;
  e.decision_margin = normalize_zero(e.of(e.predicted_class).dem - e.of(other(e.predicted_class)).dem);
  return e;
}

}  // namespace epool
