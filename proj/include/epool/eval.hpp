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
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "epool/classifier.hpp"
#include "epool/entropy.hpp"
#include "epool/ingest.hpp"
#include "epool/error.hpp"

namespace epool {

/// %.17g, with ".0" appended to integral values so they read as reals.
inline std::string format_17g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", normalize_zero(v));
  std::string s(buf);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

/// Shortest text that parses back to the same double.
inline std::string format_shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, normalize_zero(v));
  return std::string(buf, end);
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // nothing predicted as this class
  bool recall_undefined = false;     // no true rows of this class
  double mean_margin = 0.0;          // mean decision_margin over true rows of this class
  bool operator==(const ClassMetrics&) const = default;
};

/// Indexed [true class][predicted class], positive first.
using Confusion = std::array<std::array<std::size_t, 2>, 2>;

struct EvaluationReport {
  std::size_t n_total = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  Confusion confusion{};
  std::array<ClassMetrics, 2> per_class{};
  LabelMapping label_mapping;

  const ClassMetrics& of(ClassTag t) const { return per_class[index_of(t)]; }
};

/// Every count-derived field of a report, from the confusion matrix alone.
/// Margins are left at zero.
inline EvaluationReport metrics_from_confusion(const Confusion& confusion) {
  EvaluationReport r;
  r.confusion = confusion;
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t p = 0; p < 2; ++p) r.n_total += confusion[t][p];
  r.n_correct = confusion[0][0] + confusion[1][1];
  r.accuracy = r.n_total ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_total) : 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    auto& m = r.per_class[c];
    const std::size_t tp = confusion[c][c];
    const std::size_t predicted = confusion[0][c] + confusion[1][c];
    const std::size_t actual = confusion[c][0] + confusion[c][1];
    m.precision_undefined = predicted == 0;
    m.recall_undefined = actual == 0;
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  return r;
}

inline EvaluationReport evaluate(const ClassifierModel& model, const CategoricalTable& test,
                                 std::size_t threads = 1) {
  if (test.row_count == 0) throw Error(ErrorKind::empty_input, "eval", "test set is empty");
  if (test.labels.size() != test.row_count)
    throw Error(ErrorKind::schema_mismatch, "eval", "test set has no label column");
  std::vector<ClassTag> truth;
  truth.reserve(test.row_count);
  for (const auto& token : test.labels) {
    auto tag = model.label_mapping.tag_of(token);
    if (!tag) throw Error(ErrorKind::schema_mismatch, "eval", "unknown label token '" + token + "'");
    truth.push_back(*tag);
  }
  const auto predictions = predict_batch(model, test, threads);

  Confusion confusion{};
  std::array<double, 2> margin_sum{0.0, 0.0};
  for (std::size_t r = 0; r < truth.size(); ++r) {
    const auto t = index_of(truth[r]);
    ++confusion[t][index_of(predictions[r].evaluation.predicted_class)];
    margin_sum[t] += predictions[r].evaluation.decision_margin;
  }
  auto report = metrics_from_confusion(confusion);
  report.label_mapping = model.label_mapping;
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t actual = confusion[c][0] + confusion[c][1];
    report.per_class[c].mean_margin = actual ? margin_sum[c] / static_cast<double>(actual) : 0.0;
  }
  return report;
}

inline nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (ClassTag t : {ClassTag::positive, ClassTag::negative}) {
    const auto& m = r.of(t);
    per_class[std::string(to_string(t))] = {
        {"label", r.label_mapping.token_of(t)},
        {"precision", m.precision},
        {"recall", m.recall},
        {"f1", m.f1},
        {"precision_undefined", m.precision_undefined},
        {"recall_undefined", m.recall_undefined},
        {"mean_decision_margin", m.mean_margin},
    };
  }
  return {{"n_total", r.n_total},
          {"n_correct", r.n_correct},
          {"accuracy", r.accuracy},
          {"confusion", {{"order", {"positive", "negative"}},
                         {"rows_true_cols_predicted", r.confusion}}},
          {"per_class", std::move(per_class)}};
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    Confusion confusion{};
    const auto& m = j.at("confusion").at("rows_true_cols_predicted");
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t p = 0; p < 2; ++p) confusion[t][p] = m.at(t).at(p).get<std::size_t>();
    auto r = metrics_from_confusion(confusion);
    for (ClassTag t : {ClassTag::positive, ClassTag::negative}) {
      const auto& c = j.at("per_class").at(std::string(to_string(t)));
      r.per_class[index_of(t)].mean_margin = c.at("mean_decision_margin").get<double>();
      (t == ClassTag::positive ? r.label_mapping.positive : r.label_mapping.negative) =
          c.at("label").get<std::string>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, "eval", std::string("invalid report: ") + e.what());
  }
}

inline std::string to_text(const EvaluationReport& r) {
  char acc[32];
  std::snprintf(acc, sizeof acc, "%.4f", r.accuracy);
  std::ostringstream os;
  os << "accuracy: " << acc << " (" << r.n_correct << "/" << r.n_total << ")\n";
  os << "confusion (rows = true, cols = predicted):\n";
  os << "                  positive  negative\n";
  for (ClassTag t : {ClassTag::positive, ClassTag::negative}) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-14s %9zu %9zu\n", std::string(to_string(t)).c_str(),
                  r.confusion[index_of(t)][0], r.confusion[index_of(t)][1]);
    os << line;
  }
  for (ClassTag t : {ClassTag::positive, ClassTag::negative}) {
    const auto& m = r.of(t);
    char line[160];
    std::snprintf(line, sizeof line, "  %s (label %s): precision %.4f%s recall %.4f%s f1 %.4f\n",
                  std::string(to_string(t)).c_str(), r.label_mapping.token_of(t).c_str(), m.precision,
                  m.precision_undefined ? "*" : "", m.recall, m.recall_undefined ? "*" : "", m.f1);
    os << line;
  }
  if (r.of(ClassTag::positive).precision_undefined || r.of(ClassTag::negative).precision_undefined ||
      r.of(ClassTag::positive).recall_undefined || r.of(ClassTag::negative).recall_undefined)
    os << "  * denominator is zero; reported as 0\n";
  return os.str();
}

inline constexpr std::string_view kSumRowName = "__alpha__";

/// TSV of (pool, attribute, entropy) with a closing reference-metric row per
/// pool. Values are the pools' cached entropies, printed with 17 digits.
inline std::string entropy_table(const ClassifierModel& model) {
  std::ostringstream os;
  os << "pool\tattribute\tentropy\n";
  for (ClassTag t : {ClassTag::positive, ClassTag::negative}) {
    const auto& pool = model.pool(t);
    const auto name = to_string(t);
    for (std::size_t a = 0; a < pool.attributes().size(); ++a)
      os << name << '\t' << pool.attributes()[a] << '\t' << format_17g(pool.entropies()[a]) << '\n';
    os << name << '\t' << kSumRowName << '\t' << format_17g(pool.reference_metric()) << '\n';
  }
  return os.str();
}

enum class PlotKind { accuracy_bars, entropy_per_attribute };

inline PlotKind parse_plot_kind(std::string_view s) {
  if (s == "accuracy_bars") return PlotKind::accuracy_bars;
  if (s == "entropy_per_attribute") return PlotKind::entropy_per_attribute;
  throw Error(ErrorKind::usage, "eval", "unknown plot kind '" + std::string(s) + "'");
}

/// (attribute index, name, entropy) rows per pool.
inline std::string entropy_plot_data(const ClassifierModel& model) {
  std::ostringstream os;
  os << "pool\tindex\tattribute\tentropy\n";
  for (ClassTag t : {ClassTag::positive, ClassTag::negative}) {
    const auto& pool = model.pool(t);
    for (std::size_t a = 0; a < pool.attributes().size(); ++a)
      os << to_string(t) << '\t' << a << '\t' << pool.attributes()[a] << '\t'
         << format_shortest(pool.entropies()[a]) << '\n';
  }
  return os.str();
}

/// Reads "name<TAB>accuracy" lines; a header line and blank lines are skipped.
inline std::vector<std::pair<std::string, double>> read_baselines(std::istream& in) {
  std::vector<std::pair<std::string, double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorKind::parse, "eval", "baseline line " + std::to_string(lineno) + " has no tab");
    auto value = detail::parse_number(std::string_view(line).substr(tab + 1));
    if (!value) {
      if (lineno == 1) continue;
      throw Error(ErrorKind::parse, "eval", "baseline line " + std::to_string(lineno) + " has no accuracy");
    }
    out.emplace_back(line.substr(0, tab), *value);
  }
  return out;
}

/// The entropy classifier's accuracy first, then any supplied baselines.
inline std::string accuracy_plot_data(const EvaluationReport& report,
                                      const std::vector<std::pair<std::string, double>>& baselines = {}) {
  std::ostringstream os;
  os << "classifier\taccuracy\n";
  os << "entropy_based\t" << format_shortest(report.accuracy) << '\n';
  for (const auto& [name, acc] : baselines) os << name << '\t' << format_shortest(acc) << '\n';
  return os.str();
}

}  // namespace epool
