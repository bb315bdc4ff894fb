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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epool/classifier.hpp"
#include "epool/error.hpp"
#include "epool/eval.hpp"
#include "epool/ingest.hpp"
#include "epool/pipeline.hpp"

namespace epool::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitUnfittable = 3;
inline constexpr int kExitModelIo = 4;
inline constexpr int kExitUsage = 64;

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
    case ErrorKind::schema_mismatch:
    case ErrorKind::parse:
    case ErrorKind::empty_input:
      return kExitInput;
    case ErrorKind::empty_pool:
    case ErrorKind::undefined_entropy:
    case ErrorKind::unfittable:
      return kExitUnfittable;
    case ErrorKind::model_io:
      return kExitModelIo;
    case ErrorKind::usage:
      return kExitUsage;
  }
  return kExitUsage;
}

/// Effective settings after layering flags over the config file over defaults.
struct RunConfig {
  std::optional<std::string> schema_path;
  Encoding encoding = Encoding::categorical;
  TieBreak tie_break = TieBreak::rejected;
  bool tie_break_explicit = false;
  LabelMapping label_mapping;
  bool expand_binary = false;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

/// Values given on the command line; unset fields defer to the config file.
struct FlagValues {
  std::optional<std::string> schema;
  std::optional<std::string> config;
  std::optional<std::size_t> threads;
  std::optional<std::string> encoding;
  std::optional<std::string> tie_break;
  std::optional<std::string> positive_label;
  std::optional<std::string> negative_label;
  bool expand_binary = false;
};

inline RunConfig resolve_config(const FlagValues& flags) {
  RunConfig cfg;
  nlohmann::json file = nlohmann::json::object();
  if (flags.config) {
    std::ifstream in(*flags.config);
    if (!in) throw Error(ErrorKind::io, "cli", "cannot open config " + *flags.config);
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::parse, "cli", "config " + *flags.config + ": " + e.what());
    }
    if (!file.is_object()) throw Error(ErrorKind::parse, "cli", "config must be a JSON object");
    static const std::set<std::string> known = {"schema", "encoding", "tie_break", "threads",
                                                "positive_label", "negative_label", "expand_binary"};
    for (const auto& [key, _] : file.items())
      if (!known.count(key)) throw Error(ErrorKind::usage, "cli", "unknown config key '" + key + "'");
  }
  auto pick = [&](const std::optional<std::string>& flag, const char* key) -> std::optional<std::string> {
    if (flag) return flag;
    if (file.contains(key)) return file[key].get<std::string>();
    return std::nullopt;
  };
  try {
    cfg.schema_path = pick(flags.schema, "schema");
    if (auto e = pick(flags.encoding, "encoding")) cfg.encoding = parse_encoding(*e);
    if (auto t = pick(flags.tie_break, "tie_break")) {
      cfg.tie_break = parse_tie_break(*t);
      cfg.tie_break_explicit = true;
    }
    if (auto p = pick(flags.positive_label, "positive_label")) cfg.label_mapping.positive = *p;
    if (auto n = pick(flags.negative_label, "negative_label")) cfg.label_mapping.negative = *n;
    if (flags.threads) cfg.threads = *flags.threads;
    else if (file.contains("threads")) cfg.threads = file["threads"].get<std::size_t>();
    cfg.expand_binary = flags.expand_binary || file.value("expand_binary", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::usage, "cli", std::string("config value has the wrong type: ") + e.what());
  }
  if (cfg.label_mapping.positive == cfg.label_mapping.negative)
    throw Error(ErrorKind::usage, "cli", "positive and negative labels must differ");
  return cfg;
}

namespace detail {

inline void require_file(const std::string& path, ErrorKind kind, const char* what) {
  if (!std::filesystem::is_regular_file(path))
    throw Error(kind, "cli", std::string(what) + " not found: " + path);
}

inline void require_output_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw Error(ErrorKind::usage, "cli", "output directory does not exist: " + parent.string());
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cli", "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::io, "cli", "write failed for " + path);
}

}  // namespace detail

inline int cmd_fit(const RunConfig& cfg, const std::string& train_csv, const std::string& out_path,
                   std::ostream& out) {
  if (!cfg.schema_path) throw Error(ErrorKind::usage, "cli", "fit needs --schema");
  detail::require_file(train_csv, ErrorKind::io, "training file");
  detail::require_file(*cfg.schema_path, ErrorKind::io, "schema file");
  detail::require_output_dir(out_path);

  const auto schema = load_schema(*cfg.schema_path);
  const auto raw = load_csv(train_csv, schema);
  TrainOptions options{cfg.encoding, cfg.expand_binary, cfg.label_mapping, cfg.tie_break};
  const auto model = train(raw, options);
  save_model(model, out_path);

  out << "rows: " << raw.row_count;
  if (raw.meta.dropped_column_count())
    out << " (" << raw.meta.dropped_column_count() << " unlisted file columns dropped)";
  out << "\nattributes: " << model.classifier.attributes().size() << "\n";
  for (const auto& col : raw.meta.all_missing_numeric)
    out << "warning: numeric column '" << col << "' is entirely missing; filled with 0\n";
  for (ClassTag t : {ClassTag::positive, ClassTag::negative}) {
    const auto& pool = model.classifier.pool(t);
    out << to_string(t) << " pool (label " << model.classifier.label_mapping.token_of(t)
        << "): n_rows " << pool.n_rows() << ", alpha " << format_17g(pool.reference_metric()) << "\n";
  }
  return kExitOk;
}

/// Prediction rows as CSV: row index (0-based), label, both DEMs, margin.
inline std::string predictions_csv(const std::vector<Prediction>& predictions) {
  std::ostringstream os;
  os << "row,predicted_label,dem_positive,dem_negative,decision_margin\n";
  for (std::size_t r = 0; r < predictions.size(); ++r) {
    const auto& e = predictions[r].evaluation;
    os << r << ',' << csv::escape(predictions[r].label) << ','
       << format_shortest(e.of(ClassTag::positive).dem) << ','
       << format_shortest(e.of(ClassTag::negative).dem) << ',' << format_shortest(e.decision_margin) << '\n';
  }
  return os.str();
}

inline TrainedModel load_for_cli(const RunConfig& cfg, const std::string& model_path) {
  auto model = load_model(model_path);
  if (cfg.tie_break_explicit) model.classifier.tie_break = cfg.tie_break;
  return model;
}

inline int cmd_predict(const RunConfig& cfg, const std::string& model_path, const std::string& input_csv,
                       const std::optional<std::string>& out_path, std::ostream& out) {
  detail::require_file(model_path, ErrorKind::model_io, "model file");
  detail::require_file(input_csv, ErrorKind::io, "input file");
  if (out_path) detail::require_output_dir(*out_path);

  const auto model = load_for_cli(cfg, model_path);
  const auto raw = load_csv(input_csv, model.preprocessor.schema, LoadOptions{.require_label = false});
  const auto table = model.preprocessor.transform(raw);
  const auto text = predictions_csv(predict_batch(model.classifier, table, cfg.threads));
  if (out_path) detail::write_text(*out_path, text);
  else out << text;
  return kExitOk;
}

inline int cmd_evaluate(const RunConfig& cfg, const std::string& model_path, const std::string& test_csv,
                        const std::optional<std::string>& report_path, std::ostream& out) {
  detail::require_file(model_path, ErrorKind::model_io, "model file");
  detail::require_file(test_csv, ErrorKind::io, "test file");
  if (report_path) detail::require_output_dir(*report_path);

  const auto model = load_for_cli(cfg, model_path);
  const auto raw = load_csv(test_csv, model.preprocessor.schema);
  const auto table = model.preprocessor.transform(raw);
  const auto report = evaluate(model.classifier, table, cfg.threads);
  out << to_text(report);
  if (report_path) detail::write_text(*report_path, to_json(report).dump(2) + "\n");
  return kExitOk;
}

inline int cmd_inspect(const std::string& model_path, const std::optional<std::string>& table_path,
                       const std::vector<std::string>& plot, const std::optional<std::string>& report_path,
                       const std::optional<std::string>& baselines_path) {
  if (table_path.has_value() == !plot.empty())
    throw Error(ErrorKind::usage, "cli", "inspect needs exactly one of --entropy-table or --plot-data");
  std::optional<PlotKind> kind;
  if (!plot.empty()) {
    if (plot.size() != 2) throw Error(ErrorKind::usage, "cli", "--plot-data takes KIND OUT");
    kind = parse_plot_kind(plot[0]);
    if (*kind == PlotKind::accuracy_bars && !report_path)
      throw Error(ErrorKind::usage, "cli", "accuracy_bars needs --report");
  }
  detail::require_file(model_path, ErrorKind::model_io, "model file");
  if (report_path) detail::require_file(*report_path, ErrorKind::io, "report file");
  if (baselines_path) detail::require_file(*baselines_path, ErrorKind::io, "baselines file");
  const std::string& out_path = table_path ? *table_path : plot[1];
  detail::require_output_dir(out_path);

  const auto model = load_model(model_path);
  if (table_path) {
    detail::write_text(out_path, entropy_table(model.classifier));
  } else if (*kind == PlotKind::entropy_per_attribute) {
    detail::write_text(out_path, entropy_plot_data(model.classifier));
  } else {
    std::ifstream rin(*report_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(rin);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::parse, "cli", "report " + *report_path + ": " + e.what());
    }
    std::vector<std::pair<std::string, double>> baselines;
    if (baselines_path) {
      std::ifstream bin(*baselines_path);
      baselines = read_baselines(bin);
    }
    detail::write_text(out_path, accuracy_plot_data(report_from_json(j), baselines));
  }
  return kExitOk;
}

/// Parses `args` (args[0] is the program name) and runs one subcommand.
/// Returns the process exit code; diagnostics go to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy-pool binary classifier: fit, predict, evaluate, inspect"};
  app.require_subcommand(1);
  app.fallthrough();

  FlagValues flags;
  app.add_option("--schema", flags.schema, "Schema JSON file");
  app.add_option("--config", flags.config, "Config JSON file (flags take precedence)");
  app.add_option("--threads", flags.threads, "Worker threads for prediction (0 = auto)");
  app.add_option("--encoding", flags.encoding, "categorical | onehot")
      ->check(CLI::IsMember({"categorical", "onehot"}));
  app.add_option("--tie-break", flags.tie_break, "rejected | accepted")
      ->check(CLI::IsMember({"rejected", "accepted"}));

  std::string train_csv, model_path, input_csv, out_path;
  std::optional<std::string> pred_out, report_path, table_path, inspect_report, baselines;
  std::vector<std::string> plot;

  auto* fit_cmd = app.add_subcommand("fit", "Fit a model from labeled training data");
  fit_cmd->add_option("train", train_csv, "Training CSV")->required();
  fit_cmd->add_option("--out", out_path, "Model file to write")->required();
  fit_cmd->add_option("--positive-label", flags.positive_label, "Label token of the accepted class");
  fit_cmd->add_option("--negative-label", flags.negative_label, "Label token of the rejected class");
  fit_cmd->add_flag("--expand-binary", flags.expand_binary, "One-hot expand two-category attributes too");

  auto* predict_cmd = app.add_subcommand("predict", "Classify rows of a CSV");
  predict_cmd->add_option("model", model_path, "Model file")->required();
  predict_cmd->add_option("input", input_csv, "Input CSV")->required();
  predict_cmd->add_option("--out", pred_out, "Predictions CSV (default: stdout)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on labeled data");
  eval_cmd->add_option("model", model_path, "Model file")->required();
  eval_cmd->add_option("test", input_csv, "Labeled test CSV")->required();
  eval_cmd->add_option("--report", report_path, "JSON report to write");

  auto* inspect_cmd = app.add_subcommand("inspect", "Emit entropy tables and plot data");
  inspect_cmd->add_option("model", model_path, "Model file")->required();
  auto* table_opt = inspect_cmd->add_option("--entropy-table", table_path, "Per-attribute entropy TSV");
  auto* plot_opt = inspect_cmd->add_option("--plot-data", plot, "KIND OUT (accuracy_bars | entropy_per_attribute)")
                       ->expected(2);
  table_opt->excludes(plot_opt);
  inspect_cmd->add_option("--report", inspect_report, "Evaluation report JSON (accuracy_bars)");
  inspect_cmd->add_option("--baselines", baselines, "TSV of name<TAB>accuracy to merge (accuracy_bars)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const auto cfg = resolve_config(flags);
    if (*fit_cmd) return cmd_fit(cfg, train_csv, out_path, out);
    if (*predict_cmd) return cmd_predict(cfg, model_path, input_csv, pred_out, out);
    if (*eval_cmd) return cmd_evaluate(cfg, model_path, input_csv, report_path, out);
    return cmd_inspect(model_path, table_path, plot, inspect_report, baselines);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "] " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace epool::cli
