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


#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epool/cli.hpp"
#include "test_util.hpp"

namespace epool {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

const char* kSchema = R"({"columns": [
  {"name": "member_id", "role": "ignore", "kind": "categorical"},
  {"name": "loan_amnt", "role": "feature", "kind": "numeric"},
  {"name": "grade", "role": "feature", "kind": "categorical"},
  {"name": "term", "role": "feature", "kind": "categorical"},
  {"name": "loan_status", "role": "label", "kind": "categorical"}]})";

// Positive rows lean to high amounts and grade A, negative rows the reverse.
std::string synthetic_csv(std::size_t rows, unsigned seed, bool with_label = true, bool separable = false) {
  std::mt19937 rng(seed);
  std::ostringstream os;
  os << "member_id,loan_amnt,grade,term" << (with_label ? ",loan_status" : "") << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    const bool pos = r % 2 == 0;
    const bool typical = separable || rng() % 10 < 8;
    const bool high = pos == typical;
    os << r << ',' << (high ? 7000 + rng() % 3000 : rng() % 2000) << ','
       << (separable ? (pos ? "A" : "D") : (high ? "A" : "C")) << ','
       << (rng() % 2 ? "36 months" : "60 months");
    if (with_label) os << ',' << (pos ? 1 : 0);
    os << '\n';
  }
  return os.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "epool");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file(dir.file("schema.json"), kSchema);
    write_file(dir.file("train.csv"), synthetic_csv(100, 1));
  }
  std::string fit_model(std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"fit", dir.file("train.csv"), "--schema", dir.file("schema.json"), "--out",
                                  dir.file("model.json")};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return dir.file("model.json");
  }
  TempDir dir{"cli"};
};

TEST_F(CliTest, FitWritesModelAndReportsPools) {
  const auto r = run({"fit", dir.file("train.csv"), "--schema", dir.file("schema.json"), "--out",
                      dir.file("model.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("positive pool (label 1): n_rows 50"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("negative pool (label 0): n_rows 50"), std::string::npos);
  EXPECT_NE(r.out.find("alpha"), std::string::npos);
  EXPECT_NO_THROW(load_model(dir.file("model.json")));
}

TEST_F(CliTest, GlobalFlagsMayFollowTheSubcommand) {
  const auto r = run({"--encoding", "onehot", "fit", dir.file("train.csv"), "--out", dir.file("m.json"),
                      "--schema", dir.file("schema.json"), "--tie-break", "accepted"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = load_model(dir.file("m.json"));
  EXPECT_EQ(m.preprocessor.encoding, Encoding::onehot);
  EXPECT_EQ(m.classifier.tie_break, TieBreak::accepted);
}

TEST_F(CliTest, MissingLabelColumnExits2) {
  write_file(dir.file("nolabel.csv"), synthetic_csv(10, 2, false));
  const auto r = run({"fit", dir.file("nolabel.csv"), "--schema", dir.file("schema.json"), "--out",
                      dir.file("m.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("loan_status"), std::string::npos);
}

TEST_F(CliTest, SingleClassExits3) {
  write_file(dir.file("one.csv"), "member_id,loan_amnt,grade,term,loan_status\n1,10,A,x,1\n2,20,B,y,1\n");
  const auto r = run({"fit", dir.file("one.csv"), "--schema", dir.file("schema.json"), "--out", dir.file("m.json")});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliTest, MissingSchemaOrInputs) {
  EXPECT_EQ(run({"fit", dir.file("train.csv"), "--out", dir.file("m.json")}).code, 64);
  EXPECT_EQ(run({"fit", dir.file("nope.csv"), "--schema", dir.file("schema.json"), "--out", dir.file("m.json")}).code,
            2);
  EXPECT_EQ(run({"predict", dir.file("nope.json"), dir.file("train.csv")}).code, 4);
  EXPECT_EQ(run({"bogus"}).code, 64);
  EXPECT_EQ(run({}).code, 64);
  EXPECT_EQ(run({"--encoding", "weird", "fit", dir.file("train.csv"), "--schema", dir.file("schema.json"), "--out",
                 dir.file("m.json")}).code,
            64);
}

TEST_F(CliTest, PredictWritesAuditRows) {
  const auto model = fit_model();
  write_file(dir.file("in.csv"),
             "member_id,loan_amnt,grade,term\n1,9000,A,36 months\n2,100,C,60 months\n3,5000,ZZ,new term\n");
  const auto r = run({"predict", model, dir.file("in.csv"), "--out", dir.file("pred.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(read_file(dir.file("pred.csv")));
  std::vector<std::string> rows;
  for (std::string l; std::getline(in, l);) rows.push_back(l);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "row,predicted_label,dem_positive,dem_negative,decision_margin");
  EXPECT_EQ(rows[1].substr(0, 4), "0,1,");
  EXPECT_EQ(rows[2].substr(0, 4), "1,0,");
  EXPECT_EQ(rows[3].substr(0, 2), "2,");  // unseen tokens still classified
}

TEST_F(CliTest, PredictToStdoutAndCorruptModel) {
  const auto model = fit_model();
  write_file(dir.file("in.csv"), "member_id,loan_amnt,grade,term\n1,9000,A,36 months\n");
  const auto r = run({"predict", model, dir.file("in.csv")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("row,predicted_label", 0), 0u);

  const auto text = read_file(model);
  write_file(dir.file("broken.json"), text.substr(0, text.size() / 3));
  EXPECT_EQ(run({"predict", dir.file("broken.json"), dir.file("in.csv")}).code, 4);
}

TEST_F(CliTest, EvaluatePrintsAccuracyAndWritesReport) {
  write_file(dir.file("sep.csv"), synthetic_csv(60, 3, true, true));
  const auto fit_r = run({"fit", dir.file("sep.csv"), "--schema", dir.file("schema.json"), "--out",
                          dir.file("sep.json")});
  ASSERT_EQ(fit_r.code, 0) << fit_r.err;
  write_file(dir.file("sep_test.csv"), synthetic_csv(40, 4, true, true));
  const auto r = run({"evaluate", dir.file("sep.json"), dir.file("sep_test.csv"), "--report", dir.file("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy: 1.0000"), std::string::npos) << r.out;
  const auto j = nlohmann::json::parse(read_file(dir.file("r.json")));
  EXPECT_EQ(j["accuracy"], 1.0);
  EXPECT_EQ(j["n_total"], 40);
}

TEST_F(CliTest, EvaluateRejectsEmptyAndUnknownLabels) {
  const auto model = fit_model();
  write_file(dir.file("empty.csv"), "member_id,loan_amnt,grade,term,loan_status\n");
  EXPECT_EQ(run({"evaluate", model, dir.file("empty.csv")}).code, 2);
  write_file(dir.file("odd.csv"), "member_id,loan_amnt,grade,term,loan_status\n1,10,A,x,7\n");
  const auto r = run({"evaluate", model, dir.file("odd.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'7'"), std::string::npos);
}

TEST_F(CliTest, InspectEmitsTables) {
  const auto model = fit_model();
  ASSERT_EQ(run({"inspect", model, "--entropy-table", dir.file("t.tsv")}).code, 0);
  const auto table = read_file(dir.file("t.tsv"));
  EXPECT_EQ(table.rfind("pool\tattribute\tentropy\n", 0), 0u);
  EXPECT_NE(table.find("positive\tloan_amnt\t"), std::string::npos);

  ASSERT_EQ(run({"inspect", model, "--plot-data", "entropy_per_attribute", dir.file("p.tsv")}).code, 0);
  EXPECT_EQ(read_file(dir.file("p.tsv")).rfind("pool\tindex\tattribute\tentropy\n", 0), 0u);

  write_file(dir.file("test.csv"), synthetic_csv(20, 5));
  ASSERT_EQ(run({"evaluate", model, dir.file("test.csv"), "--report", dir.file("r.json")}).code, 0);
  write_file(dir.file("base.tsv"), "rf\t0.85\nsvm\t0.73\n");
  const auto r = run({"inspect", model, "--plot-data", "accuracy_bars", dir.file("a.tsv"), "--report",
                      dir.file("r.json"), "--baselines", dir.file("base.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(read_file(dir.file("a.tsv")).find("svm\t0.73\n"), std::string::npos);
}

TEST_F(CliTest, InspectUsageErrors) {
  const auto model = fit_model();
  EXPECT_EQ(run({"inspect", model, "--plot-data", "roc", dir.file("p.tsv")}).code, 64);
  EXPECT_EQ(run({"inspect", model, "--entropy-table", dir.file("t.tsv"), "--plot-data", "entropy_per_attribute",
                 dir.file("p.tsv")}).code,
            64);
  EXPECT_EQ(run({"inspect", model}).code, 64);
  EXPECT_EQ(run({"inspect", model, "--plot-data", "accuracy_bars", dir.file("a.tsv")}).code, 64);
}

TEST_F(CliTest, ConfigFileSitsBelowFlags) {
  write_file(dir.file("cfg.json"),
             std::string(R"({"schema": ")") + dir.file("schema.json") +
                 R"(", "encoding": "onehot", "tie_break": "accepted", "threads": 2})");
  auto r = run({"fit", dir.file("train.csv"), "--config", dir.file("cfg.json"), "--out", dir.file("a.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto m = load_model(dir.file("a.json"));
  EXPECT_EQ(m.preprocessor.encoding, Encoding::onehot);
  EXPECT_EQ(m.classifier.tie_break, TieBreak::accepted);

  r = run({"fit", dir.file("train.csv"), "--config", dir.file("cfg.json"), "--encoding", "categorical", "--out",
           dir.file("b.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_model(dir.file("b.json")).preprocessor.encoding, Encoding::categorical);

  write_file(dir.file("bad.json"), R"({"colour": "blue"})");
  EXPECT_EQ(run({"fit", dir.file("train.csv"), "--config", dir.file("bad.json"), "--out", dir.file("c.json")}).code,
            64);
}

TEST(ExitCodes, StableMapping) {
  EXPECT_EQ(cli::exit_code_for(ErrorKind::schema_mismatch), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::io), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::unfittable), 3);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::model_io), 4);
  EXPECT_EQ(cli::exit_code_for(ErrorKind::usage), 64);
}

}  // namespace
}  // namespace epool
