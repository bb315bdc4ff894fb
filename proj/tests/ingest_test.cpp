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

#include <sstream>
#include <string>

#include "epool/ingest.hpp"
#include "test_util.hpp"

namespace epool {
namespace {

Schema basic_schema() {
  return Schema({{"a", Role::feature, Kind::numeric},
                 {"b", Role::feature, Kind::categorical},
                 {"loan_status", Role::label, Kind::categorical}});
}

RawTable parse(const std::string& text, const Schema& schema = basic_schema(), LoadOptions opts = {}) {
  std::istringstream in(text);
  return read_csv(in, schema, opts);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::usage;
}

TEST(Schema, ParsesJsonAndRejectsUnknownKeys) {
  const auto schema = schema_from_json(nlohmann::json::parse(R"({"columns": [
      {"name": "a", "role": "feature", "kind": "numeric"},
      {"name": "id", "role": "ignore", "kind": "categorical"},
      {"name": "y", "role": "label", "kind": "categorical"}]})"));
  EXPECT_EQ(schema.columns().size(), 3u);
  EXPECT_EQ(schema.label().name, "y");
  EXPECT_EQ(schema.columns()[0].missing_policy, MissingPolicy::mean);
  EXPECT_EQ(schema.columns()[1].missing_policy, MissingPolicy::missing_category);

  EXPECT_THROW(schema_from_json(nlohmann::json::parse(
                   R"({"columns": [{"name": "y", "role": "label", "kind": "categorical", "extra": 1}]})")),
               Error);
  EXPECT_THROW(schema_from_json(nlohmann::json::parse(
                   R"({"columns": [{"name": "y", "role": "label", "kind": "categorical"}], "v": 2})")),
               Error);
}

TEST(Schema, RequiresExactlyOneCategoricalLabel) {
  EXPECT_THROW(Schema({{"a", Role::feature, Kind::numeric}}), Error);
  EXPECT_THROW(Schema({{"a", Role::label, Kind::categorical}, {"b", Role::label, Kind::categorical}}), Error);
  EXPECT_THROW(Schema({{"a", Role::label, Kind::numeric}}), Error);
  EXPECT_THROW(Schema({{"a", Role::label, Kind::categorical}, {"a", Role::feature, Kind::numeric}}), Error);
}

TEST(Schema, FingerprintTracksDeclarations) {
  const auto a = basic_schema();
  auto cols = a.columns();
  cols[1].kind = Kind::numeric;
  EXPECT_EQ(a.fingerprint(), basic_schema().fingerprint());
  EXPECT_NE(a.fingerprint(), Schema(cols).fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 16u);
}

TEST(LoadCsv, ThreeRows) {
  const auto t = parse("a,b,loan_status\n1,x,0\n2,y,1\n3,x,0\n");
  EXPECT_EQ(t.row_count, 3u);
  EXPECT_EQ(t.numeric(0)[2], 3.0);
  EXPECT_EQ(t.categorical(1)[1], "y");
  EXPECT_EQ(t.categorical(2)[0], "0");
}

TEST(LoadCsv, EmptyNumericCellIsMissing) {
  const auto t = parse("a,b,loan_status\n,x,0\n  ,y,1\nabc,z,1\n");
  EXPECT_FALSE(t.numeric(0)[0].has_value());
  EXPECT_FALSE(t.numeric(0)[1].has_value());
  EXPECT_FALSE(t.numeric(0)[2].has_value());  // unparseable
  EXPECT_EQ(t.missing_count(), 3u);
}

TEST(LoadCsv, HeaderMissingSchemaColumn) {
  try {
    parse("a,b\n1,x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema_mismatch);
    EXPECT_NE(std::string(e.what()).find("loan_status"), std::string::npos);
  }
}

TEST(LoadCsv, LabelOptionalForPrediction) {
  const auto t = parse("a,b\n1,x\n", basic_schema(), LoadOptions{.require_label = false});
  EXPECT_FALSE(t.label_present);
  EXPECT_EQ(t.row_count, 1u);
}

TEST(LoadCsv, InconsistentRowWidthNamesRow) {
  try {
    parse("a,b,loan_status\n1,x,0\n2,y\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(LoadCsv, QuotedFieldsAndExtraColumns) {
  const auto t = parse("note,a,b,loan_status,zip\r\n\"hello, \"\"world\"\"\",1.5,\"multi\nline\",1,123\r\n");
  EXPECT_EQ(t.row_count, 1u);
  EXPECT_EQ(t.numeric(0)[0], 1.5);
  EXPECT_EQ(t.categorical(1)[0], "multi\nline");
  EXPECT_EQ(t.meta.dropped_column_count(), 2u);
}

TEST(LoadCsv, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { load_csv("/nonexistent/file.csv", basic_schema()); }), ErrorKind::io);
}

TEST(LoadCsv, NoHeaderIsParseError) {
  EXPECT_EQ(kind_of([] { parse(""); }), ErrorKind::parse);
}

TEST(LoadCsv, UnterminatedQuote) {
  EXPECT_EQ(kind_of([] { parse("a,b,loan_status\n1,\"x,0\n"); }), ErrorKind::parse);
}

TEST(Impute, NumericMeanFill) {
  const auto t = impute(parse("a,b,loan_status\n2,x,0\n,x,1\n4,x,0\n"));
  EXPECT_EQ(t.numeric(0)[1], 3.0);
  EXPECT_EQ(t.missing_count(), 0u);
}

TEST(Impute, CategoricalMissingToken) {
  const auto t = impute(parse("a,b,loan_status\n1,A,0\n1,,1\n1,A,0\n"));
  EXPECT_EQ(t.categorical(1)[1], "MISSING");
  EXPECT_EQ(t.categorical(1)[0], "A");
}

TEST(Impute, AllMissingNumericFilledWithZeroAndFlagged) {
  const auto t = impute(parse("a,b,loan_status\n,A,0\n,B,1\n"));
  EXPECT_EQ(t.numeric(0)[0], 0.0);
  EXPECT_EQ(t.numeric(0)[1], 0.0);
  ASSERT_EQ(t.meta.all_missing_numeric.size(), 1u);
  EXPECT_EQ(t.meta.all_missing_numeric[0], "a");
}

TEST(Impute, UsesSuppliedFillValues) {
  ImputeValues v;
  v.numeric_fill["a"] = 42.0;
  const auto t = impute(parse("a,b,loan_status\n,A,0\n7,B,1\n"), v);
  EXPECT_EQ(t.numeric(0)[0], 42.0);
  EXPECT_EQ(t.numeric(0)[1], 7.0);
}

// Property: idempotent, never touches present cells, preserves shape.
TEST(Impute, Properties) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::ostringstream csv;
    csv << "a,b,loan_status\n";
    const int rows = 1 + static_cast<int>(rng() % 20);
    for (int r = 0; r < rows; ++r) {
      if (rng() % 3) csv << static_cast<double>(rng() % 1000) / 7.0;
      csv << ',';
      if (rng() % 3) csv << "c" << rng() % 4;
      csv << ',' << rng() % 2 << '\n';
    }
    const auto raw = parse(csv.str());
    const auto once = impute(raw);
    const auto twice = impute(once);
    EXPECT_EQ(once.columns, twice.columns);
    EXPECT_EQ(once.row_count, raw.row_count);
    EXPECT_EQ(once.columns.size(), raw.columns.size());
    for (std::size_t i = 0; i < raw.columns.size(); ++i)
      std::visit([&](const auto& col) {
        using T = std::decay_t<decltype(col)>;
        const auto& filled = std::get<T>(once.columns[i]);
        for (std::size_t r = 0; r < col.size(); ++r)
          if (col[r]) {
            EXPECT_EQ(filled[r], col[r]);
          }
      }, raw.columns[i]);
  }
}

}  // namespace
}  // namespace epool
