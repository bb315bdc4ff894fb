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

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include "epool/error.hpp"

namespace epool::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

/// Reads comma-separated records with double-quote escaping ("" inside a
/// quoted field is a literal quote). Quoted fields may span lines. CRLF and
/// LF endings are both accepted; blank lines are skipped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool next(Record& out) {
    out.fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool was_quoted = false;
    out.line = line_ + 1;

    int ch;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
      const char c = static_cast<char>(ch);
      any = true;
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && field.empty() && !was_quoted) {
        in_quotes = true;
        was_quoted = true;
      } else if (c == ',') {
        out.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\r') {
        if (in_.peek() == '\n') continue;
        field.push_back(c);
      } else if (c == '\n') {
        ++line_;
        if (out.fields.empty() && field.empty() && !was_quoted) {
          // blank line
          out.line = line_ + 1;
          any = false;
          continue;
        }
        out.fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(c);
      }
    }
    if (in_quotes)
      throw Error(ErrorKind::parse, "ingest", "unterminated quoted field starting on line " +
                                                  std::to_string(out.line));
    if (!any) return false;
    ++line_;
    out.fields.push_back(std::move(field));
    return true;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

/// Quotes a field when it contains a delimiter, quote or line break.
inline std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace epool::csv
