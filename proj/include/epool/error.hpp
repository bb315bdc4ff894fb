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

#include <stdexcept>
#include <string>

namespace epool {

enum class ErrorKind {
  io,               // input file unreadable
  schema_mismatch,  // declared schema and data disagree
  parse,            // malformed delimited text or JSON
  empty_input,      // a table that must have rows has none
  empty_pool,       // a pool was built from zero rows
  undefined_entropy,
  unfittable,       // a class has no training rows
  model_io,         // model file missing, corrupt or of another format version
  usage,
};

/// Every library failure is reported as an Error tagged with its kind; the
/// CLI maps the kind onto a stable process exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::schema_mismatch: return "schema_mismatch";
    case ErrorKind::parse: return "parse";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::empty_pool: return "empty_pool";
    case ErrorKind::undefined_entropy: return "undefined_entropy";
    case ErrorKind::unfittable: return "unfittable";
    case ErrorKind::model_io: return "model_io";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

}  // namespace epool
