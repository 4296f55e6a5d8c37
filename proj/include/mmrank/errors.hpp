// Copyright 2026 The mmrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMRANK_ERRORS_HPP
#define MMRANK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mmrank {

// Invalid flag/option combinations, bad model grids, out-of-range requests.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input rows; carries the 1-based data row when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int row = -1)
      : std::runtime_error(row >= 0 ? msg + " (row " + std::to_string(row) + ")"
                                    : msg),
        row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

// Contradictory or inconsistent records (duplicate games that disagree, ...).
class DataIntegrityError : public std::runtime_error {
 public:
  explicit DataIntegrityError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// A solver hit its iteration cap or produced a singular system.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// An oracle/verification check failed its tolerance.
class VerificationError : public std::runtime_error {
 public:
  explicit VerificationError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace mmrank

#endif  // MMRANK_ERRORS_HPP
