// Copyright 2026 The dare Authors
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

#ifndef DARE_ERROR_H_
#define DARE_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dare {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dataset file or records failed validation. Every offending line is
// reported; `line` is 1-based and 0 when the problem is file-level.
class DatasetError : public Error {
 public:
  struct Issue {
    size_t line = 0;
    std::string message;
  };

  DatasetError(std::string file, std::vector<Issue> issues)
      : Error(format(file, issues)),
        file_(std::move(file)),
        issues_(std::move(issues)) {}

  DatasetError(const std::string& file, size_t line, const std::string& message)
      : DatasetError(file, {Issue{line, message}}) {}

  const std::string& file() const { return file_; }
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  static std::string format(const std::string& file,
                            const std::vector<Issue>& issues) {
    std::string out;
    for (const auto& issue : issues) {
      if (!out.empty()) out += '\n';
      out += file;
      if (issue.line > 0) out += ":" + std::to_string(issue.line);
      out += ": " + issue.message;
    }
    return out;
  }

  std::string file_;
  std::vector<Issue> issues_;
};

// Filtered generation could not produce enough valid samples within its
// attempt budget.
class BudgetExhaustedError : public Error {
 public:
  BudgetExhaustedError(const std::string& label, size_t accepted,
                       size_t attempts)
      : Error("generation budget exhausted for '" + label + "': accepted " +
              std::to_string(accepted) + " after " + std::to_string(attempts) +
              " draws"),
        label_(label),
        accepted_(accepted),
        attempts_(attempts) {}

  const std::string& label() const { return label_; }
  size_t accepted() const { return accepted_; }
  size_t attempts() const { return attempts_; }

 private:
  std::string label_;
  size_t accepted_;
  size_t attempts_;
};

// External generator session failure (spawn, timeout, malformed reply).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace dare

#endif  // DARE_ERROR_H_
