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

#ifndef DARE_REPORT_H_
#define DARE_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "dare/eval.h"
#include "json.hpp"

namespace dare {

nlohmann::ordered_json to_json(const EvalResult& result,
                               const RelationSchema& schema);
nlohmann::ordered_json to_json(const MetricSummary& summary);
nlohmann::ordered_json to_json(const RunSummary& summary);
nlohmann::ordered_json to_json(const McNemarResult& result);

// Fixed-width plain-text table.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  std::string render() const;
  // Comma-separated form of the same cells.
  std::string csv() const;

 private:
  std::vector<std::vector<std::string>> rows_;
};

// "0.6621" style formatting for scores.
std::string format_score(double value, int digits = 4);
// "0.6621 ± 0.0123".
std::string format_summary(const MetricSummary& summary);

void write_text_file(const std::filesystem::path& file,
                     const std::string& content);

}  // namespace dare

#endif  // DARE_REPORT_H_
