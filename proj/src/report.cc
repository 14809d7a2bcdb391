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

#include "dare/report.h"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "dare/error.h"

namespace dare {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const EvalResult& result, const RelationSchema& schema) {
  ordered_json per_class = ordered_json::object();
  for (const auto& type : schema.relation_types) {
    const ClassScore& score = result.per_class.at(type);
    ordered_json entry;
    entry["support"] = score.support;
    entry["tp"] = score.tp;
    entry["fp"] = score.fp;
    entry["fn"] = score.fn;
    if (score.precision) entry["precision"] = *score.precision;
    if (score.recall) entry["recall"] = *score.recall;
    if (score.f1) entry["f1"] = *score.f1;
    per_class[type] = std::move(entry);
  }
  ordered_json out;
  out["micro_precision"] = result.micro_precision;
  out["micro_recall"] = result.micro_recall;
  out["micro_f1"] = result.micro_f1;
  out["tp"] = result.tp;
  out["fp"] = result.fp;
  out["fn"] = result.fn;
  out["per_class"] = std::move(per_class);
  out["confusion"] = result.confusion;
  return out;
}

ordered_json to_json(const MetricSummary& summary) {
  return ordered_json{{"mean", summary.mean},
                      {"std", summary.stddev},
                      {"runs", summary.runs}};
}

ordered_json to_json(const RunSummary& summary) {
  ordered_json per_class = ordered_json::object();
  for (const auto& [label, metric] : summary.per_class_f1)
    per_class[label] = to_json(metric);
  ordered_json out;
  out["micro_precision"] = to_json(summary.micro_precision);
  out["micro_recall"] = to_json(summary.micro_recall);
  out["micro_f1"] = to_json(summary.micro_f1);
  out["per_class_f1"] = std::move(per_class);
  return out;
}

ordered_json to_json(const McNemarResult& result) {
  return ordered_json{{"b", result.b},
                      {"c", result.c},
                      {"statistic", result.statistic},
                      {"p_value", result.p_value},
                      {"significant_at_05", result.significant_at_05}};
}

TextTable::TextTable(std::vector<std::string> header) {
  rows_.push_back(std::move(header));
}

void TextTable::add_row(std::vector<std::string> row) {
  row.resize(rows_.front().size());
  rows_.push_back(std::move(row));
}

namespace {

// Code points, so "±" counts as one column.
size_t display_width(const std::string& s) {
  size_t n = 0;
  for (unsigned char ch : s)
    if ((ch & 0xC0) != 0x80) ++n;
  return n;
}

}  // namespace

std::string TextTable::render() const {
  std::vector<size_t> width(rows_.front().size(), 0);
  for (const auto& row : rows_)
    for (size_t i = 0; i < row.size(); ++i)
      width[i] = std::max(width[i], display_width(row[i]));
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += "  ";
      out += row[i];
      if (i + 1 < row.size()) out.append(width[i] - display_width(row[i]), ' ');
    }
    out += '\n';
  };
  emit(rows_.front());
  size_t total = 0;
  for (size_t w : width) total += w;
  out.append(total + 2 * (width.size() - 1), '-');
  out += '\n';
  for (size_t r = 1; r < rows_.size(); ++r) emit(rows_[r]);
  return out;
}

std::string TextTable::csv() const {
  std::string out;
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      const bool quote = row[i].find_first_of(",\"") != std::string::npos;
      if (quote) {
        out += '"';
        for (char ch : row[i]) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      } else {
        out += row[i];
      }
    }
    out += '\n';
  }
  return out;
}

std::string format_score(double value, int digits) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

std::string format_summary(const MetricSummary& summary) {
  return format_score(summary.mean) + " ± " + format_score(summary.stddev);
}

void write_text_file(const std::filesystem::path& file,
                     const std::string& content) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << content;
}

}  // namespace dare
