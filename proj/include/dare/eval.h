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

#ifndef DARE_EVAL_H_
#define DARE_EVAL_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dare/corpus.h"

namespace dare {

struct ClassScore {
  size_t support = 0;  // gold instances of the class
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  // Absent when the ratio is 0/0: precision without predictions, recall
  // and f1 without support.
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

// Micro scores pool TP/FP/FN over the relation types only. A null
// prediction is never a true positive, and null-null pairs do not count.
struct EvalResult {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  std::map<std::string, ClassScore> per_class;
  // confusion[gold][predicted] over class indices (null last).
  std::vector<std::vector<size_t>> confusion;
};

EvalResult evaluate(const std::vector<std::string>& predictions,
                    const std::vector<std::string>& gold,
                    const RelationSchema& schema);

// Index-based variant; indices follow RelationSchema::class_index.
EvalResult evaluate_indices(const std::vector<size_t>& predictions,
                            const std::vector<size_t>& gold,
                            const RelationSchema& schema);

// 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall);

struct McNemarResult {
  size_t b = 0;  // system A right, system B wrong
  size_t c = 0;  // system A wrong, system B right
  double statistic = 0.0;
  double p_value = 1.0;
  bool significant_at_05 = false;
};

// Chi-square critical value, 1 degree of freedom, alpha = 0.05.
inline constexpr double kChiSquare1Df05 = 3.841;

// Continuity-corrected McNemar test over per-item correctness.
McNemarResult mcnemar(const std::vector<std::string>& preds_a,
                      const std::vector<std::string>& preds_b,
                      const std::vector<std::string>& gold);
McNemarResult mcnemar_from_counts(size_t b, size_t c);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
  size_t runs = 0;
};

struct RunSummary {
  MetricSummary micro_precision;
  MetricSummary micro_recall;
  MetricSummary micro_f1;
  // Only over runs in which the class had an f1.
  std::map<std::string, MetricSummary> per_class_f1;
};

MetricSummary summarize(const std::vector<double>& values);
RunSummary aggregate_runs(const std::vector<EvalResult>& results);

}  // namespace dare

#endif  // DARE_EVAL_H_
