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

#include "dare/eval.h"

#include <cmath>
#include <numeric>

#include "dare/error.h"

namespace dare {

double f1_score(double precision, double recall) {
  return precision + recall > 0.0
             ? 2.0 * precision * recall / (precision + recall)
             : 0.0;
}

EvalResult evaluate_indices(const std::vector<size_t>& predictions,
                            const std::vector<size_t>& gold,
                            const RelationSchema& schema) {
  if (predictions.size() != gold.size())
    throw Error("evaluate: " + std::to_string(predictions.size()) +
                " predictions for " + std::to_string(gold.size()) +
                " gold labels");
  const size_t k = schema.num_classes();
  const size_t null = schema.null_index();

  EvalResult result;
  result.confusion.assign(k, std::vector<size_t>(k, 0));
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= k || predictions[i] >= k)
      throw Error("evaluate: class index out of range");
    ++result.confusion[gold[i]][predictions[i]];
  }

  for (size_t c = 0; c < null; ++c) {
    ClassScore score;
    for (size_t j = 0; j < k; ++j) {
      score.support += result.confusion[c][j];
      if (j != c) score.fp += result.confusion[j][c];
    }
    score.tp = result.confusion[c][c];
    score.fn = score.support - score.tp;
    if (score.tp + score.fp > 0)
      score.precision = static_cast<double>(score.tp) /
                        static_cast<double>(score.tp + score.fp);
    if (score.support > 0) {
      score.recall =
          static_cast<double>(score.tp) / static_cast<double>(score.support);
      score.f1 = f1_score(score.precision.value_or(0.0), *score.recall);
    }
    result.tp += score.tp;
    result.fp += score.fp;
    result.fn += score.fn;
    result.per_class.emplace(schema.relation_types[c], score);
  }

  if (result.tp + result.fp > 0)
    result.micro_precision = static_cast<double>(result.tp) /
                             static_cast<double>(result.tp + result.fp);
  if (result.tp + result.fn > 0)
    result.micro_recall = static_cast<double>(result.tp) /
                          static_cast<double>(result.tp + result.fn);
  result.micro_f1 = f1_score(result.micro_precision, result.micro_recall);
  return result;
}

EvalResult evaluate(const std::vector<std::string>& predictions,
                    const std::vector<std::string>& gold,
                    const RelationSchema& schema) {
  if (predictions.size() != gold.size())
    throw Error("evaluate: " + std::to_string(predictions.size()) +
                " predictions for " + std::to_string(gold.size()) +
                " gold labels");
  auto to_index = [&](const std::string& label) {
    const auto index = schema.class_index(label);
    if (!index) throw Error("evaluate: unknown label '" + label + "'");
    return *index;
  };
  std::vector<size_t> p;
  std::vector<size_t> g;
  p.reserve(predictions.size());
  g.reserve(gold.size());
  for (const auto& label : predictions) p.push_back(to_index(label));
  for (const auto& label : gold) g.push_back(to_index(label));
  return evaluate_indices(p, g, schema);
}

McNemarResult mcnemar_from_counts(size_t b, size_t c) {
  McNemarResult result;
  result.b = b;
  result.c = c;
  if (b + c == 0) return result;
  const double diff =
      std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
  result.statistic = diff * diff / static_cast<double>(b + c);
  // Upper tail of chi-square with one degree of freedom.
  result.p_value = std::erfc(std::sqrt(result.statistic / 2.0));
  result.significant_at_05 = result.statistic > kChiSquare1Df05;
  return result;
}

McNemarResult mcnemar(const std::vector<std::string>& preds_a,
                      const std::vector<std::string>& preds_b,
                      const std::vector<std::string>& gold) {
  if (preds_a.size() != gold.size() || preds_b.size() != gold.size())
    throw Error("mcnemar: prediction and gold lists differ in length");
  size_t b = 0;
  size_t c = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    const bool a_right = preds_a[i] == gold[i];
    const bool b_right = preds_b[i] == gold[i];
    if (a_right && !b_right) ++b;
    if (!a_right && b_right) ++c;
  }
  return mcnemar_from_counts(b, c);
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary summary;
  summary.runs = values.size();
  if (values.empty()) return summary;
  summary.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                 static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - summary.mean) * (v - summary.mean);
    summary.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return summary;
}

RunSummary aggregate_runs(const std::vector<EvalResult>& results) {
  if (results.empty()) throw Error("aggregate_runs: no results");
  std::vector<double> p, r, f;
  std::map<std::string, std::vector<double>> per_class;
  for (const auto& result : results) {
    p.push_back(result.micro_precision);
    r.push_back(result.micro_recall);
    f.push_back(result.micro_f1);
    for (const auto& [label, score] : result.per_class)
      if (score.f1) per_class[label].push_back(*score.f1);
  }
  RunSummary summary{summarize(p), summarize(r), summarize(f), {}};
  for (const auto& [label, values] : per_class)
    summary.per_class_f1[label] = summarize(values);
  return summary;
}

}  // namespace dare
