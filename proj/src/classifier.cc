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

#include "dare/classifier.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dare/error.h"
#include "dare/eval.h"
#include "dare/rng.h"

namespace dare {

using json = nlohmann::json;

namespace {

constexpr std::string_view kLinearFormat = "dare-linear/1";

size_t class_of(const RelationInstance& instance, const RelationSchema& schema) {
  const auto index = schema.class_index(instance.label);
  if (!index) throw Error("unknown label '" + instance.label + "'");
  return *index;
}

uint32_t unigram_feature(std::string_view token, size_t dim) {
  uint64_t h = fnv1a64("u\x1f");
  h = fnv1a64(token, h);
  return static_cast<uint32_t>(h % dim);
}

uint32_t bigram_feature(std::string_view first, std::string_view second,
                        size_t dim) {
  uint64_t h = fnv1a64("b\x1f");
  h = fnv1a64(first, h);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(second, h);
  return static_cast<uint32_t>(h % dim);
}

}  // namespace

ClassWeights compute_class_weights(const std::vector<RelationInstance>& train,
                                   const RelationSchema& schema) {
  std::vector<size_t> freq(schema.num_classes(), 0);
  for (const auto& instance : train) ++freq[class_of(instance, schema)];
  for (size_t c = 0; c < freq.size(); ++c)
    if (freq[c] == 0)
      throw Error("compute_class_weights: class '" + schema.label_of(c) +
                  "' has no training instance");
  const size_t freq_min = *std::min_element(freq.begin(), freq.end());
  ClassWeights out;
  for (size_t f : freq)
    out.weights.push_back(static_cast<double>(freq_min) / static_cast<double>(f));
  return out;
}

void PredictionRule::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error("prediction rule: threshold must lie in (0, 1)");
}

size_t apply_rule(const std::vector<double>& proba, const RelationSchema& schema,
                  const PredictionRule& rule) {
  const size_t null = schema.null_index();
  size_t best = 0;
  for (size_t c = 1; c < null; ++c)
    if (proba[c] > proba[best]) best = c;
  return proba[best] >= rule.threshold ? best : null;
}

double SparseVector::l1_norm() const {
  double total = 0.0;
  for (const auto& [index, value] : entries) total += std::fabs(value);
  return total;
}

SparseVector featurize(const RelationInstance& instance, size_t feature_dim) {
  if (feature_dim == 0) throw Error("featurize: feature_dim must be positive");
  std::map<uint32_t, double> counts;
  const auto& tokens = instance.tokens;
  for (size_t i = 0; i < tokens.size(); ++i) {
    counts[unigram_feature(tokens[i], feature_dim)] += 1.0;
    if (i + 1 < tokens.size())
      counts[bigram_feature(tokens[i], tokens[i + 1], feature_dim)] += 1.0;
  }
  SparseVector out;
  out.entries.assign(counts.begin(), counts.end());
  return out;
}

std::string predict(const Classifier& classifier,
                    const RelationInstance& instance, const PredictionRule& rule) {
  const auto& schema = classifier.schema();
  return schema.label_of(
      apply_rule(classifier.predict_proba(instance), schema, rule));
}

// --- Linear model -------------------------------------------------------

std::vector<double> LinearParameters::proba(const SparseVector& x) const {
  std::vector<double> z(bias);
  for (size_t k = 0; k < num_classes; ++k) {
    const double* row = weights.data() + k * feature_dim;
    for (const auto& [j, v] : x.entries) z[k] += row[j] * v;
  }
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

double weighted_loss(const LinearParameters& params,
                     const std::vector<LabeledVector>& data,
                     const ClassWeights& weights) {
  double loss = 0.0;
  for (const auto& example : data) {
    const auto p = params.proba(example.x);
    loss -= weights.of(example.label) *
            std::log(std::max(p[example.label], kProbabilityFloor));
  }
  return loss;
}

LinearParameters weighted_loss_gradient(const LinearParameters& params,
                                        const std::vector<LabeledVector>& data,
                                        const ClassWeights& weights) {
  LinearParameters grad(params.num_classes, params.feature_dim);
  for (const auto& example : data) {
    const auto p = params.proba(example.x);
    if (p[example.label] < kProbabilityFloor) continue;  // floored: flat
    const double w = weights.of(example.label);
    for (size_t k = 0; k < params.num_classes; ++k) {
      const double g = w * (p[k] - (k == example.label ? 1.0 : 0.0));
      grad.bias[k] += g;
      double* row = grad.weights.data() + k * params.feature_dim;
      for (const auto& [j, v] : example.x.entries) row[j] += g * v;
    }
  }
  return grad;
}

SparseVector LinearTextClassifier::input(const RelationInstance& instance) const {
  SparseVector x = featurize(instance, params_.feature_dim);
  double norm = 0.0;
  for (const auto& [j, v] : x.entries) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (auto& entry : x.entries) entry.second /= norm;
  return x;
}

LinearTextClassifier LinearTextClassifier::train(
    const std::vector<RelationInstance>& train, const RelationSchema& schema,
    const ClassWeights& weights, const LinearTrainConfig& config,
    uint64_t seed) {
  if (train.empty()) throw Error("train_classifier: empty training set");
  if (config.feature_dim == 0 || config.epochs == 0 ||
      !(config.learning_rate > 0.0))
    throw Error("train_classifier: invalid configuration");
  if (weights.weights.size() != schema.num_classes())
    throw Error("train_classifier: class weights do not match the schema");

  LinearTextClassifier model(
      schema, LinearParameters(schema.num_classes(), config.feature_dim));
  std::vector<LabeledVector> data;
  data.reserve(train.size());
  std::vector<size_t> seen(schema.num_classes(), 0);
  for (const auto& instance : train) {
    const size_t label = class_of(instance, schema);
    ++seen[label];
    data.push_back({model.input(instance), label});
  }
  for (size_t c = 0; c < seen.size(); ++c)
    if (seen[c] == 0)
      throw Error("train_classifier: class '" + schema.label_of(c) +
                  "' is missing from the training set");

  LinearParameters& params = model.params_;
  const size_t dim = params.feature_dim;
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t i : order) {
      const auto& example = data[i];
      const auto p = params.proba(example.x);
      if (p[example.label] < kProbabilityFloor) continue;
      const double step = config.learning_rate * weights.of(example.label);
      for (size_t k = 0; k < params.num_classes; ++k) {
        const double g = step * (p[k] - (k == example.label ? 1.0 : 0.0));
        params.bias[k] -= g;
        double* row = params.weights.data() + k * dim;
        for (const auto& [j, v] : example.x.entries) row[j] -= g * v;
      }
    }
    model.epoch_losses_.push_back(weighted_loss(params, data, weights) /
                                  static_cast<double>(data.size()));
  }
  return model;
}

std::vector<double> LinearTextClassifier::predict_proba(
    const RelationInstance& instance) const {
  return params_.proba(input(instance));
}

json LinearTextClassifier::to_json() const {
  json weights = json::array();
  for (size_t k = 0; k < params_.num_classes; ++k)
    for (size_t j = 0; j < params_.feature_dim; ++j) {
      const double w = params_.weights[k * params_.feature_dim + j];
      if (w != 0.0) weights.push_back(json::array({k, j, w}));
    }
  return json{{"format", kLinearFormat},
              {"feature_dim", params_.feature_dim},
              {"relation_types", schema_.relation_types},
              {"null_label", schema_.null_label},
              {"mask_a", schema_.mask_a},
              {"mask_b", schema_.mask_b},
              {"bias", params_.bias},
              {"weights", std::move(weights)}};
}

LinearTextClassifier LinearTextClassifier::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kLinearFormat)
      throw Error("linear classifier: unsupported format");
    RelationSchema schema;
    schema.relation_types = j.at("relation_types").get<std::vector<std::string>>();
    schema.null_label = j.at("null_label").get<std::string>();
    schema.mask_a = j.at("mask_a").get<std::string>();
    schema.mask_b = j.at("mask_b").get<std::string>();
    schema.validate();
    LinearParameters params(schema.num_classes(), j.at("feature_dim").get<size_t>());
    params.bias = j.at("bias").get<std::vector<double>>();
    if (params.bias.size() != params.num_classes)
      throw Error("linear classifier: bias size mismatch");
    for (const auto& entry : j.at("weights")) {
      const auto k = entry.at(0).get<size_t>();
      const auto col = entry.at(1).get<size_t>();
      if (k >= params.num_classes || col >= params.feature_dim)
        throw Error("linear classifier: weight index out of range");
      params.weights[k * params.feature_dim + col] = entry.at(2).get<double>();
    }
    return LinearTextClassifier(std::move(schema), std::move(params));
  } catch (const json::exception& e) {
    throw Error(std::string("linear classifier: malformed model: ") + e.what());
  }
}

ClassifierFactory linear_classifier_factory(LinearTrainConfig config) {
  return [config](const std::vector<RelationInstance>& train,
                  const RelationSchema& schema, const ClassWeights& weights,
                  uint64_t seed) -> std::unique_ptr<Classifier> {
    return std::make_unique<LinearTextClassifier>(
        LinearTextClassifier::train(train, schema, weights, config, seed));
  };
}

// --- Threshold tuning ---------------------------------------------------

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(static_cast<double>(i) / 20.0);
  return grid;
}

ThresholdChoice tune_threshold(const std::vector<std::vector<double>>& dev_proba,
                               const std::vector<size_t>& dev_gold,
                               const RelationSchema& schema,
                               const std::vector<double>& grid) {
  if (dev_proba.empty()) throw Error("tune_threshold: empty dev set");
  if (dev_proba.size() != dev_gold.size())
    throw Error("tune_threshold: probability and gold counts differ");
  if (grid.empty()) throw Error("tune_threshold: empty grid");
  std::vector<double> sorted(grid);
  std::sort(sorted.begin(), sorted.end());

  ThresholdChoice best;
  bool have = false;
  std::vector<size_t> predictions(dev_proba.size());
  for (double t : sorted) {
    const PredictionRule rule{t};
    rule.validate();
    for (size_t i = 0; i < dev_proba.size(); ++i)
      predictions[i] = apply_rule(dev_proba[i], schema, rule);
    const double f1 = evaluate_indices(predictions, dev_gold, schema).micro_f1;
    if (!have || f1 > best.dev_micro_f1) {
      best = {rule, f1};
      have = true;
    }
  }
  return best;
}

ThresholdChoice tune_threshold(const Classifier& classifier,
                               const std::vector<RelationInstance>& dev,
                               const std::vector<double>& grid) {
  if (dev.empty()) throw Error("tune_threshold: empty dev set");
  const auto& schema = classifier.schema();
  std::vector<std::vector<double>> proba;
  std::vector<size_t> gold;
  proba.reserve(dev.size());
  gold.reserve(dev.size());
  for (const auto& instance : dev) {
    proba.push_back(classifier.predict_proba(instance));
    gold.push_back(class_of(instance, schema));
  }
  return tune_threshold(proba, gold, schema, grid);
}

}  // namespace dare
