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

#ifndef DARE_CLASSIFIER_H_
#define DARE_CLASSIFIER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dare/corpus.h"
#include "json.hpp"

namespace dare {

// Per-class loss weights, indexed like RelationSchema::class_index.
struct ClassWeights {
  std::vector<double> weights;

  static ClassWeights uniform(const RelationSchema& schema) {
    return {std::vector<double>(schema.num_classes(), 1.0)};
  }
  double of(size_t class_index) const { return weights[class_index]; }
};

// weight_c = freq_min / freq_c over every class, null included. Throws when
// a class has no training instance.
ClassWeights compute_class_weights(const std::vector<RelationInstance>& train,
                                   const RelationSchema& schema);

// Threshold decision: the most probable relation type if its probability
// reaches the threshold, otherwise null.
struct PredictionRule {
  double threshold = 0.5;

  void validate() const;
};

// `proba` has one entry per class (null last). Argmax ties go to the lowest
// relation-type index.
size_t apply_rule(const std::vector<double>& proba, const RelationSchema& schema,
                  const PredictionRule& rule);

// --- Features ---------------------------------------------------------------

struct SparseVector {
  // Sorted by index, no duplicates, no zero values.
  std::vector<std::pair<uint32_t, double>> entries;

  double l1_norm() const;
};

// Hashed unigram and bigram counts over the instance tokens.
SparseVector featurize(const RelationInstance& instance, size_t feature_dim);

// --- Backend contract -------------------------------------------------------

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual const RelationSchema& schema() const = 0;
  // Distribution over schema.num_classes() classes.
  virtual std::vector<double> predict_proba(
      const RelationInstance& instance) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

std::string predict(const Classifier& classifier,
                    const RelationInstance& instance, const PredictionRule& rule);

// Builds and trains one classifier. `weights` is uniform when class
// weighting is off.
using ClassifierFactory = std::function<std::unique_ptr<Classifier>(
    const std::vector<RelationInstance>& train, const RelationSchema& schema,
    const ClassWeights& weights, uint64_t seed)>;

// --- Built-in linear model --------------------------------------------------

struct LinearTrainConfig {
  size_t feature_dim = size_t{1} << 18;
  size_t epochs = 5;
  double learning_rate = 0.1;
};

// Multinomial logistic regression parameters: one weight row per class plus
// a bias per class.
struct LinearParameters {
  size_t num_classes = 0;
  size_t feature_dim = 0;
  std::vector<double> weights;  // row-major num_classes x feature_dim
  std::vector<double> bias;

  LinearParameters() = default;
  LinearParameters(size_t classes, size_t dim)
      : num_classes(classes),
        feature_dim(dim),
        weights(classes * dim, 0.0),
        bias(classes, 0.0) {}

  std::vector<double> proba(const SparseVector& x) const;
};

struct LabeledVector {
  SparseVector x;
  size_t label = 0;
};

inline constexpr double kProbabilityFloor = 1e-12;

// Sum over examples of weight[label] * -log(max(p_label, floor)).
double weighted_loss(const LinearParameters& params,
                     const std::vector<LabeledVector>& data,
                     const ClassWeights& weights);
// Gradient of weighted_loss, laid out like `params`.
LinearParameters weighted_loss_gradient(const LinearParameters& params,
                                        const std::vector<LabeledVector>& data,
                                        const ClassWeights& weights);

class LinearTextClassifier : public Classifier {
 public:
  // Per-example SGD from zero weights, reshuffled each epoch.
  static LinearTextClassifier train(const std::vector<RelationInstance>& train,
                                    const RelationSchema& schema,
                                    const ClassWeights& weights,
                                    const LinearTrainConfig& config,
                                    uint64_t seed);

  const RelationSchema& schema() const override { return schema_; }
  std::vector<double> predict_proba(
      const RelationInstance& instance) const override;

  const LinearParameters& parameters() const { return params_; }
  // Mean weighted training loss after each epoch.
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  // The model input: featurize() scaled to unit L2 norm.
  SparseVector input(const RelationInstance& instance) const;

  // "dare-linear/1": feature_dim, classes and the non-zero weights. The
  // optional threshold is stored alongside for ensemble members.
  nlohmann::json to_json() const override;
  static LinearTextClassifier from_json(const nlohmann::json& j);

 private:
  LinearTextClassifier(RelationSchema schema, LinearParameters params)
      : schema_(std::move(schema)), params_(std::move(params)) {}

  RelationSchema schema_;
  LinearParameters params_;
  std::vector<double> epoch_losses_;
};

ClassifierFactory linear_classifier_factory(LinearTrainConfig config = {});

// --- Threshold tuning -------------------------------------------------------

std::vector<double> default_threshold_grid();  // 0.05, 0.10, ..., 0.95

struct ThresholdChoice {
  PredictionRule rule;
  double dev_micro_f1 = 0.0;
};

// Grid value with the best dev micro-F1; ties go to the smallest threshold.
ThresholdChoice tune_threshold(const std::vector<std::vector<double>>& dev_proba,
                               const std::vector<size_t>& dev_gold,
                               const RelationSchema& schema,
                               const std::vector<double>& grid);
ThresholdChoice tune_threshold(const Classifier& classifier,
                               const std::vector<RelationInstance>& dev,
                               const std::vector<double>& grid);

}  // namespace dare

#endif  // DARE_CLASSIFIER_H_
