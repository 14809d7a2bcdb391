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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "dare/error.h"
#include "dare/eval.h"
#include "dare/rng.h"
#include "dare/synthetic.h"
#include "test_util.h"

namespace dare {
namespace {

using testing::schema_of;

std::vector<RelationInstance> with_counts(const RelationSchema& schema,
                                          const std::vector<size_t>& counts) {
  std::vector<RelationInstance> out;
  for (size_t c = 0; c < counts.size(); ++c)
    for (size_t i = 0; i < counts[c]; ++i)
      out.push_back({schema.label_of(c) + std::to_string(i), {"ENTITY_A", "ENTITY_B"},
                     schema.label_of(c)});
  return out;
}

TEST(ClassWeights, DdiCountsExact) {
  const auto schema = schema_of({"advise", "effect", "int", "mechanism"});
  const auto w = compute_class_weights(
      with_counts(schema, {153, 658, 1083, 1353, 19254}), schema);
  ASSERT_EQ(w.weights.size(), 5u);
  // Integer ratios: each division is correctly rounded, so compare exactly.
  EXPECT_EQ(w.of(0), 1.0);
  EXPECT_EQ(w.of(1), 153.0 / 658.0);
  EXPECT_EQ(w.of(2), 153.0 / 1083.0);
  EXPECT_EQ(w.of(3), 153.0 / 1353.0);
  EXPECT_EQ(w.of(4), 153.0 / 19254.0);
  EXPECT_NEAR(w.of(1), 0.2325, 1e-4);
  EXPECT_NEAR(w.of(2), 0.1413, 1e-4);
  EXPECT_NEAR(w.of(3), 0.1131, 1e-4);
}

TEST(ClassWeights, BalancedAndDirectRatio) {
  const auto schema = schema_of({"r"});
  const auto even = compute_class_weights(with_counts(schema, {10, 10}), schema);
  EXPECT_EQ(even.weights, (std::vector<double>{1.0, 1.0}));
  const auto skew = compute_class_weights(with_counts(schema, {1, 1000}), schema);
  EXPECT_EQ(skew.weights, (std::vector<double>{1.0, 0.001}));
}

TEST(ClassWeights, EmptyClassIsError) {
  const auto schema = schema_of({"a", "b"});
  EXPECT_THROW(compute_class_weights(with_counts(schema, {3, 0, 5}), schema), Error);
}

TEST(PredictionRule, BelowThresholdIsNull) {
  const auto schema = schema_of({"one", "two"});
  EXPECT_EQ(apply_rule({0.30, 0.40, 0.30}, schema, {0.5}), 2u);
}

TEST(PredictionRule, AboveThresholdPicksClass) {
  const auto schema = schema_of({"one", "two"});
  EXPECT_EQ(apply_rule({0.30, 0.60, 0.10}, schema, {0.5}), 1u);
}

TEST(PredictionRule, TieGoesToLowestIndex) {
  const auto schema = schema_of({"one", "two"});
  EXPECT_EQ(apply_rule({0.40, 0.40, 0.20}, schema, {0.35}), 0u);
}

TEST(PredictionRule, NullProbabilityIsIgnored) {
  const auto schema = schema_of({"one"});
  EXPECT_EQ(apply_rule({0.35, 0.65}, schema, {0.3}), 0u);
}

TEST(PredictionRule, ThresholdRange) {
  EXPECT_THROW(PredictionRule{0.0}.validate(), Error);
  EXPECT_THROW(PredictionRule{1.0}.validate(), Error);
  EXPECT_NO_THROW(PredictionRule{0.05}.validate());
}

TEST(Featurize, Deterministic) {
  const auto schema = schema_of({"r"});
  const auto x = testing::make_instance("a", "ENTITY_A inhibits the ENTITY_B", "r", schema);
  EXPECT_EQ(featurize(x, 1 << 18).entries, featurize(x, 1 << 18).entries);
}

TEST(Featurize, SwappedMasksDiffer) {
  const auto schema = schema_of({"r"});
  const auto x = testing::make_instance("a", "ENTITY_A inhibits ENTITY_B", "r", schema);
  const auto y = testing::make_instance("b", "ENTITY_B inhibits ENTITY_A", "r", schema);
  EXPECT_NE(featurize(x, 1 << 18).entries, featurize(y, 1 << 18).entries);
}

TEST(Featurize, L1NormCountsUnigramsAndBigrams) {
  const auto schema = schema_of({"r"});
  const auto x = testing::make_instance("a", "ENTITY_A strongly inhibits the ENTITY_B",
                                        "r", schema);
  // 5 unigrams + 4 bigrams.
  EXPECT_DOUBLE_EQ(featurize(x, 1 << 18).l1_norm(), 9.0);
  // Repeated tokens still count once per occurrence.
  const auto y = testing::make_instance("b", "a a a", "r", schema);
  EXPECT_DOUBLE_EQ(featurize(y, 1 << 18).l1_norm(), 5.0);
  EXPECT_EQ(featurize(y, 1 << 18).entries.size(), 2u);
}

TEST(Featurize, SortedWithinDimension) {
  const auto schema = schema_of({"r"});
  const auto x = testing::make_instance("a", "p q r s t u v w", "r", schema);
  const auto v = featurize(x, 7);
  for (size_t i = 0; i < v.entries.size(); ++i) {
    EXPECT_LT(v.entries[i].first, 7u);
    if (i) {
      EXPECT_LT(v.entries[i - 1].first, v.entries[i].first);
    }
  }
  EXPECT_DOUBLE_EQ(v.l1_norm(), 15.0);
}

TEST(LinearClassifier, SeparableToyReachesPerfectAccuracy) {
  const auto schema = schema_of({"pos"});
  std::vector<RelationInstance> train;
  Rng rng(1);
  const std::vector<std::string> pos_words{"binds", "activates", "induces"};
  const std::vector<std::string> neg_words{"near", "beside", "unlike"};
  for (int i = 0; i < 60; ++i) {
    const bool pos = i % 2 == 0;
    const auto& words = pos ? pos_words : neg_words;
    train.push_back({std::to_string(i),
                     {"ENTITY_A", words[rng.uniform_index(3)], words[rng.uniform_index(3)],
                      "ENTITY_B"},
                     pos ? "pos" : "null"});
  }
  const auto model = LinearTextClassifier::train(train, schema, ClassWeights::uniform(schema),
                                                 {}, 3);
  for (const auto& x : train) EXPECT_EQ(predict(model, x, {0.5}), x.label);
  ASSERT_EQ(model.epoch_losses().size(), 5u);
  EXPECT_LT(model.epoch_losses().back(), model.epoch_losses().front());
}

TEST(LinearClassifier, UninformativeFeaturesGiveEvenOdds) {
  const auto schema = schema_of({"pos"});
  std::vector<RelationInstance> train;
  for (int i = 0; i < 100; ++i)
    train.push_back({std::to_string(i), {"ENTITY_A", "same", "ENTITY_B"},
                     i % 2 ? "pos" : "null"});
  const auto model = LinearTextClassifier::train(train, schema, ClassWeights::uniform(schema),
                                                 {}, 4);
  const auto p = model.predict_proba(train[0]);
  EXPECT_NEAR(p[0], 0.5, 0.1);
  EXPECT_NEAR(p[1], 0.5, 0.1);
}

TEST(LinearClassifier, ClassWeightingRaisesRareRecall) {
  double weighted = 0.0, plain = 0.0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset d = make_imbalanced_task(seed, 50, 2000);
    const auto weights = compute_class_weights(d.train, d.schema);
    const auto w = LinearTextClassifier::train(d.train, d.schema, weights, {}, seed);
    const auto u = LinearTextClassifier::train(d.train, d.schema,
                                               ClassWeights::uniform(d.schema), {}, seed);
    std::vector<std::string> pw, pu, gold;
    for (const auto& x : d.test) {
      pw.push_back(predict(w, x, {0.5}));
      pu.push_back(predict(u, x, {0.5}));
      gold.push_back(x.label);
    }
    weighted += *evaluate(pw, gold, d.schema).per_class.at("induce").recall;
    plain += *evaluate(pu, gold, d.schema).per_class.at("induce").recall;
  }
  EXPECT_GE(weighted / 5, plain / 5);
}

TEST(LinearClassifier, SameSeedSameModel) {
  const Dataset d = make_imbalanced_task(3, 20, 100);
  const auto w = ClassWeights::uniform(d.schema);
  const auto a = LinearTextClassifier::train(d.train, d.schema, w, {}, 9);
  const auto b = LinearTextClassifier::train(d.train, d.schema, w, {}, 9);
  EXPECT_EQ(a.parameters().weights, b.parameters().weights);
  EXPECT_EQ(a.parameters().bias, b.parameters().bias);
}

TEST(LinearClassifier, RequiresEveryClass) {
  const auto schema = schema_of({"a", "b"});
  EXPECT_THROW(LinearTextClassifier::train(with_counts(schema, {2, 0, 2}), schema,
                                           ClassWeights::uniform(schema), {}, 0),
               Error);
  EXPECT_THROW(LinearTextClassifier::train({}, schema, ClassWeights::uniform(schema), {}, 0),
               Error);
}

TEST(LinearClassifier, InputHasUnitNorm) {
  const Dataset d = make_imbalanced_task(3, 10, 10);
  const auto model = LinearTextClassifier::train(d.train, d.schema,
                                                 ClassWeights::uniform(d.schema), {}, 1);
  for (const auto& x : d.train) {
    double sq = 0.0;
    for (const auto& [j, v] : model.input(x).entries) sq += v * v;
    EXPECT_NEAR(sq, 1.0, 1e-12);
  }
}

TEST(LinearClassifier, JsonRoundTrip) {
  const Dataset d = make_imbalanced_task(4, 20, 60);
  LinearTrainConfig config;
  config.feature_dim = 1 << 12;
  const auto model = LinearTextClassifier::train(d.train, d.schema,
                                                 ClassWeights::uniform(d.schema), config, 2);
  const auto back = LinearTextClassifier::from_json(model.to_json());
  EXPECT_EQ(back.parameters().weights, model.parameters().weights);
  for (const auto& x : d.test) EXPECT_EQ(back.predict_proba(x), model.predict_proba(x));
  auto bad = model.to_json();
  bad["format"] = "x";
  EXPECT_THROW(LinearTextClassifier::from_json(bad), Error);
}

// Central differences on random small problems.
double max_gradient_error(uint64_t seed) {
  Rng rng(seed);
  const size_t classes = 2 + rng.uniform_index(3);
  const size_t dim = 4 + rng.uniform_index(6);
  LinearParameters params(classes, dim);
  for (double& w : params.weights) w = rng.uniform01() * 2 - 1;
  for (double& b : params.bias) b = rng.uniform01() - 0.5;
  std::vector<LabeledVector> data(3 + rng.uniform_index(5));
  for (auto& ex : data) {
    for (uint32_t j = 0; j < dim; ++j)
      if (rng.uniform01() < 0.6) ex.x.entries.push_back({j, rng.uniform01() * 2 - 1});
    ex.label = rng.uniform_index(classes);
  }
  ClassWeights weights;
  for (size_t c = 0; c < classes; ++c) weights.weights.push_back(0.1 + rng.uniform01());

  const auto grad = weighted_loss_gradient(params, data, weights);
  const double h = 1e-6;
  double worst = 0.0;
  auto check = [&](double& slot, double analytic) {
    const double saved = slot;
    slot = saved + h;
    const double up = weighted_loss(params, data, weights);
    slot = saved - h;
    const double down = weighted_loss(params, data, weights);
    slot = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-3});
    worst = std::max(worst, std::fabs(analytic - numeric) / scale);
  };
  for (size_t i = 0; i < params.weights.size(); ++i) check(params.weights[i], grad.weights[i]);
  for (size_t i = 0; i < params.bias.size(); ++i) check(params.bias[i], grad.bias[i]);
  return worst;
}

TEST(LinearClassifier, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_LT(max_gradient_error(seed), 1e-4) << "seed " << seed;
}

TEST(TuneThreshold, ConfidentOutputsPickSmallestThreshold) {
  const auto schema = schema_of({"r"});
  std::vector<std::vector<double>> proba;
  std::vector<size_t> gold;
  for (int i = 0; i < 10; ++i) {
    const bool pos = i % 3 == 0;
    proba.push_back(pos ? std::vector<double>{0.99, 0.01} : std::vector<double>{0.01, 0.99});
    gold.push_back(pos ? 0 : 1);
  }
  const auto choice = tune_threshold(proba, gold, schema, default_threshold_grid());
  EXPECT_DOUBLE_EQ(choice.rule.threshold, 0.05);
  EXPECT_DOUBLE_EQ(choice.dev_micro_f1, 1.0);
}

TEST(TuneThreshold, SeparatingBandPicksItsFirstGridPoint) {
  const auto schema = schema_of({"r"});
  std::vector<std::vector<double>> proba;
  std::vector<size_t> gold;
  for (int i = 0; i < 12; ++i) {
    const bool pos = i % 4 == 0;
    proba.push_back(pos ? std::vector<double>{0.6, 0.4} : std::vector<double>{0.4, 0.6});
    gold.push_back(pos ? 0 : 1);
  }
  const auto choice = tune_threshold(proba, gold, schema, default_threshold_grid());
  EXPECT_DOUBLE_EQ(choice.rule.threshold, 0.45);
  EXPECT_DOUBLE_EQ(choice.dev_micro_f1, 1.0);
}

TEST(TuneThreshold, SingleElementGrid) {
  const auto schema = schema_of({"r"});
  const auto choice = tune_threshold({{0.2, 0.8}}, {0}, schema, {0.5});
  EXPECT_DOUBLE_EQ(choice.rule.threshold, 0.5);
}

TEST(TuneThreshold, DefaultGrid) {
  const auto grid = default_threshold_grid();
  ASSERT_EQ(grid.size(), 19u);
  EXPECT_DOUBLE_EQ(grid.front(), 0.05);
  EXPECT_DOUBLE_EQ(grid.back(), 0.95);
}

TEST(TuneThreshold, RejectsBadInput) {
  const auto schema = schema_of({"r"});
  EXPECT_THROW(tune_threshold({}, {}, schema, {0.5}), Error);
  EXPECT_THROW(tune_threshold({{0.5, 0.5}}, {0}, schema, {}), Error);
  EXPECT_THROW(tune_threshold({{0.5, 0.5}}, {0}, schema, {1.2}), Error);
}

}  // namespace
}  // namespace dare
