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

#include "dare/generator.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dare/error.h"
#include "dare/synthetic.h"
#include "test_util.h"

namespace dare {
namespace {

using testing::schema_of;

std::vector<TokenSequence> toy_corpus() {
  return {{"the", "cat", "sat"},
          {"the", "dog", "sat", "down"},
          {"a", "cat", "ran"},
          {"the", "cat", "ran", "away", "fast"}};
}

TEST(GeneratorParams, Validation) {
  GeneratorParams p;
  EXPECT_NO_THROW(p.validate());
  p.temperature = 0.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.top_k = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.min_tokens = 200;
  EXPECT_THROW(p.validate(), Error);
}

TEST(ShapeDistribution, TopKKeepsLargestAndBreaksTiesLow) {
  const auto d = shape_distribution({0.0, 0.2, 0.2, 0.1, 0.5}, 1.0, 2);
  EXPECT_DOUBLE_EQ(d[4], 0.5 / 0.7);
  EXPECT_DOUBLE_EQ(d[1], 0.2 / 0.7);
  EXPECT_EQ(d[2], 0.0);
  EXPECT_EQ(d[3], 0.0);
}

TEST(ShapeDistribution, TemperatureSharpensAndFlattens) {
  const std::vector<double> p{0.0, 0.25, 0.75};
  const auto cold = shape_distribution(p, 0.5, 3);
  EXPECT_NEAR(cold[2], 0.75 * 0.75 / (0.75 * 0.75 + 0.25 * 0.25), 1e-12);
  const auto hot = shape_distribution(p, 1e6, 3);
  EXPECT_NEAR(hot[1], 0.5, 1e-5);
  EXPECT_EQ(hot[0], 0.0);
  const auto same = shape_distribution(p, 1.0, 3);
  for (size_t i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(same[i], p[i]);
}

TEST(Sample, TopOneIsGreedyRegardlessOfSeed) {
  const auto m = NGramLM::fit(toy_corpus(), 2);
  GeneratorParams p;
  p.top_k = 1;
  p.min_tokens = 1;
  p.seed = 1;
  const auto first = sample(m, p);
  // Greedy chain by hand: argmax at every step.
  TokenSequence greedy;
  std::vector<TokenId> history;
  while (greedy.size() < p.max_tokens) {
    const auto d = m.next_token_dist(history);
    const auto best = static_cast<TokenId>(std::max_element(d.begin(), d.end()) - d.begin());
    if (best == Vocabulary::kEnd) break;
    history.push_back(best);
    greedy.push_back(m.vocab().token(best));
  }
  EXPECT_EQ(first, greedy);
  for (uint64_t seed = 2; seed < 20; ++seed) {
    p.seed = seed;
    EXPECT_EQ(sample(m, p), first);
  }
}

TEST(Sample, MatchesModelConditionals) {
  const auto m = NGramLM::fit(toy_corpus(), 2, 0.5);
  const auto exact = m.next_token_dist({});
  GeneratorParams p;
  p.top_k = m.vocab().size();
  p.max_tokens = 1;
  p.min_tokens = 1;
  Rng rng(77);
  const int draws = 10000;
  std::vector<int> counts(m.vocab().size(), 0);
  for (int i = 0; i < draws; ++i) {
    const auto s = sample(m, p, rng);
    ++counts[s.empty() ? Vocabulary::kEnd : m.vocab().id(s[0])];
  }
  for (size_t i = 1; i < counts.size(); ++i) {
    const double se = std::sqrt(exact[i] * (1 - exact[i]) / draws);
    EXPECT_NEAR(counts[i] / double(draws), exact[i], 3 * se + 1e-12)
        << m.vocab().token(static_cast<TokenId>(i));
  }
}

TEST(Sample, MaxTokensTruncates) {
  const auto m = NGramLM::uniform(Vocabulary({"a", "b", "c"}));
  GeneratorParams p;
  p.max_tokens = 5;
  p.min_tokens = 1;
  p.top_k = 10;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    p.seed = seed;
    EXPECT_LE(sample(m, p).size(), 5u);
  }
}

TEST(PassesFilters, MaskAndLengthRules) {
  const auto schema = schema_of({"r"});
  const TokenSequence ok{"x", "ENTITY_A", "x", "x", "ENTITY_B", "x", "x", "x"};
  EXPECT_TRUE(passes_filters(ok, schema, 8));
  EXPECT_FALSE(passes_filters(ok, schema, 9));
  auto twice = ok;
  twice[0] = "ENTITY_A";
  EXPECT_FALSE(passes_filters(twice, schema, 8));
  auto missing = ok;
  missing[4] = "x";
  EXPECT_FALSE(passes_filters(missing, schema, 8));
}

TEST(GenerateFiltered, CdrPositivesModel) {
  const Dataset d = make_cdr_shaped(3);
  std::vector<TokenSequence> positives;
  for (const auto& x : d.train)
    if (!d.schema.is_null(x.label)) positives.push_back(x.tokens);
  const auto m = NGramLM::fit(positives, 3);
  GeneratorParams p;
  p.seed = 4;
  const auto batch = generate_filtered(m, p, d.schema, 100, "cid");
  ASSERT_EQ(batch.instances.size(), 100u);
  std::set<std::string> ids;
  for (const auto& x : batch.instances) {
    EXPECT_TRUE(passes_filters(x.tokens, d.schema, 8));
    EXPECT_EQ(x.label, "cid");
    ids.insert(x.id);
  }
  EXPECT_EQ(ids.size(), 100u);
  EXPECT_EQ(batch.attempts, 100 + batch.rejected());
}

TEST(GenerateFiltered, NoMasksExhaustsBudget) {
  const auto m = NGramLM::fit(toy_corpus(), 2);
  GeneratorParams p;
  p.min_tokens = 1;
  try {
    generate_filtered(m, p, schema_of({"r"}), 5, "r");
    FAIL();
  } catch (const BudgetExhaustedError& e) {
    EXPECT_EQ(e.accepted(), 0u);
    EXPECT_EQ(e.attempts(), 500u);
    EXPECT_EQ(e.label(), "r");
  }
}

TEST(GenerateFiltered, ShortSentencesExhaustBudget) {
  const auto m = NGramLM::fit({{"ENTITY_A", "x", "ENTITY_B"}}, 2, 1e-6);
  GeneratorParams p;
  p.top_k = 1;
  EXPECT_THROW(generate_filtered(m, p, schema_of({"r"}), 3, "r"), BudgetExhaustedError);
}

TEST(GenerateFiltered, SourceRejectsThenRetries) {
  const auto schema = schema_of({"r"});
  const TokenSequence good{"ENTITY_A", "1", "2", "3", "4", "5", "6", "ENTITY_B"};
  const TokenSequence no_mask{"1", "2", "3", "4", "5", "6", "7", "8"};
  const TokenSequence short_one{"ENTITY_A", "ENTITY_B"};
  size_t calls = 0;
  SampleSource source = [&](size_t count) {
    ++calls;
    std::vector<TokenSequence> out;
    for (size_t i = 0; i < count; ++i)
      out.push_back(i % 3 == 0 ? good : i % 3 == 1 ? no_mask : short_one);
    return out;
  };
  const auto batch = generate_filtered(source, {}, schema, 4, "r", "p-");
  EXPECT_EQ(batch.instances.size(), 4u);
  EXPECT_GT(batch.rejected_mask, 0u);
  EXPECT_GT(batch.rejected_length, 0u);
  EXPECT_GT(calls, 1u);
  EXPECT_EQ(batch.instances[3].id, "p-3");
}

TEST(GenerateFiltered, RespectsExplicitBudget) {
  SampleSource source = [](size_t count) {
    return std::vector<TokenSequence>(count, TokenSequence{"x"});
  };
  try {
    generate_filtered(source, {}, schema_of({"r"}), 2, "r", "p-", 7);
    FAIL();
  } catch (const BudgetExhaustedError& e) {
    EXPECT_EQ(e.attempts(), 7u);
  }
}

TEST(GenerateFiltered, SameSeedSameBatch) {
  const Dataset d = make_imbalanced_task(1, 40, 10);
  std::vector<TokenSequence> positives;
  for (const auto& x : d.train)
    if (!d.schema.is_null(x.label)) positives.push_back(x.tokens);
  const auto m = NGramLM::fit(positives, 3);
  GeneratorParams p;
  p.seed = 12;
  const auto a = generate_filtered(m, p, d.schema, 20, "induce");
  const auto b = generate_filtered(m, p, d.schema, 20, "induce");
  EXPECT_EQ(a.instances, b.instances);
}

std::vector<RelationInstance> disjoint_train(size_t n0, size_t n1) {
  std::vector<RelationInstance> train;
  for (size_t i = 0; i < n0; ++i)
    train.push_back({"a" + std::to_string(i),
                     {"ENTITY_A", "alpha", "beta", "ENTITY_B", "gamma"}, "zero"});
  for (size_t i = 0; i < n1; ++i)
    train.push_back({"b" + std::to_string(i),
                     {"ENTITY_B", "delta", "eps", "ENTITY_A", "zeta"}, "one"});
  train.push_back({"n", {"ENTITY_A", "noise", "ENTITY_B"}, "null"});
  return train;
}

TEST(JointConditional, PromptSteersVocabulary) {
  const auto schema = schema_of({"zero", "one"});
  const auto train = disjoint_train(20, 20);
  std::vector<TokenSequence> text;
  for (const auto& x : train) text.push_back(x.tokens);
  auto base = std::make_shared<const NGramLM>(NGramLM::fit(text, 2));
  const auto model = joint_conditional_fit(base, train, schema, 0.7);
  GeneratorParams p;
  p.min_tokens = 1;
  p.top_k = 50;
  Rng rng(3);
  const std::set<std::string> zero_words{"alpha", "beta", "gamma"};
  const std::set<std::string> one_words{"delta", "eps", "zeta"};
  size_t zero = 0, one = 0;
  for (int i = 0; i < 1000; ++i)
    for (const auto& t : model.sample_for("zero", p, rng)) {
      zero += zero_words.count(t);
      one += one_words.count(t);
    }
  ASSERT_GT(zero + one, 0u);
  EXPECT_GE(zero / double(zero + one), 0.7);
}

TEST(JointConditional, InvalidPrompts) {
  const auto schema = schema_of({"zero", "one", "two"});
  const auto train = disjoint_train(3, 3);
  auto base = std::make_shared<const NGramLM>(NGramLM::fit({{"x"}}, 2));
  const auto model = joint_conditional_fit(base, train, schema);
  Rng rng(0);
  EXPECT_THROW(model.sample_for("nope", {}, rng), Error);
  EXPECT_THROW(model.sample_for("null", {}, rng), Error);
  EXPECT_THROW(model.sample_for("two", {}, rng), Error);  // absent from train
}

TEST(JointConditional, UnpromptedFollowsClassFrequency) {
  const auto schema = schema_of({"zero", "one"});
  const auto train = disjoint_train(90, 10);
  auto base = std::make_shared<const NGramLM>(NGramLM::fit({{"x"}}, 2));
  const auto model = joint_conditional_fit(base, train, schema, 0.9);
  GeneratorParams p;
  p.min_tokens = 1;
  p.top_k = 100;
  Rng rng(5);
  std::map<std::string, int> labels;
  for (int i = 0; i < 2000; ++i) ++labels[model.sample_unprompted(p, rng).first];
  EXPECT_GT(labels["zero"], 3 * labels["one"]);
  EXPECT_GT(labels["one"], 0);
}

}  // namespace
}  // namespace dare
