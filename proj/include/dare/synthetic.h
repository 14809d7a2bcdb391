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

#ifndef DARE_SYNTHETIC_H_
#define DARE_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dare/corpus.h"
#include "dare/ngram_lm.h"
#include "dare/rng.h"

namespace dare {

// Template grammar for synthetic relation-extraction tasks. A sentence is
//
//   [opener] ENTITY_A [a-modifier] <cue> ENTITY_B [b-modifier] [closer]
//
// or the reversed form with a reverse cue and ENTITY_B first. Each relation
// type owns its cue phrases, the null label owns cues of its own, and cue
// choice is Zipf-weighted so small samples miss the rarer phrasings.
class TemplateGrammar {
 public:
  // One "induce"-style relation against null, with English-like phrases.
  static TemplateGrammar binary();
  // One cue family per relation type, built from a shared word stock.
  static TemplateGrammar multiclass(std::vector<std::string> relation_types);

  const RelationSchema& schema() const { return schema_; }

  // Probability that a sentence is drawn from another class's cues while
  // keeping its label.
  void set_label_noise(double p) { label_noise_ = p; }

  TokenSequence sentence(size_t class_index, Rng& rng) const;
  RelationInstance instance(const std::string& id, size_t class_index,
                            Rng& rng) const;

 private:
  struct CueSet {
    std::vector<std::string> forward;
    std::vector<std::string> reverse;
  };

  RelationSchema schema_;
  std::vector<CueSet> cues_;  // per class index, null last
  std::vector<std::string> openers_;
  std::vector<std::string> a_modifiers_;
  std::vector<std::string> b_modifiers_;
  std::vector<std::string> closers_;
  double label_noise_ = 0.0;
};

// Split sizes of a synthetic task. Counts are per class index (null last).
struct FixtureShape {
  std::vector<size_t> train;
  std::vector<size_t> dev;
  std::vector<size_t> test;
};

Dataset make_fixture(const TemplateGrammar& grammar, const FixtureShape& shape,
                     uint64_t seed);

// Two-class benchmark task: 50 positives / 2,000 negatives in train.
Dataset make_imbalanced_task(uint64_t seed, size_t train_positives = 50,
                             size_t train_negatives = 2000);

// CDR-shaped: one relation type, 3,597 train (1,453 positive), 3,876 dev,
// 3,806 test.
Dataset make_cdr_shaped(uint64_t seed);

// DDI2013-shaped: four relation types with 153 / 658 / 1,083 / 1,353 train
// positives among 22,501 train instances, 4,401 dev, 5,689 test.
Dataset make_ddi_shaped(uint64_t seed);

// Unlabeled in-domain text from the same grammar (positive share given).
std::vector<TokenSequence> make_in_domain_corpus(const TemplateGrammar& grammar,
                                                 size_t n, double positive_share,
                                                 uint64_t seed);

}  // namespace dare

#endif  // DARE_SYNTHETIC_H_
