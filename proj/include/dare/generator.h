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

#ifndef DARE_GENERATOR_H_
#define DARE_GENERATOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dare/corpus.h"
#include "dare/ngram_lm.h"
#include "dare/rng.h"

namespace dare {

struct GeneratorParams {
  double temperature = 1.0;
  size_t top_k = 5;
  size_t max_tokens = 100;
  size_t min_tokens = 8;
  uint64_t seed = 0;

  void validate() const;
};

// Temperature then top-k: p_i^(1/T) renormalized, restricted to the top_k
// largest entries (ties to the lower id), renormalized again. Entries outside
// the top k are zero.
std::vector<double> shape_distribution(std::vector<double> dist,
                                       double temperature, size_t top_k);

// Draws one sequence, stopping at the end sentinel or after max_tokens
// tokens. `prefix` seeds the history and is not part of the output.
TokenSequence sample(const LanguageModel& model, const GeneratorParams& params,
                     Rng& rng, const std::vector<TokenId>& prefix = {});
// Single draw seeded with params.seed.
TokenSequence sample(const LanguageModel& model, const GeneratorParams& params);

// Both generation filters: each mask exactly once, at least min_tokens.
bool passes_filters(const TokenSequence& tokens, const RelationSchema& schema,
                    size_t min_tokens);

struct FilteredBatch {
  std::vector<RelationInstance> instances;
  size_t attempts = 0;
  size_t rejected_mask = 0;
  size_t rejected_length = 0;

  size_t rejected() const { return rejected_mask + rejected_length; }
};

// Produces up to `count` raw samples per call. Sources may return fewer.
using SampleSource = std::function<std::vector<TokenSequence>(size_t count)>;

// Draws from `source` until `n` samples pass the filters, labelling them
// `label`. Throws BudgetExhaustedError once `budget` draws (default 100 * n)
// are spent. Instance ids are `id_prefix` followed by a running index.
FilteredBatch generate_filtered(const SampleSource& source,
                                const GeneratorParams& params,
                                const RelationSchema& schema, size_t n,
                                const std::string& label,
                                const std::string& id_prefix,
                                size_t budget = 0);

// Built-in model overload; one random stream seeded with params.seed.
FilteredBatch generate_filtered(const LanguageModel& model,
                                const GeneratorParams& params,
                                const RelationSchema& schema, size_t n,
                                const std::string& label, size_t budget = 0);

// Single model over every positive class, each sentence prefixed with a
// control token "<i>" for the class index i. Kept to reproduce the
// prefix-conditioning variant; the default pipeline adapts per class.
class JointConditionalLM {
 public:
  JointConditionalLM(AdaptedLM model, RelationSchema schema);

  const AdaptedLM& model() const { return model_; }
  static std::string control_token(size_t class_index);

  // Continuation after the control token of `label`. Throws on labels
  // without a control token.
  TokenSequence sample_for(const std::string& label,
                           const GeneratorParams& params, Rng& rng) const;
  // Unprompted draw. The first token decides the class: returns the label
  // it names, or an empty label if the draw did not start with a control
  // token.
  std::pair<std::string, TokenSequence> sample_unprompted(
      const GeneratorParams& params, Rng& rng) const;

 private:
  AdaptedLM model_;
  RelationSchema schema_;
};

JointConditionalLM joint_conditional_fit(
    std::shared_ptr<const NGramLM> base,
    const std::vector<RelationInstance>& train, const RelationSchema& schema,
    double lambda = AdaptedLM::kDefaultLambda);

}  // namespace dare

#endif  // DARE_GENERATOR_H_
