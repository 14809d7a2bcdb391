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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dare/error.h"

namespace dare {

void GeneratorParams::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw Error("generator params: temperature must be positive");
  if (top_k < 1) throw Error("generator params: top_k must be at least 1");
  if (max_tokens < 1) throw Error("generator params: max_tokens must be positive");
  if (min_tokens < 1) throw Error("generator params: min_tokens must be positive");
  if (min_tokens > max_tokens)
    throw Error("generator params: min_tokens exceeds max_tokens");
}

std::vector<double> shape_distribution(std::vector<double> dist,
                                       double temperature, size_t top_k) {
  const size_t v = dist.size();
  double log_max = -INFINITY;
  for (double p : dist)
    if (p > 0.0) log_max = std::max(log_max, std::log(p));
  if (log_max == -INFINITY) return dist;

  double z = 0.0;
  for (double& p : dist) {
    p = p > 0.0 ? std::exp((std::log(p) - log_max) / temperature) : 0.0;
    z += p;
  }
  for (double& p : dist) p /= z;

  if (top_k < v) {
    std::vector<size_t> order(v);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return dist[a] > dist[b]; });
    for (size_t r = top_k; r < v; ++r) dist[order[r]] = 0.0;
    const double kept = std::accumulate(dist.begin(), dist.end(), 0.0);
    for (double& p : dist) p /= kept;
  }
  return dist;
}

TokenSequence sample(const LanguageModel& model, const GeneratorParams& params,
                     Rng& rng, const std::vector<TokenId>& prefix) {
  params.validate();
  std::vector<TokenId> history = prefix;
  TokenSequence out;
  while (out.size() < params.max_tokens) {
    const auto dist = shape_distribution(model.next_token_dist(history),
                                         params.temperature, params.top_k);
    const auto next = static_cast<TokenId>(rng.categorical(dist));
    if (next == Vocabulary::kEnd) break;
    history.push_back(next);
    out.push_back(model.vocab().token(next));
  }
  return out;
}

TokenSequence sample(const LanguageModel& model, const GeneratorParams& params) {
  Rng rng(params.seed);
  return sample(model, params, rng);
}

bool passes_filters(const TokenSequence& tokens, const RelationSchema& schema,
                    size_t min_tokens) {
  return tokens.size() >= min_tokens &&
         std::count(tokens.begin(), tokens.end(), schema.mask_a) == 1 &&
         std::count(tokens.begin(), tokens.end(), schema.mask_b) == 1;
}

FilteredBatch generate_filtered(const SampleSource& source,
                                const GeneratorParams& params,
                                const RelationSchema& schema, size_t n,
                                const std::string& label,
                                const std::string& id_prefix, size_t budget) {
  params.validate();
  if (n == 0) throw Error("generate_filtered: n must be at least 1");
  if (budget == 0) budget = 100 * n;

  FilteredBatch batch;
  batch.instances.reserve(n);
  while (batch.instances.size() < n && batch.attempts < budget) {
    const size_t want =
        std::min(n - batch.instances.size(), budget - batch.attempts);
    auto draws = source(want);
    if (draws.empty()) break;
    if (draws.size() > want) draws.resize(want);
    for (auto& tokens : draws) {
      ++batch.attempts;
      if (tokens.size() < params.min_tokens) {
        ++batch.rejected_length;
      } else if (!passes_filters(tokens, schema, params.min_tokens)) {
        ++batch.rejected_mask;
      } else {
        batch.instances.push_back(
            {id_prefix + std::to_string(batch.instances.size()),
             std::move(tokens), label});
        if (batch.instances.size() == n) break;
      }
    }
  }
  if (batch.instances.size() < n)
    throw BudgetExhaustedError(label, batch.instances.size(), batch.attempts);
  return batch;
}

FilteredBatch generate_filtered(const LanguageModel& model,
                                const GeneratorParams& params,
                                const RelationSchema& schema, size_t n,
                                const std::string& label, size_t budget) {
  Rng rng(params.seed);
  SampleSource source = [&](size_t count) {
    std::vector<TokenSequence> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) out.push_back(sample(model, params, rng));
    return out;
  };
  return generate_filtered(source, params, schema, n, label,
                           label + "-synth-" + std::to_string(params.seed) + "-",
                           budget);
}

// --- Joint conditional variant ------------------------------------------

JointConditionalLM::JointConditionalLM(AdaptedLM model, RelationSchema schema)
    : model_(std::move(model)), schema_(std::move(schema)) {}

std::string JointConditionalLM::control_token(size_t class_index) {
  return "<" + std::to_string(class_index) + ">";
}

TokenSequence JointConditionalLM::sample_for(const std::string& label,
                                             const GeneratorParams& params,
                                             Rng& rng) const {
  const auto index = schema_.class_index(label);
  if (!index || *index == schema_.null_index())
    throw Error("joint conditional model: no control token for '" + label + "'");
  const TokenId control = model_.vocab().id(control_token(*index));
  if (control == Vocabulary::kUnknown)
    throw Error("joint conditional model: class '" + label +
                "' was absent from training");
  return sample(model_, params, rng, {control});
}

std::pair<std::string, TokenSequence> JointConditionalLM::sample_unprompted(
    const GeneratorParams& params, Rng& rng) const {
  TokenSequence tokens = sample(model_, params, rng);
  std::string label;
  if (!tokens.empty()) {
    for (size_t i = 0; i < schema_.num_relation_types(); ++i) {
      if (tokens.front() == control_token(i)) {
        label = schema_.relation_types[i];
        tokens.erase(tokens.begin());
        break;
      }
    }
  }
  return {label, std::move(tokens)};
}

JointConditionalLM joint_conditional_fit(
    std::shared_ptr<const NGramLM> base,
    const std::vector<RelationInstance>& train, const RelationSchema& schema,
    double lambda) {
  std::vector<TokenSequence> corpus;
  for (const auto& instance : train) {
    if (schema.is_null(instance.label)) continue;
    const auto index = schema.class_index(instance.label);
    if (!index) throw Error("joint_conditional_fit: unknown label '" +
                            instance.label + "'");
    TokenSequence sequence{JointConditionalLM::control_token(*index)};
    sequence.insert(sequence.end(), instance.tokens.begin(),
                    instance.tokens.end());
    corpus.push_back(std::move(sequence));
  }
  if (corpus.empty())
    throw Error("joint_conditional_fit: no positive training instances");
  return JointConditionalLM(adapt(std::move(base), corpus, lambda), schema);
}

}  // namespace dare
