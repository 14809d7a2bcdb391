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

#ifndef DARE_NGRAM_LM_H_
#define DARE_NGRAM_LM_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace dare {

using TokenSequence = std::vector<std::string>;
using TokenId = int32_t;

// Token inventory. Ids 0..2 are the begin, end and unknown sentinels; the
// remaining ids follow lexicographic token order, which is also the
// tie-break order used by top-k sampling.
class Vocabulary {
 public:
  static constexpr TokenId kBegin = 0;
  static constexpr TokenId kEnd = 1;
  static constexpr TokenId kUnknown = 2;
  static constexpr std::string_view kBeginToken = "<s>";
  static constexpr std::string_view kEndToken = "</s>";
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocabulary();
  // Sentinels plus every distinct token in `tokens`.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  static Vocabulary from_corpus(const std::vector<TokenSequence>& corpus);
  // Union of two inventories.
  static Vocabulary merge(const Vocabulary& a, const Vocabulary& b);

  size_t size() const { return tokens_.size(); }
  // Number of tokens a model can predict (everything but the begin sentinel).
  size_t support_size() const { return tokens_.size() - 1; }

  // Id of `token`, or kUnknown.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_[id]; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// A next-token model. Distributions are indexed by vocabulary id and give
// zero mass to the begin sentinel.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary& vocab() const = 0;
  // Number of preceding tokens the model conditions on.
  virtual size_t context_length() const = 0;
  // P(. | history). `history` holds the ids emitted so far, without begin
  // padding; only the trailing context_length() ids matter.
  virtual std::vector<double> next_token_dist(
      std::span<const TokenId> history) const = 0;

  std::vector<TokenId> encode(const TokenSequence& tokens) const;
};

// Interpolated add-alpha n-gram model.
//
// For a history h_j of the last j tokens (j = 0..k, begin-padded):
//
//   P_j(w | h_j) = (c(h_j, w) + alpha * S * P_{j-1}(w | h_{j-1}))
//                  / (c(h_j) + alpha * S)
//
// with P_{-1}(w) = 1/S and S the support size. Unseen histories fall back to
// the lower order. With no counts at all the model is uniform.
class NGramLM : public LanguageModel {
 public:
  struct ContextCounts {
    std::map<TokenId, uint64_t> next;
    uint64_t total = 0;
  };
  using Table = std::map<std::vector<TokenId>, ContextCounts>;

  static constexpr size_t kDefaultOrder = 3;
  static constexpr double kDefaultAlpha = 0.1;

  // Maximum-likelihood counts over `corpus`, vocabulary from the corpus.
  static NGramLM fit(const std::vector<TokenSequence>& corpus,
                     size_t order = kDefaultOrder,
                     double alpha = kDefaultAlpha);
  // Same, over a caller-supplied vocabulary (out-of-vocabulary tokens count
  // as <unk>).
  static NGramLM fit(const std::vector<TokenSequence>& corpus,
                     Vocabulary vocab, size_t order, double alpha);
  // No counts: the uniform distribution over `vocab` in every context.
  static NGramLM uniform(Vocabulary vocab, size_t order = kDefaultOrder,
                         double alpha = kDefaultAlpha);

  const Vocabulary& vocab() const override { return vocab_; }
  size_t context_length() const override { return order_; }
  std::vector<double> next_token_dist(
      std::span<const TokenId> history) const override;

  double alpha() const { return alpha_; }
  // Count table for histories of length j (0..order).
  const Table& table(size_t j) const { return tables_[j]; }
  uint64_t total_events() const { return tables_[0].empty() ? 0 : tables_[0].begin()->second.total; }

  // Serialization ("dare-ngram/1"). Only the full-order event counts are
  // stored; lower orders are their marginals.
  nlohmann::json to_json() const;
  static NGramLM from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& file) const;
  static NGramLM load(const std::filesystem::path& file);

 private:
  NGramLM(Vocabulary vocab, size_t order, double alpha);
  void add_event(std::span<const TokenId> context, TokenId next, uint64_t count);

  Vocabulary vocab_;
  size_t order_;
  double alpha_;
  std::vector<Table> tables_;
};

// Two-stage model: lambda * P_class + (1 - lambda) * P_base, pointwise over
// the union vocabulary. Base probabilities of tokens the base never saw are
// zero.
class AdaptedLM : public LanguageModel {
 public:
  static constexpr double kDefaultLambda = 0.7;

  AdaptedLM(std::shared_ptr<const NGramLM> base, NGramLM class_model,
            double lambda);

  const Vocabulary& vocab() const override { return class_model_.vocab(); }
  size_t context_length() const override;
  std::vector<double> next_token_dist(
      std::span<const TokenId> history) const override;

  const NGramLM& base() const { return *base_; }
  const NGramLM& class_model() const { return class_model_; }
  double lambda() const { return lambda_; }

 private:
  std::shared_ptr<const NGramLM> base_;
  NGramLM class_model_;
  double lambda_;
  std::vector<TokenId> to_base_;  // union id -> base id
};

// Fits the class model on `class_corpus` over base vocab + class tokens and
// mixes it with `base`. Throws on an empty corpus or lambda outside [0, 1].
AdaptedLM adapt(std::shared_ptr<const NGramLM> base,
                const std::vector<TokenSequence>& class_corpus,
                double lambda = AdaptedLM::kDefaultLambda);

// Sum over every token of log P(token | history). The end sentinel is not
// scored; out-of-vocabulary tokens score as <unk>.
double log_likelihood(const LanguageModel& model,
                      const std::vector<TokenSequence>& corpus);

}  // namespace dare

#endif  // DARE_NGRAM_LM_H_
