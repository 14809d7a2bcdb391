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

#include "dare/ngram_lm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "dare/error.h"

namespace dare {

using json = nlohmann::json;

namespace {

constexpr std::string_view kNGramFormat = "dare-ngram/1";

bool is_sentinel(std::string_view token) {
  return token == Vocabulary::kBeginToken || token == Vocabulary::kEndToken ||
         token == Vocabulary::kUnknownToken;
}

// The trailing `length` ids of the begin-padded history.
std::vector<TokenId> padded_context(std::span<const TokenId> history,
                                    size_t length) {
  std::vector<TokenId> context(length, Vocabulary::kBegin);
  const size_t take = std::min(length, history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            context.end() - static_cast<std::ptrdiff_t>(take));
  return context;
}

}  // namespace

// --- Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  tokens_ = {std::string(kBeginToken), std::string(kEndToken),
             std::string(kUnknownToken)};
  std::set<std::string> sorted;
  for (const auto& token : tokens)
    if (!is_sentinel(token)) sorted.insert(token);
  tokens_.insert(tokens_.end(), sorted.begin(), sorted.end());
  for (size_t i = 0; i < tokens_.size(); ++i)
    index_.emplace(tokens_[i], static_cast<TokenId>(i));
}

Vocabulary Vocabulary::from_corpus(const std::vector<TokenSequence>& corpus) {
  std::vector<std::string> tokens;
  for (const auto& sequence : corpus)
    tokens.insert(tokens.end(), sequence.begin(), sequence.end());
  return Vocabulary(tokens);
}

Vocabulary Vocabulary::merge(const Vocabulary& a, const Vocabulary& b) {
  std::vector<std::string> tokens = a.tokens_;
  tokens.insert(tokens.end(), b.tokens_.begin(), b.tokens_.end());
  return Vocabulary(tokens);
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::vector<TokenId> LanguageModel::encode(const TokenSequence& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) ids.push_back(vocab().id(token));
  return ids;
}

// --- NGramLM ----------------------------------------------------------------

NGramLM::NGramLM(Vocabulary vocab, size_t order, double alpha)
    : vocab_(std::move(vocab)), order_(order), alpha_(alpha), tables_(order + 1) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error("NGramLM: alpha must be positive");
}

void NGramLM::add_event(std::span<const TokenId> context, TokenId next,
                        uint64_t count) {
  for (size_t j = 0; j <= order_; ++j) {
    std::vector<TokenId> key(context.end() - static_cast<std::ptrdiff_t>(j),
                             context.end());
    auto& entry = tables_[j][key];
    entry.next[next] += count;
    entry.total += count;
  }
}

NGramLM NGramLM::fit(const std::vector<TokenSequence>& corpus, size_t order,
                     double alpha) {
  return fit(corpus, Vocabulary::from_corpus(corpus), order, alpha);
}

NGramLM NGramLM::fit(const std::vector<TokenSequence>& corpus, Vocabulary vocab,
                     size_t order, double alpha) {
  if (corpus.empty()) throw Error("NGramLM::fit: empty corpus");
  NGramLM model(std::move(vocab), order, alpha);
  for (const auto& sequence : corpus) {
    if (sequence.empty()) throw Error("NGramLM::fit: empty sequence");
    std::vector<TokenId> padded(order, Vocabulary::kBegin);
    for (const auto& token : sequence) padded.push_back(model.vocab_.id(token));
    padded.push_back(Vocabulary::kEnd);
    for (size_t i = order; i < padded.size(); ++i) {
      model.add_event(std::span<const TokenId>(padded.data() + i - order, order),
                      padded[i], 1);
    }
  }
  return model;
}

NGramLM NGramLM::uniform(Vocabulary vocab, size_t order, double alpha) {
  return NGramLM(std::move(vocab), order, alpha);
}

std::vector<double> NGramLM::next_token_dist(
    std::span<const TokenId> history) const {
  const size_t v = vocab_.size();
  const double support = static_cast<double>(vocab_.support_size());
  std::vector<double> dist(v, 1.0 / support);
  dist[Vocabulary::kBegin] = 0.0;

  const std::vector<TokenId> context = padded_context(history, order_);
  const double prior_mass = alpha_ * support;
  for (size_t j = 0; j <= order_; ++j) {
    const std::vector<TokenId> key(context.end() - static_cast<std::ptrdiff_t>(j),
                                   context.end());
    auto it = tables_[j].find(key);
    if (it == tables_[j].end()) continue;
    const double denom = static_cast<double>(it->second.total) + prior_mass;
    const double keep = prior_mass / denom;
    for (size_t w = 1; w < v; ++w) dist[w] *= keep;
    for (const auto& [token, count] : it->second.next)
      dist[token] += static_cast<double>(count) / denom;
  }
  return dist;
}

json NGramLM::to_json() const {
  json events = json::array();
  for (const auto& [context, counts] : tables_[order_]) {
    for (const auto& [next, count] : counts.next) {
      json event = json::array();
      for (TokenId id : context) event.push_back(id);
      event.push_back(next);
      event.push_back(count);
      events.push_back(std::move(event));
    }
  }
  std::vector<std::string> words(vocab_.tokens().begin() + 3,
                                 vocab_.tokens().end());
  return json{{"format", kNGramFormat},
              {"order", order_},
              {"alpha", alpha_},
              {"vocab", words},
              {"events", std::move(events)}};
}

NGramLM NGramLM::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kNGramFormat)
      throw Error("NGramLM: unsupported format '" +
                  j.at("format").get<std::string>() + "'");
    NGramLM model(Vocabulary(j.at("vocab").get<std::vector<std::string>>()),
                  j.at("order").get<size_t>(), j.at("alpha").get<double>());
    const auto v = static_cast<TokenId>(model.vocab_.size());
    for (const auto& event : j.at("events")) {
      if (event.size() != model.order_ + 2)
        throw Error("NGramLM: event of wrong arity");
      std::vector<TokenId> context;
      for (size_t i = 0; i < model.order_; ++i)
        context.push_back(event[i].get<TokenId>());
      const auto next = event[model.order_].get<TokenId>();
      const auto count = event[model.order_ + 1].get<uint64_t>();
      for (TokenId id : context)
        if (id < 0 || id >= v) throw Error("NGramLM: token id out of range");
      if (next <= 0 || next >= v || count == 0)
        throw Error("NGramLM: invalid event");
      model.add_event(context, next, count);
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(std::string("NGramLM: malformed model: ") + e.what());
  }
}

void NGramLM::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << to_json().dump() << '\n';
}

NGramLM NGramLM::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(file.string() + ": " + e.what());
  }
}

// --- AdaptedLM --------------------------------------------------------------

AdaptedLM::AdaptedLM(std::shared_ptr<const NGramLM> base, NGramLM class_model,
                     double lambda)
    : base_(std::move(base)), class_model_(std::move(class_model)), lambda_(lambda) {
  if (!base_) throw Error("AdaptedLM: null base model");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error("AdaptedLM: lambda must lie in [0, 1]");
  const Vocabulary& joint = class_model_.vocab();
  for (const auto& token : base_->vocab().tokens())
    if (!joint.contains(token))
      throw Error("AdaptedLM: class vocabulary must contain the base vocabulary");
  to_base_.resize(joint.size());
  for (size_t i = 0; i < joint.size(); ++i)
    to_base_[i] = base_->vocab().id(joint.token(static_cast<TokenId>(i)));
}

size_t AdaptedLM::context_length() const {
  return std::max(base_->context_length(), class_model_.context_length());
}

std::vector<double> AdaptedLM::next_token_dist(
    std::span<const TokenId> history) const {
  std::vector<double> dist = class_model_.next_token_dist(history);
  std::vector<TokenId> base_history;
  base_history.reserve(history.size());
  for (TokenId id : history) base_history.push_back(to_base_[id]);
  const std::vector<double> base_dist = base_->next_token_dist(base_history);

  for (double& p : dist) p *= lambda_;
  const double base_weight = 1.0 - lambda_;
  for (size_t i = 0; i < dist.size(); ++i) {
    const TokenId b = to_base_[i];
    // Tokens outside the base vocabulary map to <unk>, but only the real
    // <unk> entry carries the base's unknown mass.
    if (b == Vocabulary::kUnknown && i != Vocabulary::kUnknown) continue;
    dist[i] += base_weight * base_dist[b];
  }
  return dist;
}

AdaptedLM adapt(std::shared_ptr<const NGramLM> base,
                const std::vector<TokenSequence>& class_corpus, double lambda) {
  if (!base) throw Error("adapt: null base model");
  if (class_corpus.empty()) throw Error("adapt: empty class corpus");
  Vocabulary joint =
      Vocabulary::merge(base->vocab(), Vocabulary::from_corpus(class_corpus));
  NGramLM class_model = NGramLM::fit(class_corpus, std::move(joint),
                                     base->context_length(), base->alpha());
  return AdaptedLM(std::move(base), std::move(class_model), lambda);
}

double log_likelihood(const LanguageModel& model,
                      const std::vector<TokenSequence>& corpus) {
  double total = 0.0;
  for (const auto& sequence : corpus) {
    const std::vector<TokenId> ids = model.encode(sequence);
    for (size_t i = 0; i < ids.size(); ++i) {
      const auto dist =
          model.next_token_dist(std::span<const TokenId>(ids.data(), i));
      total += std::log(dist[ids[i]]);
    }
  }
  return total;
}

}  // namespace dare
