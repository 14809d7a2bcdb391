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

#include "dare/generator_backend.h"

#include <sstream>

#include "dare/error.h"

namespace dare {

BuiltinGenerator::BuiltinGenerator(Options options) : options_(options) {}

std::string BuiltinGenerator::describe() const {
  std::ostringstream out;
  out << "builtin-ngram(order=" << options_.order << ",alpha=" << options_.alpha
      << ",lambda=" << options_.lambda
      << ",base=" << (base_ ? (vanilla_ ? "uniform" : "fitted") : "none") << ")";
  return out.str();
}

void BuiltinGenerator::fit_base(const std::vector<TokenSequence>& corpus) {
  base_ = std::make_shared<NGramLM>(
      NGramLM::fit(corpus, options_.order, options_.alpha));
  vanilla_ = false;
  adapters_.clear();
}

void BuiltinGenerator::reset_base(const std::vector<TokenSequence>& corpus) {
  base_ = std::make_shared<NGramLM>(NGramLM::uniform(
      Vocabulary::from_corpus(corpus), options_.order, options_.alpha));
  vanilla_ = true;
  adapters_.clear();
}

std::string BuiltinGenerator::adapt(const std::string& label,
                                    const std::vector<TokenSequence>& corpus) {
  if (!base_) throw Error("builtin generator: adapt called before a base fit");
  const std::string id = "adapter-" + std::to_string(adapters_.size()) + "-" + label;
  adapters_[id] =
      std::make_unique<AdaptedLM>(dare::adapt(base_, corpus, options_.lambda));
  return id;
}

const AdaptedLM& BuiltinGenerator::adapter(const std::string& adapter_id) const {
  auto it = adapters_.find(adapter_id);
  if (it == adapters_.end())
    throw Error("builtin generator: unknown adapter '" + adapter_id + "'");
  return *it->second;
}

std::vector<TokenSequence> BuiltinGenerator::sample(
    const std::string& adapter_id, size_t n, const GeneratorParams& params) {
  const AdaptedLM& model = adapter(adapter_id);
  Rng rng(params.seed);
  std::vector<TokenSequence> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(dare::sample(model, params, rng));
  return out;
}

double BuiltinGenerator::log_likelihood(
    const std::string& adapter_id, const std::vector<TokenSequence>& corpus) {
  return dare::log_likelihood(adapter(adapter_id), corpus);
}

}  // namespace dare
