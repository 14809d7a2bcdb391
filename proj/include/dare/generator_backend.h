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

#ifndef DARE_GENERATOR_BACKEND_H_
#define DARE_GENERATOR_BACKEND_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dare/generator.h"
#include "dare/ngram_lm.h"

namespace dare {

// What the augmentation pipeline needs from a generator: a base fit, one
// adapter per relation type, and seeded sampling from an adapter.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;

  // Provenance string recorded with every synthetic pool.
  virtual std::string describe() const = 0;

  // First-stage fit on in-domain text.
  virtual void fit_base(const std::vector<TokenSequence>& corpus) = 0;
  // Discards any in-domain knowledge ("vanilla" base). `corpus` supplies the
  // vocabulary where a backend needs one.
  virtual void reset_base(const std::vector<TokenSequence>& corpus) = 0;

  // Second-stage fit on one class corpus; returns an adapter id.
  virtual std::string adapt(const std::string& label,
                            const std::vector<TokenSequence>& corpus) = 0;

  // `n` raw samples from an adapter, seeded with params.seed.
  virtual std::vector<TokenSequence> sample(const std::string& adapter_id,
                                            size_t n,
                                            const GeneratorParams& params) = 0;

  virtual double log_likelihood(const std::string& adapter_id,
                                const std::vector<TokenSequence>& corpus) = 0;
};

// In-process n-gram backend.
class BuiltinGenerator : public GeneratorBackend {
 public:
  struct Options {
    size_t order = NGramLM::kDefaultOrder;
    double alpha = NGramLM::kDefaultAlpha;
    double lambda = AdaptedLM::kDefaultLambda;
  };

  BuiltinGenerator() : BuiltinGenerator(Options{}) {}
  explicit BuiltinGenerator(Options options);

  std::string describe() const override;
  void fit_base(const std::vector<TokenSequence>& corpus) override;
  void reset_base(const std::vector<TokenSequence>& corpus) override;
  std::string adapt(const std::string& label,
                    const std::vector<TokenSequence>& corpus) override;
  std::vector<TokenSequence> sample(const std::string& adapter_id, size_t n,
                                    const GeneratorParams& params) override;
  double log_likelihood(const std::string& adapter_id,
                        const std::vector<TokenSequence>& corpus) override;

  const NGramLM* base() const { return base_.get(); }
  const AdaptedLM& adapter(const std::string& adapter_id) const;

 private:
  Options options_;
  std::shared_ptr<const NGramLM> base_;
  bool vanilla_ = false;
  std::map<std::string, std::unique_ptr<AdaptedLM>> adapters_;
};

}  // namespace dare

#endif  // DARE_GENERATOR_BACKEND_H_
