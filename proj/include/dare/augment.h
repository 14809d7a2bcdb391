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

#ifndef DARE_AUGMENT_H_
#define DARE_AUGMENT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dare/classifier.h"
#include "dare/corpus.h"
#include "dare/generator.h"
#include "dare/generator_backend.h"

namespace dare {

// --- Synthetic pool -------------------------------------------------------

struct PoolClassInfo {
  size_t gold_count = 0;
  size_t requested = 0;
  uint64_t seed = 0;
  std::string adapter_id;
  size_t attempts = 0;
  size_t rejected_mask = 0;
  size_t rejected_length = 0;
};

struct SyntheticPool {
  std::map<std::string, std::vector<RelationInstance>> per_class;
  std::map<std::string, PoolClassInfo> info;
  std::string generator;
  GeneratorParams params;
  double multiplier = 0.0;

  size_t size() const;
  // FNV-1a over labels and tokens, hex encoded.
  std::string digest() const;
};

inline constexpr double kDefaultPoolMultiplier = 5.0;

// For every relation type c: adapts `generator` on the gold D_c and draws
// round(multiplier * |D_c|) filtered instances. The generator's base must
// already be fitted. Classes whose budget runs out are collected and
// reported together in one Error.
SyntheticPool build_pool(const Dataset& dataset, GeneratorBackend& generator,
                         const GeneratorParams& params,
                         double multiplier = kDefaultPoolMultiplier);

struct PoolSample {
  std::vector<RelationInstance> instances;
  std::map<std::string, size_t> per_class;
  // Classes whose pool was too small, drawn with replacement.
  std::vector<std::string> with_replacement;
};

// Per class, round(r * |D_c|) pool instances, without replacement when the
// pool suffices.
PoolSample subsample_pool(const SyntheticPool& pool, const Dataset& dataset,
                          double ratio, uint64_t seed);

// --- Ensembles ----------------------------------------------------------

enum class ThresholdPolicy { kPerMember, kShared };

struct EnsembleConfig {
  size_t n_members = 20;
  double ratio = 1.0;
  uint64_t seed = 0;
  ThresholdPolicy threshold_policy = ThresholdPolicy::kPerMember;
  std::vector<double> threshold_grid = default_threshold_grid();
  // Members trained concurrently; 0 picks the hardware concurrency.
  size_t threads = 0;

  void validate() const;
};

inline constexpr size_t kDareMembers = 20;
inline constexpr size_t kBaselineMembers = 10;

struct EnsembleMember {
  std::shared_ptr<const Classifier> classifier;
  PredictionRule rule;
  uint64_t sample_seed = 0;
  uint64_t train_seed = 0;
  size_t train_size = 0;
  std::map<std::string, size_t> class_counts;      // training composition
  std::map<std::string, size_t> synthetic_counts;  // DARE only
  double dev_micro_f1 = 0.0;
};

struct Ensemble {
  std::string kind;
  RelationSchema schema;
  EnsembleConfig config;
  std::vector<EnsembleMember> members;
};

// Seeds of member m: data sample derive_seed(seed, 2m), training
// derive_seed(seed, 2m + 1). Every kind uses the same derivation.
uint64_t member_sample_seed(uint64_t seed, size_t member);
uint64_t member_train_seed(uint64_t seed, size_t member);

// Each member trains on all gold train data plus its own pool subsample.
Ensemble train_dare(const Dataset& dataset, const SyntheticPool& pool,
                    const EnsembleConfig& config,
                    const ClassifierFactory& factory);

// Each member trains on every class undersampled to the rarest class count.
Ensemble train_balanced_bagging(const Dataset& dataset,
                                const EnsembleConfig& config,
                                const ClassifierFactory& factory);

// Each member trains on all gold data with inverse-frequency class weights.
Ensemble train_class_weighting(const Dataset& dataset,
                               const EnsembleConfig& config,
                               const ClassifierFactory& factory);

// Plain classifiers on the gold data.
Ensemble train_gold_only(const Dataset& dataset, const EnsembleConfig& config,
                         const ClassifierFactory& factory);

// Plurality over member decisions (class indices). Ties go to null when null
// is tied, otherwise to the lowest tied relation-type index.
size_t plurality(const std::vector<size_t>& decisions,
                 const RelationSchema& schema);

std::vector<size_t> member_decisions(const Ensemble& ensemble,
                                     const RelationInstance& instance);
std::string vote(const Ensemble& ensemble, const RelationInstance& instance);
std::vector<std::string> vote_all(const Ensemble& ensemble,
                                  const std::vector<RelationInstance>& instances);

// Directory with manifest.json plus one member-NN.json per member.
void save_ensemble(const std::filesystem::path& dir, const Ensemble& ensemble);
// Members load as LinearTextClassifier.
Ensemble load_ensemble(const std::filesystem::path& dir);

}  // namespace dare

#endif  // DARE_AUGMENT_H_
