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

#ifndef DARE_EXPERIMENT_H_
#define DARE_EXPERIMENT_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dare/augment.h"
#include "dare/classifier.h"
#include "dare/corpus.h"
#include "dare/eval.h"
#include "dare/generator.h"
#include "dare/generator_backend.h"
#include "json.hpp"

namespace dare {

enum class Pipeline { kDare, kBalancedBagging, kClassWeighting, kGoldOnly };

std::string to_string(Pipeline pipeline);
Pipeline parse_pipeline(const std::string& name);

struct ExperimentConfig {
  std::filesystem::path dataset;
  Pipeline pipeline = Pipeline::kDare;
  // Additional pipelines run on the same seeds and compared to `pipeline`
  // with McNemar's test (run command only).
  std::vector<Pipeline> compare;

  // "builtin" or a shell command speaking dare-gen/1.
  std::string generator = "builtin";
  std::chrono::seconds generator_timeout{300};
  size_t lm_order = NGramLM::kDefaultOrder;
  double lm_alpha = NGramLM::kDefaultAlpha;
  double lm_lambda = AdaptedLM::kDefaultLambda;
  GeneratorParams generator_params;  // seed is replaced per run
  // In-domain text, one whitespace-tokenized sentence per line. The gold
  // train sentences stand in when absent.
  std::optional<std::filesystem::path> base_corpus;
  double pool_multiplier = kDefaultPoolMultiplier;

  // Ensemble size; 20 for DARE and 10 for the ensemble baselines when unset,
  // 1 for gold_only.
  std::optional<size_t> n_members;
  double ratio = 1.0;
  ThresholdPolicy threshold_policy = ThresholdPolicy::kPerMember;
  std::vector<double> threshold_grid = default_threshold_grid();
  LinearTrainConfig classifier;

  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  // Used to carve a dev split out of train when the dataset has none.
  double dev_fraction = 0.1;
  uint64_t dev_seed = 0;
  size_t threads = 0;
  // Reports are written here when non-empty.
  std::filesystem::path output;

  void validate() const;
  size_t members_for(Pipeline pipeline) const;

  // Config echo; from_json(to_json()) reproduces the config. Missing keys
  // keep their defaults.
  nlohmann::ordered_json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& file);
};

// One pipeline evaluated on the test split for one seed.
struct PipelineRun {
  Pipeline pipeline = Pipeline::kDare;
  uint64_t seed = 0;
  EvalResult eval;
  std::vector<std::string> predictions;  // aligned with the test split
  std::string pool_digest;               // DARE only
  std::string generator;                 // DARE only
  std::vector<std::map<std::string, size_t>> member_synthetic_counts;
  std::vector<double> member_thresholds;
};

// Per-command experiment state: the prepared dataset and a generator whose
// base is fitted once.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);
  Experiment(ExperimentConfig config, Dataset dataset);

  const ExperimentConfig& config() const { return config_; }
  const Dataset& dataset() const { return dataset_; }

  // Text the generator base is fitted on.
  std::vector<TokenSequence> base_corpus() const;
  // Creates a backend per config.generator; `vanilla` skips the in-domain
  // fit.
  std::unique_ptr<GeneratorBackend> make_generator(bool vanilla = false) const;
  GeneratorBackend& generator();

  SyntheticPool build_pool_for(const Dataset& dataset, GeneratorBackend& backend,
                               uint64_t seed) const;

  // Trains and evaluates one pipeline. DARE uses `pool` when given and
  // otherwise builds one from generator().
  PipelineRun run_pipeline(const Dataset& dataset, Pipeline pipeline,
                           uint64_t seed, const SyntheticPool* pool = nullptr,
                           std::optional<double> ratio = std::nullopt);

  Ensemble train_ensemble(const Dataset& dataset, Pipeline pipeline,
                          uint64_t seed, const SyntheticPool* pool,
                          double ratio) const;

 private:
  ExperimentConfig config_;
  Dataset dataset_;
  std::unique_ptr<GeneratorBackend> generator_;
};

// Seeds derived from a run seed.
uint64_t pool_seed(uint64_t run_seed);
uint64_t ensemble_seed(uint64_t run_seed);

// --- Commands -------------------------------------------------------------

struct PipelineSummary {
  Pipeline pipeline = Pipeline::kDare;
  std::vector<PipelineRun> runs;
  RunSummary summary;
};

struct McNemarComparison {
  Pipeline a = Pipeline::kDare;
  Pipeline b = Pipeline::kDare;
  std::vector<McNemarResult> per_seed;
  McNemarResult pooled;  // all seeds concatenated
};

struct RunReport {
  std::vector<PipelineSummary> pipelines;  // primary first
  std::vector<McNemarComparison> comparisons;
  nlohmann::ordered_json json;
  std::string table;
};

RunReport cmd_run(const ExperimentConfig& config);
RunReport cmd_run(Experiment& experiment);

struct CurveRow {
  std::string label;
  size_t positives = 0;
  RunSummary dare;
  RunSummary balanced_bagging;
  std::vector<PipelineRun> dare_runs;
  std::vector<PipelineRun> bb_runs;
};

struct CurveReport {
  std::vector<CurveRow> rows;
  nlohmann::ordered_json json;
  std::string table;
};

// Counts of 0 mean "all positives".
CurveReport cmd_imbalance_curve(const ExperimentConfig& config,
                                const std::vector<size_t>& positive_counts);
CurveReport cmd_imbalance_curve(Experiment& experiment,
                                const std::vector<size_t>& positive_counts);

// One row per ratio; the pool is built once per seed and shared by all
// ratios.
CurveReport cmd_ratio_study(const ExperimentConfig& config,
                            const std::vector<double>& ratios);
CurveReport cmd_ratio_study(Experiment& experiment,
                            const std::vector<double>& ratios);

struct GeneratorStudyReport {
  PipelineSummary vanilla;
  PipelineSummary in_domain;
  nlohmann::ordered_json json;
  std::string table;
};

GeneratorStudyReport cmd_generator_study(const ExperimentConfig& config);
GeneratorStudyReport cmd_generator_study(Experiment& experiment);

// Builds the pool for the first seed and writes it as JSON lines (plus a
// provenance file) to config.output.
SyntheticPool cmd_generate(const ExperimentConfig& config);

// Prediction files are JSON lines {"id":..., "prediction":..., "gold":...}
// as written by `run`; items are matched by id.
McNemarResult cmd_mcnemar(const std::filesystem::path& a,
                          const std::filesystem::path& b);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  nlohmann::ordered_json json;
  std::string table;
};

ValidationReport cmd_validate(const std::filesystem::path& dataset_dir);

// Reads whitespace-tokenized sentences, one per line.
std::vector<TokenSequence> load_text_corpus(const std::filesystem::path& file,
                                            const RelationSchema& schema);

}  // namespace dare

#endif  // DARE_EXPERIMENT_H_
