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

#include "dare/experiment.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dare/error.h"
#include "dare/external_generator.h"
#include "dare/report.h"

namespace dare {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr uint64_t kPoolStream = 101;
constexpr uint64_t kEnsembleStream = 202;
constexpr uint64_t kSubsampleStream = 303;

std::vector<std::string> gold_labels(const std::vector<RelationInstance>& split) {
  std::vector<std::string> out;
  out.reserve(split.size());
  for (const auto& instance : split) out.push_back(instance.label);
  return out;
}

ordered_json run_json(const PipelineRun& run, const RelationSchema& schema) {
  ordered_json out;
  out["seed"] = run.seed;
  out["metrics"] = to_json(run.eval, schema);
  if (run.pipeline == Pipeline::kDare) {
    out["generator"] = run.generator;
    out["pool_digest"] = run.pool_digest;
  }
  ordered_json members = ordered_json::array();
  for (size_t m = 0; m < run.member_thresholds.size(); ++m) {
    ordered_json member;
    member["threshold"] = run.member_thresholds[m];
    if (m < run.member_synthetic_counts.size())
      member["synthetic_counts"] = run.member_synthetic_counts[m];
    members.push_back(std::move(member));
  }
  out["members"] = std::move(members);
  return out;
}

RunSummary summarize_runs(const std::vector<PipelineRun>& runs) {
  std::vector<EvalResult> results;
  for (const auto& run : runs) results.push_back(run.eval);
  return aggregate_runs(results);
}

ordered_json summary_json(const PipelineSummary& s, const RelationSchema& schema) {
  ordered_json runs = ordered_json::array();
  for (const auto& run : s.runs) runs.push_back(run_json(run, schema));
  ordered_json out;
  out["pipeline"] = to_string(s.pipeline);
  out["runs"] = std::move(runs);
  out["aggregate"] = to_json(s.summary);
  return out;
}

void write_predictions(const std::filesystem::path& file,
                       const std::vector<RelationInstance>& test,
                       const std::vector<std::string>& predictions) {
  std::ostringstream out;
  for (size_t i = 0; i < test.size(); ++i) {
    ordered_json j;
    j["id"] = test[i].id;
    j["prediction"] = predictions[i];
    j["gold"] = test[i].label;
    out << j.dump() << '\n';
  }
  write_text_file(file, out.str());
}

void write_reports(const std::filesystem::path& dir, const ordered_json& report,
                   const std::string& table, const std::string& csv) {
  if (dir.empty()) return;
  write_text_file(dir / "report.json", report.dump(2) + "\n");
  write_text_file(dir / "report.txt", table);
  write_text_file(dir / "report.csv", csv);
}

// Mean and std as separate cells, for CSV output.
void add_metric_cells(std::vector<std::string>& row, const MetricSummary& m) {
  row.push_back(format_score(m.mean, 6));
  row.push_back(format_score(m.stddev, 6));
}

std::string seeds_label(const std::vector<uint64_t>& seeds) {
  return std::to_string(seeds.size()) + " seed(s)";
}

}  // namespace

// --- Pipeline names -------------------------------------------------------

std::string to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::kDare: return "dare";
    case Pipeline::kBalancedBagging: return "balanced_bagging";
    case Pipeline::kClassWeighting: return "class_weighting";
    case Pipeline::kGoldOnly: return "gold_only";
  }
  return "?";
}

Pipeline parse_pipeline(const std::string& name) {
  if (name == "dare") return Pipeline::kDare;
  if (name == "balanced_bagging" || name == "bb") return Pipeline::kBalancedBagging;
  if (name == "class_weighting" || name == "cw") return Pipeline::kClassWeighting;
  if (name == "gold_only") return Pipeline::kGoldOnly;
  throw Error("unknown pipeline '" + name +
              "' (expected dare, balanced_bagging, class_weighting, gold_only)");
}

// --- Config ---------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw Error("config: dataset path is required");
  if (seeds.empty()) throw Error("config: at least one seed is required");
  if (generator.empty()) throw Error("config: empty generator");
  if (n_members && *n_members == 0) throw Error("config: n_members must be >= 1");
  if (!(ratio >= 0.0)) throw Error("config: ratio must be non-negative");
  if (!(pool_multiplier > 0.0)) throw Error("config: pool_multiplier must be positive");
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
    throw Error("config: dev_fraction must lie in (0, 1)");
  if (!(lm_lambda >= 0.0 && lm_lambda <= 1.0))
    throw Error("config: lm_lambda must lie in [0, 1]");
  if (!(lm_alpha > 0.0)) throw Error("config: lm_alpha must be positive");
  if (threshold_grid.empty()) throw Error("config: empty threshold grid");
  for (double t : threshold_grid) PredictionRule{t}.validate();
  for (Pipeline p : compare)
    if (p == pipeline) throw Error("config: compare repeats the primary pipeline");
  generator_params.validate();
}

size_t ExperimentConfig::members_for(Pipeline p) const {
  if (n_members) return *n_members;
  switch (p) {
    case Pipeline::kDare: return kDareMembers;
    case Pipeline::kBalancedBagging:
    case Pipeline::kClassWeighting: return kBaselineMembers;
    case Pipeline::kGoldOnly: return 1;
  }
  return 1;
}

ordered_json ExperimentConfig::to_json() const {
  ordered_json j;
  j["dataset"] = dataset.string();
  j["pipeline"] = dare::to_string(pipeline);
  std::vector<std::string> compared;
  for (Pipeline p : compare) compared.push_back(dare::to_string(p));
  j["compare"] = compared;
  j["generator"] = generator;
  j["generator_timeout_s"] = generator_timeout.count();
  j["lm_order"] = lm_order;
  j["lm_alpha"] = lm_alpha;
  j["lm_lambda"] = lm_lambda;
  j["temperature"] = generator_params.temperature;
  j["top_k"] = generator_params.top_k;
  j["max_tokens"] = generator_params.max_tokens;
  j["min_tokens"] = generator_params.min_tokens;
  j["base_corpus"] = base_corpus ? base_corpus->string() : "";
  j["pool_multiplier"] = pool_multiplier;
  if (n_members) j["n_members"] = *n_members;
  j["ratio"] = ratio;
  j["threshold_policy"] =
      threshold_policy == ThresholdPolicy::kShared ? "shared" : "per-member";
  j["threshold_grid"] = threshold_grid;
  j["feature_dim"] = classifier.feature_dim;
  j["epochs"] = classifier.epochs;
  j["learning_rate"] = classifier.learning_rate;
  j["seeds"] = seeds;
  j["dev_fraction"] = dev_fraction;
  j["dev_seed"] = dev_seed;
  j["output"] = output.string();
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("dataset")) c.dataset = j["dataset"].get<std::string>();
    if (j.contains("pipeline")) c.pipeline = parse_pipeline(j["pipeline"].get<std::string>());
    if (j.contains("compare"))
      for (const auto& name : j["compare"].get<std::vector<std::string>>())
        c.compare.push_back(parse_pipeline(name));
    c.generator = j.value("generator", c.generator);
    if (j.contains("generator_timeout_s"))
      c.generator_timeout = std::chrono::seconds(j["generator_timeout_s"].get<int64_t>());
    c.lm_order = j.value("lm_order", c.lm_order);
    c.lm_alpha = j.value("lm_alpha", c.lm_alpha);
    c.lm_lambda = j.value("lm_lambda", c.lm_lambda);
    c.generator_params.temperature = j.value("temperature", c.generator_params.temperature);
    c.generator_params.top_k = j.value("top_k", c.generator_params.top_k);
    c.generator_params.max_tokens = j.value("max_tokens", c.generator_params.max_tokens);
    c.generator_params.min_tokens = j.value("min_tokens", c.generator_params.min_tokens);
    if (j.contains("base_corpus") && !j["base_corpus"].get<std::string>().empty())
      c.base_corpus = j["base_corpus"].get<std::string>();
    c.pool_multiplier = j.value("pool_multiplier", c.pool_multiplier);
    if (j.contains("n_members") && !j["n_members"].is_null())
      c.n_members = j["n_members"].get<size_t>();
    c.ratio = j.value("ratio", c.ratio);
    if (j.contains("threshold_policy")) {
      const auto policy = j["threshold_policy"].get<std::string>();
      if (policy == "shared") {
        c.threshold_policy = ThresholdPolicy::kShared;
      } else if (policy == "per-member") {
        c.threshold_policy = ThresholdPolicy::kPerMember;
      } else {
        throw Error("config: unknown threshold_policy '" + policy + "'");
      }
    }
    if (j.contains("threshold_grid"))
      c.threshold_grid = j["threshold_grid"].get<std::vector<double>>();
    c.classifier.feature_dim = j.value("feature_dim", c.classifier.feature_dim);
    c.classifier.epochs = j.value("epochs", c.classifier.epochs);
    c.classifier.learning_rate = j.value("learning_rate", c.classifier.learning_rate);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<uint64_t>>();
    c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
    c.dev_seed = j.value("dev_seed", c.dev_seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("output")) c.output = j["output"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open config " + file.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(file.string() + ": " + e.what());
  }
}

// --- Experiment -----------------------------------------------------------

uint64_t pool_seed(uint64_t run_seed) { return derive_seed(run_seed, kPoolStream); }
uint64_t ensemble_seed(uint64_t run_seed) {
  return derive_seed(run_seed, kEnsembleStream);
}

Experiment::Experiment(ExperimentConfig config)
    : Experiment(config, load_dataset(config.dataset)) {}

Experiment::Experiment(ExperimentConfig config, Dataset dataset)
    : config_(std::move(config)), dataset_(std::move(dataset)) {
  config_.validate();
  validate_dataset(dataset_);
  if (dataset_.test.empty()) throw Error("experiment: dataset has no test split");
  if (dataset_.dev.empty()) {
    auto [train, dev] = split_dev(dataset_.train, config_.dev_fraction, config_.dev_seed);
    spdlog::info("no dev split; holding out {} of {} train instances", dev.size(),
                 dataset_.train.size());
    dataset_.train = std::move(train);
    dataset_.dev = std::move(dev);
  }
}

std::vector<TokenSequence> Experiment::base_corpus() const {
  if (config_.base_corpus) return load_text_corpus(*config_.base_corpus, dataset_.schema);
  std::vector<TokenSequence> corpus;
  corpus.reserve(dataset_.train.size());
  for (const auto& instance : dataset_.train) corpus.push_back(instance.tokens);
  return corpus;
}

std::unique_ptr<GeneratorBackend> Experiment::make_generator(bool vanilla) const {
  std::unique_ptr<GeneratorBackend> backend;
  if (config_.generator == "builtin") {
    BuiltinGenerator::Options options;
    options.order = config_.lm_order;
    options.alpha = config_.lm_alpha;
    options.lambda = config_.lm_lambda;
    backend = std::make_unique<BuiltinGenerator>(options);
  } else {
    backend = std::make_unique<ExternalGenerator>(ExternalGenerator::Options{
        config_.generator,
        std::chrono::duration_cast<std::chrono::milliseconds>(
            config_.generator_timeout)});
  }
  const auto corpus = base_corpus();
  if (vanilla) {
    backend->reset_base(corpus);
  } else {
    backend->fit_base(corpus);
  }
  return backend;
}

GeneratorBackend& Experiment::generator() {
  if (!generator_) generator_ = make_generator(false);
  return *generator_;
}

SyntheticPool Experiment::build_pool_for(const Dataset& dataset,
                                         GeneratorBackend& backend,
                                         uint64_t seed) const {
  GeneratorParams params = config_.generator_params;
  params.seed = pool_seed(seed);
  return build_pool(dataset, backend, params, config_.pool_multiplier);
}

Ensemble Experiment::train_ensemble(const Dataset& dataset, Pipeline pipeline,
                                    uint64_t seed, const SyntheticPool* pool,
                                    double ratio) const {
  EnsembleConfig ec;
  ec.n_members = config_.members_for(pipeline);
  ec.ratio = ratio;
  ec.seed = ensemble_seed(seed);
  ec.threshold_policy = config_.threshold_policy;
  ec.threshold_grid = config_.threshold_grid;
  ec.threads = config_.threads;
  const ClassifierFactory factory = linear_classifier_factory(config_.classifier);
  switch (pipeline) {
    case Pipeline::kDare:
      if (!pool) throw Error("train_ensemble: DARE needs a synthetic pool");
      return train_dare(dataset, *pool, ec, factory);
    case Pipeline::kBalancedBagging:
      return train_balanced_bagging(dataset, ec, factory);
    case Pipeline::kClassWeighting:
      return train_class_weighting(dataset, ec, factory);
    case Pipeline::kGoldOnly:
      return train_gold_only(dataset, ec, factory);
  }
  throw Error("train_ensemble: unknown pipeline");
}

PipelineRun Experiment::run_pipeline(const Dataset& dataset, Pipeline pipeline,
                                     uint64_t seed, const SyntheticPool* pool,
                                     std::optional<double> ratio) {
  PipelineRun run;
  run.pipeline = pipeline;
  run.seed = seed;
  std::optional<SyntheticPool> own_pool;
  if (pipeline == Pipeline::kDare) {
    if (!pool) {
      own_pool = build_pool_for(dataset, generator(), seed);
      pool = &*own_pool;
    }
    run.pool_digest = pool->digest();
    run.generator = pool->generator;
  }
  const Ensemble ensemble =
      train_ensemble(dataset, pipeline, seed, pool, ratio.value_or(config_.ratio));
  for (const auto& member : ensemble.members) {
    run.member_thresholds.push_back(member.rule.threshold);
    if (pipeline == Pipeline::kDare)
      run.member_synthetic_counts.push_back(member.synthetic_counts);
  }
  run.predictions = vote_all(ensemble, dataset.test);
  run.eval = evaluate(run.predictions, gold_labels(dataset.test), dataset.schema);
  spdlog::info("{} seed {}: micro-F1 {:.4f}", to_string(pipeline), seed,
               run.eval.micro_f1);
  return run;
}

// --- run ------------------------------------------------------------------

RunReport cmd_run(const ExperimentConfig& config) {
  Experiment experiment(config);
  return cmd_run(experiment);
}

RunReport cmd_run(Experiment& experiment) {
  const auto& config = experiment.config();
  const auto& dataset = experiment.dataset();
  const auto& schema = dataset.schema;

  RunReport report;
  std::vector<Pipeline> pipelines{config.pipeline};
  pipelines.insert(pipelines.end(), config.compare.begin(), config.compare.end());
  for (Pipeline pipeline : pipelines) {
    PipelineSummary s;
    s.pipeline = pipeline;
    for (uint64_t seed : config.seeds)
      s.runs.push_back(experiment.run_pipeline(dataset, pipeline, seed));
    s.summary = summarize_runs(s.runs);
    report.pipelines.push_back(std::move(s));
  }

  const auto gold = gold_labels(dataset.test);
  for (size_t i = 1; i < report.pipelines.size(); ++i) {
    const auto& a = report.pipelines.front();
    const auto& b = report.pipelines[i];
    McNemarComparison comparison{a.pipeline, b.pipeline, {}, {}};
    std::vector<std::string> all_a, all_b, all_gold;
    for (size_t k = 0; k < a.runs.size(); ++k) {
      comparison.per_seed.push_back(
          mcnemar(a.runs[k].predictions, b.runs[k].predictions, gold));
      all_a.insert(all_a.end(), a.runs[k].predictions.begin(), a.runs[k].predictions.end());
      all_b.insert(all_b.end(), b.runs[k].predictions.begin(), b.runs[k].predictions.end());
      all_gold.insert(all_gold.end(), gold.begin(), gold.end());
    }
    comparison.pooled = mcnemar(all_a, all_b, all_gold);
    report.comparisons.push_back(std::move(comparison));
  }

  // JSON
  ordered_json j;
  j["command"] = "run";
  j["config"] = config.to_json();
  ordered_json pipelines_json = ordered_json::array();
  for (const auto& s : report.pipelines) pipelines_json.push_back(summary_json(s, schema));
  j["pipelines"] = std::move(pipelines_json);
  ordered_json comparisons = ordered_json::array();
  for (const auto& c : report.comparisons) {
    ordered_json entry;
    entry["a"] = to_string(c.a);
    entry["b"] = to_string(c.b);
    ordered_json per_seed = ordered_json::array();
    for (size_t k = 0; k < c.per_seed.size(); ++k) {
      ordered_json r = to_json(c.per_seed[k]);
      r["seed"] = config.seeds[k];
      per_seed.push_back(std::move(r));
    }
    entry["per_seed"] = std::move(per_seed);
    entry["pooled"] = to_json(c.pooled);
    comparisons.push_back(std::move(entry));
  }
  j["mcnemar"] = std::move(comparisons);
  report.json = j;

  // Tables
  TextTable main({"Configuration", "Precision", "Recall", "F1"});
  for (const auto& s : report.pipelines)
    main.add_row({to_string(s.pipeline), format_summary(s.summary.micro_precision),
                  format_summary(s.summary.micro_recall),
                  format_summary(s.summary.micro_f1)});
  std::vector<std::string> header{"relation type"};
  for (const auto& s : report.pipelines) header.push_back(to_string(s.pipeline));
  TextTable per_class(header);
  for (const auto& type : schema.relation_types) {
    std::vector<std::string> row{type};
    for (const auto& s : report.pipelines) {
      auto it = s.summary.per_class_f1.find(type);
      row.push_back(it == s.summary.per_class_f1.end() ? "-"
                                                       : format_summary(it->second));
    }
    per_class.add_row(std::move(row));
  }
  std::string text = "Micro scores over " + seeds_label(config.seeds) +
                     " (mean ± std)\n\n" + main.render() +
                     "\nPer relation type F1\n\n" + per_class.render();
  for (const auto& c : report.comparisons) {
    text += "\nMcNemar " + to_string(c.a) + " vs " + to_string(c.b) +
            " (pooled): b=" + std::to_string(c.pooled.b) +
            " c=" + std::to_string(c.pooled.c) +
            " statistic=" + format_score(c.pooled.statistic) +
            (c.pooled.significant_at_05 ? " significant at 0.05\n"
                                        : " not significant at 0.05\n");
  }
  report.table = text;

  TextTable csv({"pipeline", "precision_mean", "precision_std", "recall_mean",
                 "recall_std", "f1_mean", "f1_std"});
  for (const auto& s : report.pipelines) {
    std::vector<std::string> row{to_string(s.pipeline)};
    add_metric_cells(row, s.summary.micro_precision);
    add_metric_cells(row, s.summary.micro_recall);
    add_metric_cells(row, s.summary.micro_f1);
    csv.add_row(std::move(row));
  }

  if (!config.output.empty()) {
    write_reports(config.output, report.json, report.table, csv.csv());
    for (const auto& s : report.pipelines)
      for (const auto& run : s.runs)
        write_predictions(config.output / "predictions" /
                              (to_string(s.pipeline) + "-seed-" +
                               std::to_string(run.seed) + ".jsonl"),
                          dataset.test, run.predictions);
  }
  return report;
}

// --- imbalance curve ----------------------------------------------------

CurveReport cmd_imbalance_curve(const ExperimentConfig& config,
                                const std::vector<size_t>& positive_counts) {
  Experiment experiment(config);
  return cmd_imbalance_curve(experiment, positive_counts);
}

CurveReport cmd_imbalance_curve(Experiment& experiment,
                                const std::vector<size_t>& positive_counts) {
  const auto& config = experiment.config();
  const auto& dataset = experiment.dataset();
  const size_t available = count_positives(dataset.train, dataset.schema);
  if (positive_counts.empty()) throw Error("imbalance curve: no counts given");
  size_t previous = 0;
  for (size_t count : positive_counts) {
    const size_t effective = count == 0 ? available : count;
    if (effective > available)
      throw Error("imbalance curve: " + std::to_string(effective) +
                  " positives requested but only " + std::to_string(available) +
                  " available");
    if (effective < previous) throw Error("imbalance curve: counts must ascend");
    previous = effective;
  }

  CurveReport report;
  for (size_t count : positive_counts) {
    CurveRow row;
    row.positives = count == 0 ? available : count;
    row.label = count == 0 ? "all(" + std::to_string(available) + ")"
                           : std::to_string(count);
    for (uint64_t seed : config.seeds) {
      const Dataset sub = subsample_positives(dataset, row.positives,
                                              derive_seed(seed, kSubsampleStream));
      row.dare_runs.push_back(experiment.run_pipeline(sub, Pipeline::kDare, seed));
      row.bb_runs.push_back(
          experiment.run_pipeline(sub, Pipeline::kBalancedBagging, seed));
    }
    row.dare = summarize_runs(row.dare_runs);
    row.balanced_bagging = summarize_runs(row.bb_runs);
    report.rows.push_back(std::move(row));
  }

  TextTable table({"positives", "BB", "DARE"});
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    table.add_row({row.label, format_summary(row.balanced_bagging.micro_f1),
                   format_summary(row.dare.micro_f1)});
    ordered_json r;
    r["positives"] = row.positives;
    r["label"] = row.label;
    r["balanced_bagging"] = to_json(row.balanced_bagging);
    r["dare"] = to_json(row.dare);
    ordered_json per_seed = ordered_json::array();
    for (size_t k = 0; k < row.dare_runs.size(); ++k)
      per_seed.push_back(ordered_json{
          {"seed", row.dare_runs[k].seed},
          {"dare", run_json(row.dare_runs[k], dataset.schema)},
          {"balanced_bagging", run_json(row.bb_runs[k], dataset.schema)}});
    r["per_seed"] = std::move(per_seed);
    rows.push_back(std::move(r));
  }
  report.json = ordered_json{{"command", "imbalance-curve"},
                             {"config", config.to_json()},
                             {"rows", std::move(rows)}};
  report.table = "Micro-F1 by number of gold positives, " +
                 seeds_label(config.seeds) + " (mean ± std)\n\n" + table.render();
  TextTable csv({"positives", "bb_f1_mean", "bb_f1_std", "dare_f1_mean", "dare_f1_std"});
  for (const auto& row : report.rows) {
    std::vector<std::string> cells{std::to_string(row.positives)};
    add_metric_cells(cells, row.balanced_bagging.micro_f1);
    add_metric_cells(cells, row.dare.micro_f1);
    csv.add_row(std::move(cells));
  }
  write_reports(config.output, report.json, report.table, csv.csv());
  return report;
}

// --- ratio study --------------------------------------------------------

CurveReport cmd_ratio_study(const ExperimentConfig& config,
                            const std::vector<double>& ratios) {
  Experiment experiment(config);
  return cmd_ratio_study(experiment, ratios);
}

CurveReport cmd_ratio_study(Experiment& experiment,
                            const std::vector<double>& ratios) {
  const auto& config = experiment.config();
  const auto& dataset = experiment.dataset();
  if (ratios.empty()) throw Error("ratio study: no ratios given");
  for (double r : ratios)
    if (!(r > 0.0)) throw Error("ratio study: ratios must be positive");

  CurveReport report;
  report.rows.resize(ratios.size());
  for (size_t i = 0; i < ratios.size(); ++i) {
    std::ostringstream label;
    label << ratios[i];
    report.rows[i].label = label.str();
  }
  for (uint64_t seed : config.seeds) {
    const SyntheticPool pool =
        experiment.build_pool_for(dataset, experiment.generator(), seed);
    for (size_t i = 0; i < ratios.size(); ++i) {
      auto& row = report.rows[i];
      row.dare_runs.push_back(
          experiment.run_pipeline(dataset, Pipeline::kDare, seed, &pool, ratios[i]));
      row.bb_runs.push_back(
          experiment.run_pipeline(dataset, Pipeline::kBalancedBagging, seed));
      for (const auto& counts : row.dare_runs.back().member_synthetic_counts)
        for (const auto& [label, n] : counts)
          spdlog::info("ratio {} seed {}: member used {} synthetic '{}'", ratios[i],
                       seed, n, label);
    }
  }
  for (auto& row : report.rows) {
    row.dare = summarize_runs(row.dare_runs);
    row.balanced_bagging = summarize_runs(row.bb_runs);
  }

  std::vector<std::string> header{"method"};
  for (const auto& row : report.rows) header.push_back("r=" + row.label);
  TextTable table(header);
  std::vector<std::string> dare_row{"DARE"};
  std::vector<std::string> bb_row{"BB"};
  ordered_json rows = ordered_json::array();
  for (size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    dare_row.push_back(format_summary(row.dare.micro_f1));
    bb_row.push_back(format_summary(row.balanced_bagging.micro_f1));
    ordered_json r;
    r["ratio"] = ratios[i];
    r["dare"] = to_json(row.dare);
    r["balanced_bagging"] = to_json(row.balanced_bagging);
    ordered_json per_seed = ordered_json::array();
    for (size_t k = 0; k < row.dare_runs.size(); ++k)
      per_seed.push_back(ordered_json{
          {"seed", row.dare_runs[k].seed},
          {"dare", run_json(row.dare_runs[k], dataset.schema)},
          {"balanced_bagging", run_json(row.bb_runs[k], dataset.schema)}});
    r["per_seed"] = std::move(per_seed);
    rows.push_back(std::move(r));
  }
  table.add_row(dare_row);
  table.add_row(bb_row);
  report.json = ordered_json{{"command", "ratio-study"},
                             {"config", config.to_json()},
                             {"rows", std::move(rows)}};
  report.table = "Micro-F1 by synthetic-to-gold ratio, " +
                 seeds_label(config.seeds) + " (mean ± std)\n\n" + table.render();
  TextTable csv({"ratio", "dare_f1_mean", "dare_f1_std", "bb_f1_mean", "bb_f1_std"});
  for (const auto& row : report.rows) {
    std::vector<std::string> cells{row.label};
    add_metric_cells(cells, row.dare.micro_f1);
    add_metric_cells(cells, row.balanced_bagging.micro_f1);
    csv.add_row(std::move(cells));
  }
  write_reports(config.output, report.json, report.table, csv.csv());
  return report;
}

// --- generator study ----------------------------------------------------

GeneratorStudyReport cmd_generator_study(const ExperimentConfig& config) {
  Experiment experiment(config);
  return cmd_generator_study(experiment);
}

GeneratorStudyReport cmd_generator_study(Experiment& experiment) {
  const auto& config = experiment.config();
  const auto& dataset = experiment.dataset();
  if (!config.base_corpus)
    throw Error("generator study: an in-domain base corpus is required");

  GeneratorStudyReport report;
  report.vanilla.pipeline = Pipeline::kDare;
  report.in_domain.pipeline = Pipeline::kDare;
  {
    auto vanilla = experiment.make_generator(true);
    for (uint64_t seed : config.seeds) {
      const SyntheticPool pool = experiment.build_pool_for(dataset, *vanilla, seed);
      report.vanilla.runs.push_back(
          experiment.run_pipeline(dataset, Pipeline::kDare, seed, &pool));
    }
  }
  {
    auto fitted = experiment.make_generator(false);
    for (uint64_t seed : config.seeds) {
      const SyntheticPool pool = experiment.build_pool_for(dataset, *fitted, seed);
      report.in_domain.runs.push_back(
          experiment.run_pipeline(dataset, Pipeline::kDare, seed, &pool));
    }
  }
  report.vanilla.summary = summarize_runs(report.vanilla.runs);
  report.in_domain.summary = summarize_runs(report.in_domain.runs);

  TextTable table({"base", "Precision", "Recall", "F1"});
  for (const auto* s : {&report.vanilla, &report.in_domain})
    table.add_row({s == &report.vanilla ? "vanilla" : "in-domain",
                   format_summary(s->summary.micro_precision),
                   format_summary(s->summary.micro_recall),
                   format_summary(s->summary.micro_f1)});
  report.json = ordered_json{{"command", "generator-study"},
                             {"config", config.to_json()},
                             {"vanilla", summary_json(report.vanilla, dataset.schema)},
                             {"in_domain", summary_json(report.in_domain, dataset.schema)}};
  report.table = "DARE with a vanilla vs an in-domain generator base, " +
                 seeds_label(config.seeds) + " (mean ± std)\n\n" + table.render();
  TextTable csv({"base", "precision_mean", "precision_std", "recall_mean", "recall_std",
                 "f1_mean", "f1_std"});
  for (const auto* s : {&report.vanilla, &report.in_domain}) {
    std::vector<std::string> cells{s == &report.vanilla ? "vanilla" : "in-domain"};
    add_metric_cells(cells, s->summary.micro_precision);
    add_metric_cells(cells, s->summary.micro_recall);
    add_metric_cells(cells, s->summary.micro_f1);
    csv.add_row(std::move(cells));
  }
  write_reports(config.output, report.json, report.table, csv.csv());
  return report;
}

// --- generate -------------------------------------------------------------

SyntheticPool cmd_generate(const ExperimentConfig& config) {
  Experiment experiment(config);
  SyntheticPool pool = experiment.build_pool_for(
      experiment.dataset(), experiment.generator(), config.seeds.front());
  if (!config.output.empty()) {
    std::vector<RelationInstance> all;
    for (const auto& type : experiment.dataset().schema.relation_types) {
      const auto& instances = pool.per_class.at(type);
      all.insert(all.end(), instances.begin(), instances.end());
    }
    std::filesystem::create_directories(config.output);
    write_split(config.output / "pool.jsonl", all);
    ordered_json classes = ordered_json::object();
    for (const auto& [label, info] : pool.info)
      classes[label] = ordered_json{{"gold_count", info.gold_count},
                                    {"generated", info.requested},
                                    {"seed", info.seed},
                                    {"adapter_id", info.adapter_id},
                                    {"attempts", info.attempts},
                                    {"rejected_mask", info.rejected_mask},
                                    {"rejected_length", info.rejected_length}};
    ordered_json provenance{{"command", "generate"},
                            {"config", config.to_json()},
                            {"generator", pool.generator},
                            {"seed", pool.params.seed},
                            {"multiplier", pool.multiplier},
                            {"digest", pool.digest()},
                            {"classes", std::move(classes)}};
    write_text_file(config.output / "pool.json", provenance.dump(2) + "\n");
  }
  return pool;
}

// --- mcnemar --------------------------------------------------------------

McNemarResult cmd_mcnemar(const std::filesystem::path& a,
                          const std::filesystem::path& b) {
  auto read = [](const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::map<std::string, std::pair<std::string, std::string>> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const json j = json::parse(line);
        const auto id = j.at("id").get<std::string>();
        if (!out.emplace(id, std::make_pair(j.at("prediction").get<std::string>(),
                                            j.at("gold").get<std::string>()))
                 .second)
          throw DatasetError(file.string(), line_no, "duplicate id '" + id + "'");
      } catch (const json::exception& e) {
        throw DatasetError(file.string(), line_no, e.what());
      }
    }
    return out;
  };
  const auto first = read(a);
  const auto second = read(b);
  if (first.size() != second.size())
    throw Error("mcnemar: prediction files cover different items");
  std::vector<std::string> pa, pb, gold;
  for (const auto& [id, entry] : first) {
    auto it = second.find(id);
    if (it == second.end()) throw Error("mcnemar: id '" + id + "' missing from " + b.string());
    if (it->second.second != entry.second)
      throw Error("mcnemar: gold labels disagree for id '" + id + "'");
    pa.push_back(entry.first);
    pb.push_back(it->second.first);
    gold.push_back(entry.second);
  }
  return mcnemar(pa, pb, gold);
}

// --- validate ---------------------------------------------------------------

ValidationReport cmd_validate(const std::filesystem::path& dataset_dir) {
  ValidationReport report;
  Dataset dataset;
  try {
    dataset = load_dataset(dataset_dir);
  } catch (const DatasetError& e) {
    report.ok = false;
    for (const auto& issue : e.issues())
      report.errors.push_back(e.file() +
                              (issue.line ? ":" + std::to_string(issue.line) : "") +
                              ": " + issue.message);
  }
  // Keep going through the remaining splits so one run lists every problem.
  if (!report.ok) {
    for (const char* split : {"dev.jsonl", "test.jsonl"}) {
      const auto file = dataset_dir / split;
      if (!std::filesystem::exists(file)) continue;
      try {
        load_split(file, load_schema(dataset_dir / "dataset.json"));
      } catch (const DatasetError& e) {
        for (const auto& issue : e.issues()) {
          std::string entry = e.file() +
                              (issue.line ? ":" + std::to_string(issue.line) : "") +
                              ": " + issue.message;
          if (std::find(report.errors.begin(), report.errors.end(), entry) ==
              report.errors.end())
            report.errors.push_back(std::move(entry));
        }
      }
    }
    report.json = ordered_json{{"ok", false}, {"errors", report.errors}};
    report.table = "";
    for (const auto& error : report.errors) report.table += error + "\n";
    return report;
  }

  const auto& schema = dataset.schema;
  std::vector<std::string> header{"split", "instances", "positives"};
  for (const auto& type : schema.relation_types) header.push_back(type);
  header.push_back(schema.null_label);
  TextTable table(header);
  ordered_json splits = ordered_json::object();
  for (const auto& [name, split] :
       {std::pair<std::string, const std::vector<RelationInstance>*>{"train", &dataset.train},
        {"dev", &dataset.dev},
        {"test", &dataset.test}}) {
    const ClassPartition partition = partition_by_class(*split, schema);
    std::vector<std::string> row{name, std::to_string(split->size()),
                                 std::to_string(count_positives(*split, schema))};
    ordered_json counts = ordered_json::object();
    for (const auto& type : schema.relation_types) {
      row.push_back(std::to_string(partition.by_class.at(type).size()));
      counts[type] = partition.by_class.at(type).size();
    }
    row.push_back(std::to_string(partition.null_count));
    counts[schema.null_label] = partition.null_count;
    table.add_row(std::move(row));
    splits[name] = ordered_json{{"instances", split->size()},
                                {"positives", count_positives(*split, schema)},
                                {"per_class", std::move(counts)}};
  }
  report.json = ordered_json{{"ok", true}, {"splits", std::move(splits)}};
  report.table = table.render();
  return report;
}

std::vector<TokenSequence> load_text_corpus(const std::filesystem::path& file,
                                            const RelationSchema& schema) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open corpus " + file.string());
  std::vector<TokenSequence> corpus;
  std::string line;
  while (std::getline(in, line)) {
    TokenSequence tokens;
    std::istringstream words(line);
    for (std::string word; words >> word;) tokens.push_back(word);
    if (tokens.empty()) continue;
    normalize_masks(tokens, schema);
    corpus.push_back(std::move(tokens));
  }
  if (corpus.empty()) throw Error("corpus " + file.string() + " is empty");
  return corpus;
}

}  // namespace dare
