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

// dare: command-line front end for the augmentation experiments.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dare/error.h"
#include "dare/experiment.h"
#include "dare/report.h"
#include "dare/synthetic.h"
#include "json.hpp"

namespace {

using json = nlohmann::json;

// Experiment flags. Each one maps to a config key; values given on the
// command line replace the same key from --config.
struct ExperimentFlags {
  std::string config_file;
  std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> overrides;

  std::string dataset, pipeline, generator, base_corpus, output, threshold_policy;
  std::vector<std::string> compare;
  int64_t generator_timeout = 0;
  size_t lm_order = 0, top_k = 0, max_tokens = 0, min_tokens = 0, n_members = 0;
  size_t feature_dim = 0, epochs = 0, threads = 0;
  double lm_alpha = 0, lm_lambda = 0, temperature = 0, pool_multiplier = 0;
  double ratio = 0, learning_rate = 0, dev_fraction = 0;
  uint64_t dev_seed = 0;
  std::vector<double> threshold_grid;
  std::vector<uint64_t> seeds;

  template <typename T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, T& value,
           const std::string& help) {
    CLI::Option* opt = app->add_option(flag, value, help);
    overrides.emplace_back(opt, [key, &value](json& j) { j[key] = value; });
  }

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_file, "JSON config file")
        ->check(CLI::ExistingFile);
    add(app, "-d,--dataset", "dataset", dataset, "Dataset directory");
    add(app, "-p,--pipeline", "pipeline", pipeline,
        "dare | balanced_bagging | class_weighting | gold_only");
    add(app, "--compare", "compare", compare,
        "Extra pipelines compared against --pipeline");
    add(app, "-g,--generator", "generator", generator,
        "'builtin' or a command speaking dare-gen/1");
    add(app, "--generator-timeout", "generator_timeout_s", generator_timeout,
        "Per-request timeout for an external generator, seconds");
    add(app, "--lm-order", "lm_order", lm_order, "Builtin n-gram order");
    add(app, "--lm-alpha", "lm_alpha", lm_alpha, "Builtin add-alpha smoothing");
    add(app, "--lm-lambda", "lm_lambda", lm_lambda,
        "Weight of the class model in an adapter");
    add(app, "--temperature", "temperature", temperature, "Sampling temperature");
    add(app, "--top-k", "top_k", top_k, "Sampling top-k");
    add(app, "--max-tokens", "max_tokens", max_tokens, "Sample length cap");
    add(app, "--min-tokens", "min_tokens", min_tokens,
        "Shortest synthetic sentence kept");
    add(app, "--base-corpus", "base_corpus", base_corpus,
        "In-domain text for the generator base, one sentence per line");
    add(app, "--pool-multiplier", "pool_multiplier", pool_multiplier,
        "Synthetic pool size per class, as a multiple of its gold count");
    add(app, "-m,--members", "n_members", n_members, "Ensemble size");
    add(app, "-r,--ratio", "ratio", ratio, "Synthetic-to-gold ratio");
    add(app, "--threshold-policy", "threshold_policy", threshold_policy,
        "per-member | shared");
    add(app, "--threshold-grid", "threshold_grid", threshold_grid,
        "Candidate decision thresholds");
    add(app, "--feature-dim", "feature_dim", feature_dim, "Hashed feature space size");
    add(app, "--epochs", "epochs", epochs, "Classifier training epochs");
    add(app, "--learning-rate", "learning_rate", learning_rate,
        "Classifier learning rate");
    add(app, "-s,--seeds", "seeds", seeds, "Run seeds");
    add(app, "--dev-fraction", "dev_fraction", dev_fraction,
        "Train share held out when the dataset has no dev split");
    add(app, "--dev-seed", "dev_seed", dev_seed, "Seed of the dev hold-out");
    add(app, "-j,--threads", "threads", threads, "Worker threads (0 = all cores)");
    add(app, "-o,--output", "output", output, "Report directory");
  }

  dare::ExperimentConfig resolve() const {
    json j = json::object();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw dare::Error(config_file + ": " + e.what());
      }
      if (!j.is_object()) throw dare::Error(config_file + ": expected a JSON object");
    }
    for (const auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(j);
    return dare::ExperimentConfig::from_json(j);
  }
};

template <typename T>
std::vector<T> split_list(const std::vector<std::string>& items,
                          std::function<T(const std::string&)> parse) {
  std::vector<T> out;
  for (const auto& item : items) out.push_back(parse(item));
  return out;
}

void emit(const std::string& table, const nlohmann::ordered_json& report,
          bool as_json) {
  if (as_json) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::cout << table;
  }
}

int run_fixture(const std::string& kind, const std::string& out, uint64_t seed,
                size_t positives, size_t corpus_size) {
  dare::Dataset dataset;
  dare::TemplateGrammar grammar = dare::TemplateGrammar::binary();
  if (kind == "imbalanced") {
    dataset = dare::make_imbalanced_task(seed, positives);
  } else if (kind == "cdr") {
    dataset = dare::make_cdr_shaped(seed);
  } else if (kind == "ddi") {
    dataset = dare::make_ddi_shaped(seed);
    grammar = dare::TemplateGrammar::multiclass(dataset.schema.relation_types);
  } else {
    throw dare::Error("unknown fixture '" + kind + "' (expected imbalanced, cdr, ddi)");
  }
  dare::write_dataset(out, dataset);
  if (corpus_size > 0) {
    std::string text;
    for (const auto& sentence : dare::make_in_domain_corpus(
             grammar, corpus_size, 0.5, dare::derive_seed(seed, 7))) {
      for (size_t i = 0; i < sentence.size(); ++i)
        text += (i ? " " : "") + sentence[i];
      text += '\n';
    }
    dare::write_text_file(std::filesystem::path(out) / "base_corpus.txt", text);
  }
  std::cout << "wrote " << kind << " fixture to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation-extraction data augmentation experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "warn";
  bool as_json = false;
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off");
  app.add_flag("--json", as_json, "Print the JSON report instead of tables");

  auto* run = app.add_subcommand("run", "Run pipelines over all seeds and report");
  ExperimentFlags run_flags;
  run_flags.attach(run);

  auto* curve = app.add_subcommand("imbalance-curve",
                                   "DARE vs balanced bagging by number of positives");
  ExperimentFlags curve_flags;
  curve_flags.attach(curve);
  std::vector<std::string> counts{"50", "250", "500", "1000", "all"};
  curve->add_option("--counts", counts, "Positive counts ('all' for every positive)");

  auto* ratio = app.add_subcommand("ratio-study", "DARE by synthetic-to-gold ratio");
  ExperimentFlags ratio_flags;
  ratio_flags.attach(ratio);
  std::vector<double> ratios{0.5, 1.0, 2.0, 4.0};
  ratio->add_option("--ratios", ratios, "Ratios to compare");

  auto* study = app.add_subcommand("generator-study",
                                   "DARE with a vanilla vs an in-domain generator base");
  ExperimentFlags study_flags;
  study_flags.attach(study);

  auto* generate = app.add_subcommand("generate", "Build a synthetic pool and write it");
  ExperimentFlags generate_flags;
  generate_flags.attach(generate);

  auto* mcnemar = app.add_subcommand("mcnemar", "Compare two prediction files");
  std::string file_a, file_b;
  mcnemar->add_option("a", file_a, "Predictions of system A")->required()->check(
      CLI::ExistingFile);
  mcnemar->add_option("b", file_b, "Predictions of system B")->required()->check(
      CLI::ExistingFile);

  auto* validate = app.add_subcommand("validate", "Check a dataset directory");
  std::string validate_dir;
  validate->add_option("dataset", validate_dir, "Dataset directory")->required();

  auto* fixture = app.add_subcommand("fixture", "Write a synthetic benchmark dataset");
  std::string fixture_kind = "imbalanced", fixture_out;
  uint64_t fixture_seed = 0;
  size_t fixture_positives = 50, fixture_corpus = 0;
  fixture->add_option("kind", fixture_kind, "imbalanced | cdr | ddi");
  fixture->add_option("-o,--output", fixture_out, "Output directory")->required();
  fixture->add_option("--seed", fixture_seed, "Fixture seed");
  fixture->add_option("--positives", fixture_positives,
                      "Train positives of the imbalanced task");
  fixture->add_option("--base-corpus-size", fixture_corpus,
                      "Also write an in-domain base_corpus.txt of this many lines");

  CLI11_PARSE(app, argc, argv);

  // Tables go to stdout; logs to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("dare"));
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%l] %v");

  try {
    if (run->parsed()) {
      auto report = dare::cmd_run(run_flags.resolve());
      emit(report.table, report.json, as_json);
    } else if (curve->parsed()) {
      auto parsed = split_list<size_t>(counts, [](const std::string& s) -> size_t {
        if (s == "all") return 0;
        try {
          size_t pos = 0;
          const long long v = std::stoll(s, &pos);
          if (pos != s.size() || v <= 0) throw std::invalid_argument(s);
          return static_cast<size_t>(v);
        } catch (const std::exception&) {
          throw dare::Error("invalid count '" + s + "'");
        }
      });
      auto report = dare::cmd_imbalance_curve(curve_flags.resolve(), parsed);
      emit(report.table, report.json, as_json);
    } else if (ratio->parsed()) {
      auto report = dare::cmd_ratio_study(ratio_flags.resolve(), ratios);
      emit(report.table, report.json, as_json);
    } else if (study->parsed()) {
      auto report = dare::cmd_generator_study(study_flags.resolve());
      emit(report.table, report.json, as_json);
    } else if (generate->parsed()) {
      const auto config = generate_flags.resolve();
      const auto pool = dare::cmd_generate(config);
      for (const auto& [label, instances] : pool.per_class)
        std::cout << label << ": " << instances.size() << " synthetic\n";
      std::cout << "digest " << pool.digest() << '\n';
    } else if (mcnemar->parsed()) {
      const auto result = dare::cmd_mcnemar(file_a, file_b);
      if (as_json) {
        std::cout << dare::to_json(result).dump(2) << '\n';
      } else {
        std::cout << "b=" << result.b << " c=" << result.c
                  << " statistic=" << dare::format_score(result.statistic)
                  << " p=" << dare::format_score(result.p_value)
                  << (result.significant_at_05 ? " significant at 0.05\n"
                                               : " not significant at 0.05\n");
      }
    } else if (validate->parsed()) {
      const auto report = dare::cmd_validate(validate_dir);
      emit(report.table, report.json, as_json);
      return report.ok ? 0 : 1;
    } else if (fixture->parsed()) {
      return run_fixture(fixture_kind, fixture_out, fixture_seed, fixture_positives,
                         fixture_corpus);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
