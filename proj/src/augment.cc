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

#include "dare/augment.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "dare/error.h"
#include "dare/eval.h"
#include "dare/rng.h"
#include "parallel.h"

namespace dare {

using json = nlohmann::json;

namespace {

constexpr std::string_view kEnsembleFormat = "dare-ensemble/1";

std::vector<TokenSequence> token_corpus(
    const std::vector<RelationInstance>& instances) {
  std::vector<TokenSequence> corpus;
  corpus.reserve(instances.size());
  for (const auto& instance : instances) corpus.push_back(instance.tokens);
  return corpus;
}

std::map<std::string, size_t> composition(
    const std::vector<RelationInstance>& train, const RelationSchema& schema) {
  std::map<std::string, size_t> counts;
  for (size_t c = 0; c < schema.num_classes(); ++c) counts[schema.label_of(c)] = 0;
  for (const auto& instance : train) ++counts[instance.label];
  return counts;
}

std::string hex64(uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

// Trains one member per index with `make_train(m)` supplying the data, then
// fixes thresholds according to the policy.
template <typename MakeTrain>
Ensemble train_members(std::string kind, const Dataset& dataset,
                       const EnsembleConfig& config,
                       const ClassifierFactory& factory,
                       const ClassWeights& weights, MakeTrain&& make_train) {
  config.validate();
  if (dataset.dev.empty())
    throw Error(kind + ": threshold tuning needs a non-empty dev split");
  Ensemble ensemble{std::move(kind), dataset.schema, config, {}};
  ensemble.members.resize(config.n_members);

  const auto& schema = dataset.schema;
  std::vector<size_t> dev_gold;
  for (const auto& instance : dataset.dev)
    dev_gold.push_back(*schema.class_index(instance.label));
  std::vector<std::vector<std::vector<double>>> dev_proba(config.n_members);

  parallel_for(config.n_members, config.threads, [&](size_t m) {
    EnsembleMember& member = ensemble.members[m];
    member.sample_seed = member_sample_seed(config.seed, m);
    member.train_seed = member_train_seed(config.seed, m);
    std::vector<RelationInstance> train = make_train(m, member);
    member.train_size = train.size();
    member.class_counts = composition(train, schema);
    member.classifier = factory(train, schema, weights, member.train_seed);
    auto& proba = dev_proba[m];
    proba.reserve(dataset.dev.size());
    for (const auto& instance : dataset.dev)
      proba.push_back(member.classifier->predict_proba(instance));
    if (config.threshold_policy == ThresholdPolicy::kPerMember) {
      const auto choice =
          tune_threshold(proba, dev_gold, schema, config.threshold_grid);
      member.rule = choice.rule;
      member.dev_micro_f1 = choice.dev_micro_f1;
    }
    spdlog::debug("{} member {}: {} training instances", ensemble.kind, m,
                  member.train_size);
  });

  if (config.threshold_policy == ThresholdPolicy::kShared) {
    // One threshold for every member, chosen on the voted dev predictions.
    std::vector<double> grid(config.threshold_grid);
    std::sort(grid.begin(), grid.end());
    double best_f1 = -1.0;
    double best_t = grid.front();
    std::vector<size_t> decisions(config.n_members);
    std::vector<size_t> voted(dataset.dev.size());
    for (double t : grid) {
      const PredictionRule rule{t};
      rule.validate();
      for (size_t i = 0; i < dataset.dev.size(); ++i) {
        for (size_t m = 0; m < config.n_members; ++m)
          decisions[m] = apply_rule(dev_proba[m][i], schema, rule);
        voted[i] = plurality(decisions, schema);
      }
      const double f1 = evaluate_indices(voted, dev_gold, schema).micro_f1;
      if (f1 > best_f1) {
        best_f1 = f1;
        best_t = t;
      }
    }
    for (auto& member : ensemble.members) {
      member.rule = PredictionRule{best_t};
      member.dev_micro_f1 = best_f1;
    }
  }
  return ensemble;
}

}  // namespace

// --- Pool ---------------------------------------------------------------

size_t SyntheticPool::size() const {
  size_t total = 0;
  for (const auto& [label, instances] : per_class) total += instances.size();
  return total;
}

std::string SyntheticPool::digest() const {
  uint64_t h = fnv1a64("");
  for (const auto& [label, instances] : per_class) {
    h = fnv1a64(label, h);
    for (const auto& instance : instances) {
      h = fnv1a64("\x1e", h);
      for (const auto& token : instance.tokens) {
        h = fnv1a64(token, h);
        h = fnv1a64("\x1f", h);
      }
    }
  }
  return hex64(h);
}

SyntheticPool build_pool(const Dataset& dataset, GeneratorBackend& generator,
                         const GeneratorParams& params, double multiplier) {
  params.validate();
  if (!(multiplier > 0.0)) throw Error("build_pool: multiplier must be positive");
  const auto& schema = dataset.schema;
  const ClassPartition partition = partition_by_class(dataset.train, schema);

  SyntheticPool pool;
  pool.generator = generator.describe();
  pool.params = params;
  pool.multiplier = multiplier;

  std::vector<std::string> failures;
  for (size_t c = 0; c < schema.num_relation_types(); ++c) {
    const std::string& label = schema.relation_types[c];
    const auto& gold = partition.by_class.at(label);
    if (gold.empty())
      throw Error("build_pool: relation type '" + label +
                  "' has no gold training instance");

    PoolClassInfo info;
    info.gold_count = gold.size();
    info.requested = std::max<size_t>(
        1, round_half_up(multiplier * static_cast<double>(gold.size())));
    info.seed = derive_seed(params.seed, c);
    info.adapter_id = generator.adapt(label, token_corpus(gold));

    size_t request = 0;
    const uint64_t class_seed = info.seed;
    const std::string adapter_id = info.adapter_id;
    SampleSource source = [&](size_t count) {
      GeneratorParams draw = params;
      draw.seed = derive_seed(class_seed, request++);
      return generator.sample(adapter_id, count, draw);
    };
    try {
      FilteredBatch batch = generate_filtered(
          source, params, schema, info.requested, label,
          "synth-" + label + "-" + std::to_string(params.seed) + "-");
      info.attempts = batch.attempts;
      info.rejected_mask = batch.rejected_mask;
      info.rejected_length = batch.rejected_length;
      pool.per_class[label] = std::move(batch.instances);
      spdlog::info("pool '{}': {} instances from {} draws ({} rejected)", label,
                   info.requested, info.attempts,
                   info.rejected_mask + info.rejected_length);
    } catch (const BudgetExhaustedError& e) {
      failures.push_back(e.what());
      info.attempts = e.attempts();
    }
    pool.info[label] = info;
  }
  if (!failures.empty()) {
    std::string message = "build_pool: generation failed for " +
                          std::to_string(failures.size()) + " class(es)";
    for (const auto& failure : failures) message += "\n  " + failure;
    throw Error(message);
  }
  return pool;
}

PoolSample subsample_pool(const SyntheticPool& pool, const Dataset& dataset,
                          double ratio, uint64_t seed) {
  if (!(ratio >= 0.0)) throw Error("subsample_pool: ratio must be non-negative");
  const auto& schema = dataset.schema;
  const ClassPartition partition = partition_by_class(dataset.train, schema);

  PoolSample out;
  Rng rng(seed);
  for (const auto& label : schema.relation_types) {
    const size_t need = round_half_up(
        ratio * static_cast<double>(partition.by_class.at(label).size()));
    out.per_class[label] = need;
    if (need == 0) continue;
    auto it = pool.per_class.find(label);
    if (it == pool.per_class.end() || it->second.empty())
      throw Error("subsample_pool: pool has no instances for '" + label + "'");
    const auto& available = it->second;
    std::vector<size_t> picks;
    if (available.size() >= need) {
      picks = rng.sample_without_replacement(available.size(), need);
    } else {
      spdlog::warn(
          "subsample_pool: pool for '{}' holds {} < {} instances; sampling with "
          "replacement",
          label, available.size(), need);
      out.with_replacement.push_back(label);
      picks = rng.sample_with_replacement(available.size(), need);
    }
    for (size_t k : picks) out.instances.push_back(available[k]);
  }
  return out;
}

// --- Ensembles ----------------------------------------------------------

void EnsembleConfig::validate() const {
  if (n_members < 1) throw Error("ensemble: n_members must be at least 1");
  if (!(ratio >= 0.0)) throw Error("ensemble: ratio must be non-negative");
  if (threshold_grid.empty()) throw Error("ensemble: empty threshold grid");
}

uint64_t member_sample_seed(uint64_t seed, size_t member) {
  return derive_seed(seed, 2 * member);
}

uint64_t member_train_seed(uint64_t seed, size_t member) {
  return derive_seed(seed, 2 * member + 1);
}

Ensemble train_dare(const Dataset& dataset, const SyntheticPool& pool,
                    const EnsembleConfig& config,
                    const ClassifierFactory& factory) {
  return train_members(
      "dare", dataset, config, factory, ClassWeights::uniform(dataset.schema),
      [&](size_t, EnsembleMember& member) {
        PoolSample synthetic =
            subsample_pool(pool, dataset, config.ratio, member.sample_seed);
        member.synthetic_counts = synthetic.per_class;
        std::vector<RelationInstance> train = dataset.train;
        train.insert(train.end(),
                     std::make_move_iterator(synthetic.instances.begin()),
                     std::make_move_iterator(synthetic.instances.end()));
        return train;
      });
}

Ensemble train_balanced_bagging(const Dataset& dataset,
                                const EnsembleConfig& config,
                                const ClassifierFactory& factory) {
  const auto& schema = dataset.schema;
  std::vector<std::vector<size_t>> by_class(schema.num_classes());
  for (size_t i = 0; i < dataset.train.size(); ++i)
    by_class[*schema.class_index(dataset.train[i].label)].push_back(i);
  for (size_t c = 0; c < by_class.size(); ++c)
    if (by_class[c].empty())
      throw Error("balanced bagging: class '" + schema.label_of(c) +
                  "' has no training instance");
  size_t minority = by_class[0].size();
  for (const auto& members : by_class) minority = std::min(minority, members.size());

  return train_members(
      "balanced_bagging", dataset, config, factory, ClassWeights::uniform(schema),
      [&](size_t, EnsembleMember& member) {
        Rng rng(member.sample_seed);
        std::vector<bool> keep(dataset.train.size(), false);
        for (const auto& members : by_class)
          for (size_t k : rng.sample_without_replacement(members.size(), minority))
            keep[members[k]] = true;
        std::vector<RelationInstance> train;
        train.reserve(minority * by_class.size());
        for (size_t i = 0; i < dataset.train.size(); ++i)
          if (keep[i]) train.push_back(dataset.train[i]);
        return train;
      });
}

Ensemble train_class_weighting(const Dataset& dataset,
                               const EnsembleConfig& config,
                               const ClassifierFactory& factory) {
  const ClassWeights weights = compute_class_weights(dataset.train, dataset.schema);
  return train_members("class_weighting", dataset, config, factory, weights,
                       [&](size_t, EnsembleMember&) { return dataset.train; });
}

Ensemble train_gold_only(const Dataset& dataset, const EnsembleConfig& config,
                         const ClassifierFactory& factory) {
  return train_members("gold_only", dataset, config, factory,
                       ClassWeights::uniform(dataset.schema),
                       [&](size_t, EnsembleMember&) { return dataset.train; });
}

size_t plurality(const std::vector<size_t>& decisions,
                 const RelationSchema& schema) {
  if (decisions.empty()) throw Error("vote: empty ensemble");
  std::vector<size_t> counts(schema.num_classes(), 0);
  for (size_t d : decisions) ++counts[d];
  const size_t top = *std::max_element(counts.begin(), counts.end());
  if (counts[schema.null_index()] == top) return schema.null_index();
  for (size_t c = 0; c < schema.null_index(); ++c)
    if (counts[c] == top) return c;
  return schema.null_index();
}

std::vector<size_t> member_decisions(const Ensemble& ensemble,
                                     const RelationInstance& instance) {
  std::vector<size_t> decisions;
  decisions.reserve(ensemble.members.size());
  for (const auto& member : ensemble.members)
    decisions.push_back(apply_rule(member.classifier->predict_proba(instance),
                                   ensemble.schema, member.rule));
  return decisions;
}

std::string vote(const Ensemble& ensemble, const RelationInstance& instance) {
  return ensemble.schema.label_of(
      plurality(member_decisions(ensemble, instance), ensemble.schema));
}

std::vector<std::string> vote_all(const Ensemble& ensemble,
                                  const std::vector<RelationInstance>& instances) {
  std::vector<std::string> out;
  out.reserve(instances.size());
  for (const auto& instance : instances) out.push_back(vote(ensemble, instance));
  return out;
}

// --- Persistence --------------------------------------------------------

void save_ensemble(const std::filesystem::path& dir, const Ensemble& ensemble) {
  std::filesystem::create_directories(dir);
  json members = json::array();
  for (size_t m = 0; m < ensemble.members.size(); ++m) {
    const auto& member = ensemble.members[m];
    char name[32];
    std::snprintf(name, sizeof(name), "member-%02zu.json", m);
    const std::string body = member.classifier->to_json().dump();
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << body << '\n';
    members.push_back(json{{"file", name},
                           {"threshold", member.rule.threshold},
                           {"sample_seed", member.sample_seed},
                           {"train_seed", member.train_seed},
                           {"train_size", member.train_size},
                           {"class_counts", member.class_counts},
                           {"synthetic_counts", member.synthetic_counts},
                           {"dev_micro_f1", member.dev_micro_f1},
                           {"digest", hex64(fnv1a64(body))}});
  }
  const auto& config = ensemble.config;
  json manifest{
      {"format", kEnsembleFormat},
      {"kind", ensemble.kind},
      {"config",
       {{"n_members", config.n_members},
        {"ratio", config.ratio},
        {"seed", config.seed},
        {"threshold_policy", config.threshold_policy == ThresholdPolicy::kShared
                                 ? "shared"
                                 : "per-member"},
        {"threshold_grid", config.threshold_grid}}},
      {"members", std::move(members)}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

Ensemble load_ensemble(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("cannot open " + (dir / "manifest.json").string());
  try {
    const json manifest = json::parse(in);
    if (manifest.at("format").get<std::string>() != kEnsembleFormat)
      throw Error("ensemble: unsupported format");
    Ensemble ensemble;
    ensemble.kind = manifest.at("kind").get<std::string>();
    const json& config = manifest.at("config");
    ensemble.config.n_members = config.at("n_members").get<size_t>();
    ensemble.config.ratio = config.at("ratio").get<double>();
    ensemble.config.seed = config.at("seed").get<uint64_t>();
    ensemble.config.threshold_policy =
        config.at("threshold_policy").get<std::string>() == "shared"
            ? ThresholdPolicy::kShared
            : ThresholdPolicy::kPerMember;
    ensemble.config.threshold_grid =
        config.at("threshold_grid").get<std::vector<double>>();
    for (const auto& entry : manifest.at("members")) {
      const auto file = dir / entry.at("file").get<std::string>();
      std::ifstream member_in(file);
      if (!member_in) throw Error("cannot open " + file.string());
      std::string body;
      std::getline(member_in, body);
      if (hex64(fnv1a64(body)) != entry.at("digest").get<std::string>())
        throw Error("ensemble: digest mismatch for " + file.string());
      auto classifier = std::make_shared<LinearTextClassifier>(
          LinearTextClassifier::from_json(json::parse(body)));
      EnsembleMember member;
      member.rule.threshold = entry.at("threshold").get<double>();
      member.sample_seed = entry.at("sample_seed").get<uint64_t>();
      member.train_seed = entry.at("train_seed").get<uint64_t>();
      member.train_size = entry.at("train_size").get<size_t>();
      member.class_counts =
          entry.at("class_counts").get<std::map<std::string, size_t>>();
      member.synthetic_counts =
          entry.at("synthetic_counts").get<std::map<std::string, size_t>>();
      member.dev_micro_f1 = entry.at("dev_micro_f1").get<double>();
      ensemble.schema = classifier->schema();
      member.classifier = std::move(classifier);
      ensemble.members.push_back(std::move(member));
    }
    if (ensemble.members.size() != ensemble.config.n_members)
      throw Error("ensemble: member count does not match the manifest");
    return ensemble;
  } catch (const json::exception& e) {
    throw Error(std::string("ensemble: malformed manifest: ") + e.what());
  }
}

}  // namespace dare
