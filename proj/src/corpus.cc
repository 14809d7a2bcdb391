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

#include "dare/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dare/error.h"
#include "dare/rng.h"
#include "json.hpp"

namespace dare {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool is_single_token(const std::string& s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char ch) {
    return std::isspace(ch) != 0;
  });
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key)) out = j.at(key).get<std::vector<std::string>>();
  return out;
}

}  // namespace

void RelationSchema::validate() const {
  if (relation_types.empty()) throw Error("schema: no relation types");
  std::set<std::string> seen;
  for (const auto& type : relation_types) {
    if (type.empty()) throw Error("schema: empty relation type");
    if (!seen.insert(type).second)
      throw Error("schema: duplicate relation type '" + type + "'");
  }
  if (null_label.empty()) throw Error("schema: empty null label");
  if (seen.count(null_label))
    throw Error("schema: null label '" + null_label +
                "' is also a relation type");
  if (!is_single_token(mask_a) || !is_single_token(mask_b))
    throw Error("schema: masks must be single whitespace-free tokens");
  if (mask_a == mask_b) throw Error("schema: mask_a equals mask_b");
  for (const auto& alias : mask_a_aliases)
    if (std::count(mask_b_aliases.begin(), mask_b_aliases.end(), alias))
      throw Error("schema: alias '" + alias + "' declared for both masks");
}

std::optional<size_t> RelationSchema::class_index(std::string_view label) const {
  if (label == null_label) return null_index();
  for (size_t i = 0; i < relation_types.size(); ++i)
    if (relation_types[i] == label) return i;
  return std::nullopt;
}

const std::string& RelationSchema::label_of(size_t index) const {
  return index < relation_types.size() ? relation_types[index] : null_label;
}

std::optional<std::string> check_instance(const RelationInstance& instance,
                                          const RelationSchema& schema) {
  if (instance.id.empty()) return "empty id";
  if (!schema.class_index(instance.label))
    return "unknown label '" + instance.label + "'";
  const auto a = std::count(instance.tokens.begin(), instance.tokens.end(),
                            schema.mask_a);
  const auto b = std::count(instance.tokens.begin(), instance.tokens.end(),
                            schema.mask_b);
  if (a == 0) return "missing mask token " + schema.mask_a;
  if (a > 1) return "duplicate mask token " + schema.mask_a;
  if (b == 0) return "missing mask token " + schema.mask_b;
  if (b > 1) return "duplicate mask token " + schema.mask_b;
  return std::nullopt;
}

void normalize_masks(std::vector<std::string>& tokens,
                     const RelationSchema& schema) {
  for (auto& token : tokens) {
    if (std::count(schema.mask_a_aliases.begin(), schema.mask_a_aliases.end(),
                   token)) {
      token = schema.mask_a;
    } else if (std::count(schema.mask_b_aliases.begin(),
                          schema.mask_b_aliases.end(), token)) {
      token = schema.mask_b;
    }
  }
}

RelationInstance instance_from_text(std::string id, std::string_view text,
                                    std::string label,
                                    const RelationSchema& schema) {
  RelationInstance out{std::move(id), {}, std::move(label)};
  std::istringstream in{std::string(text)};
  for (std::string token; in >> token;) out.tokens.push_back(token);
  normalize_masks(out.tokens, schema);
  return out;
}

RelationSchema load_schema(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DatasetError(manifest.string(), 0, "cannot open manifest");
  RelationSchema schema;
  try {
    const json j = json::parse(in);
    schema.relation_types =
        j.at("relation_types").get<std::vector<std::string>>();
    schema.null_label = j.value("null_label", schema.null_label);
    schema.mask_a = j.value("mask_a", schema.mask_a);
    schema.mask_b = j.value("mask_b", schema.mask_b);
    schema.mask_a_aliases = string_list(j, "mask_a_aliases");
    schema.mask_b_aliases = string_list(j, "mask_b_aliases");
    schema.validate();
  } catch (const json::exception& e) {
    throw DatasetError(manifest.string(), 0, e.what());
  } catch (const Error& e) {
    throw DatasetError(manifest.string(), 0, e.what());
  }
  return schema;
}

void write_schema(const std::filesystem::path& manifest,
                  const RelationSchema& schema) {
  ordered_json j;
  j["relation_types"] = schema.relation_types;
  j["null_label"] = schema.null_label;
  j["mask_a"] = schema.mask_a;
  j["mask_b"] = schema.mask_b;
  if (!schema.mask_a_aliases.empty()) j["mask_a_aliases"] = schema.mask_a_aliases;
  if (!schema.mask_b_aliases.empty()) j["mask_b_aliases"] = schema.mask_b_aliases;
  std::ofstream out(manifest);
  if (!out) throw Error("cannot write " + manifest.string());
  out << j.dump(2) << '\n';
}

std::vector<RelationInstance> load_split(const std::filesystem::path& file,
                                         const RelationSchema& schema) {
  std::ifstream in(file);
  if (!in) throw DatasetError(file.string(), 0, "cannot open split file");

  std::vector<RelationInstance> out;
  std::vector<DatasetError::Issue> issues;
  std::unordered_set<std::string> ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    RelationInstance instance;
    try {
      const json j = json::parse(line);
      instance.id = j.at("id").get<std::string>();
      instance.tokens = j.at("tokens").get<std::vector<std::string>>();
      instance.label = j.at("label").get<std::string>();
    } catch (const json::parse_error& e) {
      issues.push_back({line_no, "malformed JSON at byte " +
                                     std::to_string(e.byte) + ": " + e.what()});
      continue;
    } catch (const json::exception& e) {
      issues.push_back({line_no, std::string("bad record: ") + e.what()});
      continue;
    }
    normalize_masks(instance.tokens, schema);
    if (auto problem = check_instance(instance, schema)) {
      issues.push_back({line_no, "instance '" + instance.id + "': " + *problem});
      continue;
    }
    if (!ids.insert(instance.id).second) {
      issues.push_back({line_no, "duplicate id '" + instance.id + "'"});
      continue;
    }
    out.push_back(std::move(instance));
  }
  if (!issues.empty()) throw DatasetError(file.string(), std::move(issues));
  return out;
}

void write_split(const std::filesystem::path& file,
                 const std::vector<RelationInstance>& instances) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  for (const auto& instance : instances) {
    ordered_json j;
    j["id"] = instance.id;
    j["tokens"] = instance.tokens;
    j["label"] = instance.label;
    out << j.dump() << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& dir,
                     const RelationSchema& schema) {
  schema.validate();
  Dataset dataset;
  dataset.schema = schema;
  dataset.train = load_split(dir / "train.jsonl", schema);
  if (std::filesystem::exists(dir / "dev.jsonl"))
    dataset.dev = load_split(dir / "dev.jsonl", schema);
  if (std::filesystem::exists(dir / "test.jsonl"))
    dataset.test = load_split(dir / "test.jsonl", schema);
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  return load_dataset(dir, load_schema(dir / "dataset.json"));
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  write_schema(dir / "dataset.json", dataset.schema);
  write_split(dir / "train.jsonl", dataset.train);
  if (!dataset.dev.empty()) write_split(dir / "dev.jsonl", dataset.dev);
  if (!dataset.test.empty()) write_split(dir / "test.jsonl", dataset.test);
}

void validate_split(const std::vector<RelationInstance>& split,
                    const RelationSchema& schema, const std::string& name) {
  std::vector<DatasetError::Issue> issues;
  std::unordered_set<std::string> ids;
  for (size_t i = 0; i < split.size(); ++i) {
    if (auto problem = check_instance(split[i], schema))
      issues.push_back({i + 1, "instance '" + split[i].id + "': " + *problem});
    else if (!ids.insert(split[i].id).second)
      issues.push_back({i + 1, "duplicate id '" + split[i].id + "'"});
  }
  if (!issues.empty()) throw DatasetError(name, std::move(issues));
}

void validate_dataset(const Dataset& dataset) {
  dataset.schema.validate();
  validate_split(dataset.train, dataset.schema, "train");
  validate_split(dataset.dev, dataset.schema, "dev");
  validate_split(dataset.test, dataset.schema, "test");
}

ClassPartition partition_by_class(const std::vector<RelationInstance>& split,
                                  const RelationSchema& schema) {
  ClassPartition partition;
  for (const auto& type : schema.relation_types) partition.by_class[type];
  for (const auto& instance : split) {
    if (schema.is_null(instance.label)) {
      ++partition.null_count;
      continue;
    }
    auto it = partition.by_class.find(instance.label);
    if (it == partition.by_class.end())
      throw Error("partition_by_class: unknown label '" + instance.label + "'");
    it->second.push_back(instance);
  }
  return partition;
}

size_t count_positives(const std::vector<RelationInstance>& split,
                       const RelationSchema& schema) {
  return static_cast<size_t>(
      std::count_if(split.begin(), split.end(), [&](const auto& instance) {
        return !schema.is_null(instance.label);
      }));
}

std::pair<std::vector<RelationInstance>, std::vector<RelationInstance>>
split_dev(const std::vector<RelationInstance>& train, double fraction,
          uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error("split_dev: fraction must lie in (0, 1)");
  const size_t n_dev = round_half_up(fraction * static_cast<double>(train.size()));
  if (n_dev == 0)
    throw Error("split_dev: fraction * |train| rounds to an empty dev split");

  Rng rng(seed);
  std::vector<bool> in_dev(train.size(), false);
  for (size_t i : rng.sample_without_replacement(train.size(), n_dev))
    in_dev[i] = true;

  std::pair<std::vector<RelationInstance>, std::vector<RelationInstance>> out;
  for (size_t i = 0; i < train.size(); ++i)
    (in_dev[i] ? out.second : out.first).push_back(train[i]);
  return out;
}

Dataset subsample_positives(const Dataset& dataset, size_t n_positives,
                            uint64_t seed) {
  std::vector<size_t> positive_index;
  for (size_t i = 0; i < dataset.train.size(); ++i)
    if (!dataset.schema.is_null(dataset.train[i].label))
      positive_index.push_back(i);
  if (n_positives > positive_index.size())
    throw Error("subsample_positives: requested " + std::to_string(n_positives) +
                " positives but only " + std::to_string(positive_index.size()) +
                " are available");

  Rng rng(seed);
  std::vector<bool> keep(dataset.train.size(), false);
  for (size_t k : rng.sample_without_replacement(positive_index.size(), n_positives))
    keep[positive_index[k]] = true;

  Dataset out;
  out.schema = dataset.schema;
  out.dev = dataset.dev;
  out.test = dataset.test;
  for (size_t i = 0; i < dataset.train.size(); ++i)
    if (keep[i] || dataset.schema.is_null(dataset.train[i].label))
      out.train.push_back(dataset.train[i]);
  return out;
}

}  // namespace dare
