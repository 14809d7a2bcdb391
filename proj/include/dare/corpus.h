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

#ifndef DARE_CORPUS_H_
#define DARE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dare {

// The ordered relation-type inventory plus the null label and the canonical
// entity mask pair. Class indices run 0..c-1 over relation_types, and the
// null label takes index c.
struct RelationSchema {
  std::vector<std::string> relation_types;
  std::string null_label = "null";
  std::string mask_a = "ENTITY_A";
  std::string mask_b = "ENTITY_B";
  // Dataset-specific surface masks (e.g. DRUG / DISEASE) rewritten to the
  // canonical pair on load.
  std::vector<std::string> mask_a_aliases;
  std::vector<std::string> mask_b_aliases;

  // Throws dare::Error when an invariant does not hold.
  void validate() const;

  size_t num_relation_types() const { return relation_types.size(); }
  size_t num_classes() const { return relation_types.size() + 1; }
  size_t null_index() const { return relation_types.size(); }

  bool is_null(std::string_view label) const { return label == null_label; }

  // Index of a relation type or the null label; nullopt for unknown labels.
  std::optional<size_t> class_index(std::string_view label) const;

  // Label for a class index (null for index c).
  const std::string& label_of(size_t index) const;
};

struct RelationInstance {
  std::string id;
  std::vector<std::string> tokens;
  std::string label;

  friend bool operator==(const RelationInstance&,
                         const RelationInstance&) = default;
};

struct Dataset {
  RelationSchema schema;
  std::vector<RelationInstance> train;
  std::vector<RelationInstance> dev;
  std::vector<RelationInstance> test;
};

// Returns a description of the first violated instance invariant, or
// nullopt when the instance is valid under `schema`.
std::optional<std::string> check_instance(const RelationInstance& instance,
                                          const RelationSchema& schema);

// Rewrites declared surface masks to the canonical mask pair, in place.
void normalize_masks(std::vector<std::string>& tokens,
                     const RelationSchema& schema);

// Convenience for fixtures: whitespace-splits `text` and normalizes masks.
RelationInstance instance_from_text(std::string id, std::string_view text,
                                    std::string label,
                                    const RelationSchema& schema);

// --- Dataset I/O -----------------------------------------------------------
//
// A dataset directory holds:
//   dataset.json  {"relation_types":[...], "null_label":..., "mask_a":...,
//                  "mask_b":..., "mask_a_aliases":[...], "mask_b_aliases":[...]}
//   train.jsonl / dev.jsonl / test.jsonl
//                 one {"id":..., "tokens":[...], "label":...} per line.
// dev.jsonl and test.jsonl are optional. All problems in a split are
// collected and thrown together as a DatasetError.

RelationSchema load_schema(const std::filesystem::path& manifest);
void write_schema(const std::filesystem::path& manifest,
                  const RelationSchema& schema);

std::vector<RelationInstance> load_split(const std::filesystem::path& file,
                                         const RelationSchema& schema);
void write_split(const std::filesystem::path& file,
                 const std::vector<RelationInstance>& instances);

// Loads all splits of `dir` against an explicit schema.
Dataset load_dataset(const std::filesystem::path& dir,
                     const RelationSchema& schema);
// Loads all splits of `dir` against the schema in its dataset.json.
Dataset load_dataset(const std::filesystem::path& dir);
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

// Throws DatasetError if any instance is invalid or ids repeat in a split.
void validate_split(const std::vector<RelationInstance>& split,
                    const RelationSchema& schema, const std::string& name);
void validate_dataset(const Dataset& dataset);

// --- Partitioning and sampling --------------------------------------------

struct ClassPartition {
  // One entry per relation type (possibly empty), never the null label.
  std::map<std::string, std::vector<RelationInstance>> by_class;
  size_t null_count = 0;
};

ClassPartition partition_by_class(const std::vector<RelationInstance>& split,
                                  const RelationSchema& schema);

size_t count_positives(const std::vector<RelationInstance>& split,
                       const RelationSchema& schema);

// Seeded random hold-out. |dev| = round_half_up(fraction * |train|); both
// parts keep the input order.
std::pair<std::vector<RelationInstance>, std::vector<RelationInstance>>
split_dev(const std::vector<RelationInstance>& train, double fraction,
          uint64_t seed);

// Keeps `n_positives` uniformly chosen non-null train instances and every
// null instance, in input order. dev and test are untouched.
Dataset subsample_positives(const Dataset& dataset, size_t n_positives,
                            uint64_t seed);

}  // namespace dare

#endif  // DARE_CORPUS_H_
