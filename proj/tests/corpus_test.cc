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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "dare/error.h"
#include "dare/synthetic.h"
#include "test_util.h"

namespace dare {
namespace {

using testing::TempDir;
using testing::schema_of;

void write_lines(const std::filesystem::path& file,
                 const std::vector<std::string>& lines) {
  std::ofstream out(file);
  for (const auto& line : lines) out << line << '\n';
}

std::vector<RelationInstance> numbered(size_t n, const std::string& label = "null") {
  std::vector<RelationInstance> out;
  for (size_t i = 0; i < n; ++i)
    out.push_back({"i" + std::to_string(i), {"ENTITY_A", "x", "ENTITY_B"}, label});
  return out;
}

TEST(Schema, IndicesAndLabels) {
  auto schema = schema_of({"advise", "effect"});
  schema.validate();
  EXPECT_EQ(schema.num_classes(), 3u);
  EXPECT_EQ(schema.null_index(), 2u);
  EXPECT_EQ(schema.class_index("effect"), 1u);
  EXPECT_EQ(schema.class_index("null"), 2u);
  EXPECT_FALSE(schema.class_index("other"));
  EXPECT_EQ(schema.label_of(0), "advise");
  EXPECT_EQ(schema.label_of(2), "null");
}

TEST(Schema, RejectsBadDefinitions) {
  EXPECT_THROW(schema_of({}).validate(), Error);
  EXPECT_THROW(schema_of({"a", "a"}).validate(), Error);
  EXPECT_THROW(schema_of({"null"}).validate(), Error);
  auto same_masks = schema_of({"a"});
  same_masks.mask_b = same_masks.mask_a;
  EXPECT_THROW(same_masks.validate(), Error);
}

TEST(LoadDataset, MinimalRecord) {
  TempDir dir;
  write_lines(dir / "train.jsonl",
              {R"({"id":"x1","tokens":["ENTITY_A","induces","ENTITY_B"],"label":"induce"})"});
  const Dataset d = load_dataset(dir.path(), schema_of({"induce"}));
  ASSERT_EQ(d.train.size(), 1u);
  EXPECT_EQ(d.train[0].id, "x1");
  EXPECT_EQ(d.train[0].label, "induce");
  EXPECT_TRUE(d.dev.empty());
  EXPECT_TRUE(d.test.empty());
}

TEST(LoadDataset, MissingMaskNamesLineAndToken) {
  TempDir dir;
  write_lines(dir / "train.jsonl",
              {R"({"id":"x1","tokens":["ENTITY_A","induces","ENTITY_B"],"label":"induce"})",
               R"({"id":"x2","tokens":["ENTITY_A","induces","it"],"label":"induce"})"});
  try {
    load_dataset(dir.path(), schema_of({"induce"}));
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    ASSERT_EQ(e.issues().size(), 1u);
    EXPECT_EQ(e.issues()[0].line, 2u);
    EXPECT_NE(e.issues()[0].message.find("ENTITY_B"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("train.jsonl:2"), std::string::npos);
  }
}

TEST(LoadDataset, CollectsEveryBadLine) {
  TempDir dir;
  write_lines(dir / "train.jsonl",
              {R"({"id":"a","tokens":["ENTITY_A","ENTITY_B"],"label":"nope"})",
               R"(not json)",
               R"({"id":"b","tokens":["ENTITY_A","ENTITY_B"],"label":"r"})",
               R"({"id":"b","tokens":["ENTITY_A","ENTITY_B"],"label":"r"})",
               R"({"id":"c","tokens":["ENTITY_A","ENTITY_A","ENTITY_B"],"label":"r"})",
               R"({"id":"d","label":"r"})"});
  try {
    load_dataset(dir.path(), schema_of({"r"}));
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    std::vector<size_t> lines;
    for (const auto& issue : e.issues()) lines.push_back(issue.line);
    EXPECT_EQ(lines, (std::vector<size_t>{1, 2, 4, 5, 6}));
  }
}

TEST(LoadDataset, RewritesMaskAliases) {
  TempDir dir;
  auto schema = schema_of({"cid"});
  schema.mask_a_aliases = {"CHEMICAL"};
  schema.mask_b_aliases = {"DISEASE"};
  write_lines(dir / "train.jsonl",
              {R"({"id":"x","tokens":["CHEMICAL","causes","DISEASE"],"label":"cid"})"});
  const Dataset d = load_dataset(dir.path(), schema);
  EXPECT_EQ(d.train[0].tokens,
            (std::vector<std::string>{"ENTITY_A", "causes", "ENTITY_B"}));
}

TEST(LoadDataset, MissingTrainFileIsError) {
  TempDir dir;
  EXPECT_THROW(load_dataset(dir.path(), schema_of({"r"})), DatasetError);
}

TEST(LoadDataset, WriteThenLoadRoundTrips) {
  TempDir dir;
  const Dataset d = make_fixture(TemplateGrammar::multiclass({"a", "b"}),
                                 {{5, 6, 20}, {2, 2, 5}, {3, 3, 7}}, 4);
  write_dataset(dir.path(), d);
  const Dataset back = load_dataset(dir.path());
  EXPECT_EQ(back.schema.relation_types, d.schema.relation_types);
  EXPECT_EQ(back.train, d.train);
  EXPECT_EQ(back.dev, d.dev);
  EXPECT_EQ(back.test, d.test);
}

TEST(LoadDataset, CdrShapedCounts) {
  const Dataset d = make_cdr_shaped(0);
  EXPECT_EQ(d.train.size(), 3597u);
  EXPECT_EQ(count_positives(d.train, d.schema), 1453u);
  EXPECT_EQ(d.dev.size(), 3876u);
  EXPECT_EQ(d.test.size(), 3806u);
  EXPECT_NO_THROW(validate_dataset(d));
}

TEST(PartitionByClass, DdiShapedSizes) {
  const Dataset d = make_ddi_shaped(0);
  const auto p = partition_by_class(d.train, d.schema);
  std::vector<size_t> sizes;
  for (const auto& type : d.schema.relation_types) sizes.push_back(p.by_class.at(type).size());
  EXPECT_EQ(sizes, (std::vector<size_t>{153, 658, 1083, 1353}));
  EXPECT_EQ(p.null_count, d.train.size() - 153 - 658 - 1083 - 1353);
}

TEST(PartitionByClass, OnlyNullGivesEmptyPartitions) {
  const auto schema = schema_of({"a", "b"});
  const auto p = partition_by_class(numbered(4), schema);
  ASSERT_EQ(p.by_class.size(), 2u);
  EXPECT_TRUE(p.by_class.at("a").empty());
  EXPECT_TRUE(p.by_class.at("b").empty());
  EXPECT_EQ(p.null_count, 4u);
}

TEST(PartitionByClass, DisjointAndCoversPositives) {
  const auto schema = schema_of({"a", "b"});
  std::vector<RelationInstance> split;
  for (int i = 0; i < 10; ++i)
    split.push_back({"i" + std::to_string(i), {"ENTITY_A", "ENTITY_B"}, i % 2 ? "a" : "b"});
  const auto p = partition_by_class(split, schema);
  std::set<std::string> a, b;
  for (const auto& x : p.by_class.at("a")) a.insert(x.id);
  for (const auto& x : p.by_class.at("b")) b.insert(x.id);
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(b.size(), 5u);
  std::set<std::string> both;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(both, both.end()));
  EXPECT_EQ(both.size(), 10u);
}

TEST(SplitDev, SizesAndReproducibility) {
  const auto train = numbered(100);
  const auto [t1, d1] = split_dev(train, 0.10, 7);
  const auto [t2, d2] = split_dev(train, 0.10, 7);
  EXPECT_EQ(t1.size(), 90u);
  EXPECT_EQ(d1.size(), 10u);
  EXPECT_EQ(d1, d2);
  EXPECT_EQ(t1, t2);
  const auto [t3, d3] = split_dev(train, 0.10, 8);
  EXPECT_EQ(d3.size(), 10u);
  EXPECT_NE(d1, d3);
}

TEST(SplitDev, PartitionsInputInOrder) {
  const auto train = numbered(37);
  const auto [rest, dev] = split_dev(train, 0.3, 2);
  EXPECT_EQ(rest.size() + dev.size(), 37u);
  std::set<std::string> ids;
  for (const auto& x : rest) ids.insert(x.id);
  for (const auto& x : dev) ids.insert(x.id);
  EXPECT_EQ(ids.size(), 37u);
  auto position = [&](const RelationInstance& x) { return std::stoi(x.id.substr(1)); };
  for (const auto* part : {&rest, &dev})
    for (size_t i = 1; i < part->size(); ++i)
      EXPECT_LT(position((*part)[i - 1]), position((*part)[i]));
}

TEST(SplitDev, RoundsUpSmallSplits) {
  const auto [rest, dev] = split_dev(numbered(9), 0.1, 0);
  EXPECT_EQ(dev.size(), 1u);
  EXPECT_EQ(rest.size(), 8u);
}

TEST(SplitDev, RejectsBadFractions) {
  EXPECT_THROW(split_dev(numbered(10), 0.0, 0), Error);
  EXPECT_THROW(split_dev(numbered(10), 1.0, 0), Error);
  EXPECT_THROW(split_dev(numbered(3), 0.1, 0), Error);
}

TEST(SubsamplePositives, CdrShapedFifty) {
  const Dataset d = make_cdr_shaped(1);
  const Dataset sub = subsample_positives(d, 50, 3);
  EXPECT_EQ(count_positives(sub.train, sub.schema), 50u);
  EXPECT_EQ(sub.train.size() - 50, 2144u);
  EXPECT_EQ(sub.dev, d.dev);
  EXPECT_EQ(sub.test, d.test);
}

TEST(SubsamplePositives, AllIsIdentity) {
  const Dataset d = make_imbalanced_task(2, 30, 100);
  const Dataset sub = subsample_positives(d, 30, 9);
  EXPECT_EQ(sub.train, d.train);
}

TEST(SubsamplePositives, SingleKeepsExactlyOne) {
  const Dataset d = make_imbalanced_task(2, 6, 20);
  std::set<std::string> chosen;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const Dataset sub = subsample_positives(d, 1, seed);
    ASSERT_EQ(count_positives(sub.train, sub.schema), 1u);
    ASSERT_EQ(sub.train.size(), 21u);
    for (const auto& x : sub.train)
      if (!sub.schema.is_null(x.label)) chosen.insert(x.id);
  }
  EXPECT_GT(chosen.size(), 1u);
}

TEST(SubsamplePositives, TooManyIsError) {
  const Dataset d = make_imbalanced_task(2, 6, 20);
  EXPECT_THROW(subsample_positives(d, 7, 0), Error);
}

}  // namespace
}  // namespace dare
