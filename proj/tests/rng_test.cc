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

#include "dare/rng.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dare {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, Uniform01InRange) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, UniformIndexCoversRangeEvenly) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_index(7)];
  const double expected = draws / 7.0;
  const double se = std::sqrt(draws * (1.0 / 7) * (6.0 / 7));
  for (int c : counts) EXPECT_NEAR(c, expected, 4 * se);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(9);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto shuffled = v;
  rng.shuffle(shuffled);
  EXPECT_NE(shuffled, v);
  std::sort(shuffled.begin(), shuffled.end());
  EXPECT_EQ(shuffled, v);
}

TEST(Rng, SampleWithoutReplacementDistinct) {
  Rng rng(5);
  for (size_t k : {0u, 1u, 10u, 30u}) {
    auto idx = rng.sample_without_replacement(30, k);
    ASSERT_EQ(idx.size(), k);
    std::set<size_t> unique(idx.begin(), idx.end());
    EXPECT_EQ(unique.size(), k);
    for (size_t i : idx) EXPECT_LT(i, 30u);
  }
}

TEST(Rng, CategoricalSkipsZeroWeights) {
  Rng rng(11);
  const std::vector<double> w{0.0, 1.0, 0.0, 3.0};
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 40000; ++i) ++counts[rng.categorical(w)];
  EXPECT_EQ(counts[0], 0);
  EXPECT_EQ(counts[2], 0);
  EXPECT_NEAR(counts[3] / 40000.0, 0.75, 0.01);
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  std::set<uint64_t> seen;
  for (uint64_t s = 0; s < 20; ++s)
    for (uint64_t stream = 0; stream < 20; ++stream)
      seen.insert(derive_seed(s, stream));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Rng, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Rng, RoundHalfUp) {
  EXPECT_EQ(round_half_up(0.5), 1u);
  EXPECT_EQ(round_half_up(0.9), 1u);
  EXPECT_EQ(round_half_up(1.49), 1u);
  EXPECT_EQ(round_half_up(726.5), 727u);
  EXPECT_EQ(round_half_up(0.0), 0u);
}

}  // namespace
}  // namespace dare
