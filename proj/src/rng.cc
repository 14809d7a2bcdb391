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

#include <cmath>
#include <numeric>
#include <string_view>

namespace dare {

std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
  // Partial Fisher-Yates over an index array.
  std::vector<size_t> index(n);
  std::iota(index.begin(), index.end(), size_t{0});
  if (k > n) k = n;
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + uniform_index(n - i);
    std::swap(index[i], index[j]);
  }
  index.resize(k);
  return index;
}

std::vector<size_t> Rng::sample_with_replacement(size_t n, size_t k) {
  std::vector<size_t> out(k);
  for (auto& x : out) x = uniform_index(n);
  return out;
}

size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01() * total;
  size_t last_positive = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last_positive;
}

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a64(std::string_view bytes, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

size_t round_half_up(double x) {
  return static_cast<size_t>(std::floor(x + 0.5));
}

}  // namespace dare
