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

#ifndef DARE_RNG_H_
#define DARE_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace dare {

// Seeded random source. Everything the toolkit samples goes through this
// wrapper so results depend only on the engine's bit stream, which the
// standard fixes, and never on library-specific distribution code.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  uint64_t uniform_index(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

  // k distinct indices from [0, n), in selection order.
  std::vector<size_t> sample_without_replacement(size_t n, size_t k);

  // k indices from [0, n), independently.
  std::vector<size_t> sample_with_replacement(size_t n, size_t k);

  // Index drawn proportionally to non-negative weights (sum must be > 0).
  size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

// Derives an independent child seed from a parent seed and a stream tag
// (splitmix64 finalizer over the combination).
uint64_t derive_seed(uint64_t seed, uint64_t stream);

// 64-bit FNV-1a. Used for feature hashing and provenance digests.
uint64_t fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);

// Round-half-up of a non-negative real to a count.
size_t round_half_up(double x);

}  // namespace dare

#endif  // DARE_RNG_H_
