// Copyright 2026 The DeceptForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DECEPTFORGE_RNG_HPP_
#define DECEPTFORGE_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace deceptforge {

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, used to name RNG streams.
inline uint64_t HashName(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Thin wrapper over mt19937_64 with hand-rolled conversions so that draws do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(SplitMix64(seed)) {}

  // Independent stream for (seed, name, index).
  static Rng Stream(uint64_t seed, std::string_view name, uint64_t index = 0) {
    return Rng(SplitMix64(seed ^ SplitMix64(HashName(name) + index)));
  }

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool Bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return Uniform() < p;
  }

  // Uniform integer in [lo, hi], unbiased.
  uint64_t UniformInt(uint64_t lo, uint64_t hi) {
    const uint64_t span = hi - lo;
    if (span == UINT64_MAX) return engine_();
    const uint64_t n = span + 1;
    const uint64_t limit = (UINT64_MAX / n) * n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace deceptforge

#endif  // DECEPTFORGE_RNG_HPP_
