// Copyright 2026 The draftlat Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Counter-based pseudo randomness. Every random quantity in the library is a
// pure function of a 64-bit seed plus a handful of integer keys, so runs are
// reproducible across platforms and independent of evaluation order, and
// parallel workers can draw without sharing mutable state.

#ifndef DRAFTLAT_RNG_H_
#define DRAFTLAT_RNG_H_

#include <cmath>
#include <cstdint>

namespace draftlat {

// Finalizer from the splitmix64 generator; bijective on 64-bit words.
inline std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Combines a seed with up to four keys into an independent 64-bit draw.
inline std::uint64_t KeyedBits(std::uint64_t seed, std::uint64_t k0,
                               std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                               std::uint64_t k3 = 0) {
  std::uint64_t h = MixBits(seed ^ 0x2545f4914f6cdd1dULL);
  h = MixBits(h ^ k0);
  h = MixBits(h ^ k1);
  h = MixBits(h ^ k2);
  h = MixBits(h ^ k3);
  return h;
}

// Maps 64 random bits onto the open interval (0, 1).
inline double BitsToUnit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// A splittable sequential stream: Fork() derives an independent child stream,
// so components can consume randomness without perturbing one another.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t NextBits() { return KeyedBits(seed_, counter_++); }

  // Uniform double in (0, 1).
  double NextUnit() { return BitsToUnit(NextBits()); }

  // Uniform double in [lo, hi).
  double NextDouble(double lo, double hi) {
    return lo + (hi - lo) * NextUnit();
  }

  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t NextIndex(std::uint64_t bound) { return NextBits() % bound; }

  // Standard Gumbel(0, 1) variate.
  double NextGumbel() { return -std::log(-std::log(NextUnit())); }

  // Derives an independent stream keyed by a label.
  SplitRng Fork(std::uint64_t label) const {
    return SplitRng(KeyedBits(seed_, 0x466f726bULL, label));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Stateless Gumbel(0, 1) draw from a seed and keys; used where the same
// perturbation must be recomputable from context alone.
inline double KeyedGumbel(std::uint64_t seed, std::uint64_t k0,
                          std::uint64_t k1 = 0, std::uint64_t k2 = 0) {
  return -std::log(-std::log(BitsToUnit(KeyedBits(seed, k0, k1, k2))));
}

}  // namespace draftlat

#endif  // DRAFTLAT_RNG_H_
