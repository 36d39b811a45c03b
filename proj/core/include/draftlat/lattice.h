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
// A block draft lattice ("sausage"): one slot per draft step, each slot
// holding the top scoring token arcs proposed by the corresponding prediction
// head. Every cross product of slot choices is a candidate draft for the
// block, so a lattice with h steps of k arcs encodes k^h drafts.

#ifndef DRAFTLAT_LATTICE_H_
#define DRAFTLAT_LATTICE_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "draftlat/types.h"

namespace draftlat {

// One weighted token candidate in a lattice slot. The weight is the head's
// raw logit for the token.
struct LatticeArc {
  TokenId token = 0;
  double weight = 0.0;

  friend bool operator==(const LatticeArc&, const LatticeArc&) = default;
};

// Immutable after construction. Invariants, enforced by the factory below and
// by FromJsonString: every step holds at least one arc, all weights are
// finite, and arcs within a step are sorted by descending weight with ties
// broken toward the lower TokenId.
class SausageLattice {
 public:
  SausageLattice(Tokens prefix, std::vector<std::vector<LatticeArc>> steps);

  const Tokens& prefix() const { return prefix_; }
  const std::vector<std::vector<LatticeArc>>& steps() const { return steps_; }
  const std::vector<LatticeArc>& step(std::size_t i) const { return steps_[i]; }
  int num_steps() const { return static_cast<int>(steps_.size()); }

  // Product over steps of the arc count, saturating at uint64 max.
  std::uint64_t NumPaths() const;

  // True when `token` is one of the arcs at `step`.
  bool StepContains(int step, TokenId token) const;

  // Serialization for debugging and interchange:
  //   {"prefix": [ids], "steps": [[{"token": id, "weight": w}, ...], ...]}
  std::string ToJsonString() const;
  static SausageLattice FromJsonString(const std::string& json);

 private:
  Tokens prefix_;
  std::vector<std::vector<LatticeArc>> steps_;
};

// One full path through a lattice: a token per step plus the sum of the
// chosen arc weights.
struct LatticePath {
  Tokens tokens;
  double score = 0.0;
};

// Builds the lattice for one block: keeps the top `top_k` arcs of each head's
// (token, logit) list, fewer when a head's support is smaller. Throws
// InvalidInputError when `head_logits` is empty, any head is empty or repeats
// a token, `top_k` < 1, or any logit is non-finite.
SausageLattice BuildLattice(
    const std::vector<std::vector<TokenLogit>>& head_logits, int top_k,
    TokenSpan prefix);

// Default refusal threshold for exhaustive path enumeration.
inline constexpr std::uint64_t kDefaultEnumerationCap = 1000000;

// Invokes `visit` for every path through the lattice, in odometer order over
// arc indices (last step varies fastest). Throws SizeError when the path
// count exceeds `cap`.
void ForEachPath(const SausageLattice& lattice,
                 const std::function<void(const LatticePath&)>& visit,
                 std::uint64_t cap = kDefaultEnumerationCap);

// Materializes all paths; same cap behaviour as ForEachPath.
std::vector<LatticePath> EnumeratePaths(
    const SausageLattice& lattice,
    std::uint64_t cap = kDefaultEnumerationCap);

// The top-1 path: each step's best arc. This is the unrefined ("vanilla")
// draft for the block.
LatticePath TopPath(const SausageLattice& lattice);

// Deterministic next-token oracle: maps a context to the token a reference
// decoder would emit.
using GreedyNextFn = std::function<TokenId(TokenSpan)>;

// Length of the longest greedy-agreeing path prefix: the largest m such that
// tokens c_1..c_m can be chosen with c_i an arc of step i and c_i equal to
// greedy_next(prefix . c_1..c_{i-1}). Returns 0 when the greedy next token is
// not in step 1. Non-decreasing in the lattice's arc budget k, since wider
// slots only add choices.
int OracleAcceptLength(const SausageLattice& lattice,
                       const GreedyNextFn& greedy_next);

}  // namespace draftlat

#endif  // DRAFTLAT_LATTICE_H_
