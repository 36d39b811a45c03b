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

#ifndef DRAFTLAT_KATZ_H_
#define DRAFTLAT_KATZ_H_

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "draftlat/ngram_counts.h"
#include "draftlat/ngram_model.h"

namespace draftlat {

// Size control applied before estimation.
struct PruneConfig {
  // Per-order minimum occurrence counts; m-grams seen fewer times are
  // dropped. Orders not listed default to 1 (keep everything). Thresholds
  // must be at least 1.
  std::map<int, std::uint64_t> min_count;

  // Hard cap on the total number of stored n-grams. When the thresholds
  // leave more than this, surviving entries are dropped highest order first,
  // lowest count first (ties dropped from the lexicographically largest
  // key). Must be at least the vocabulary size, since every vocabulary token
  // keeps a unigram entry.
  std::uint64_t max_total_ngrams = std::numeric_limits<std::uint64_t>::max();

  std::uint64_t MinCount(int order) const {
    auto it = min_count.find(order);
    return it == min_count.end() ? 1 : it->second;
  }
};

// Good-Turing discounts are estimated for occurrence counts 1..5; larger
// counts are trusted as is.
inline constexpr int kGoodTuringMaxCount = 5;

// Fallback when the count-of-count statistics make Good-Turing ill-defined
// (coefficients outside (0, 1]): absolute discounting, subtracting this from
// every count.
inline constexpr double kAbsoluteDiscount = 0.5;

// Estimates a Katz back-off model from sentence-bounded counts.
//
// Per order: each stored m-gram's probability is its discounted relative
// frequency within its context, with Good-Turing discounts computed from the
// unpruned count-of-count statistics (falling back to absolute discounting,
// with a warning, when those are degenerate). Mass freed by discounting and
// pruning funds the back-off weights, computed so that the conditional
// distribution of every stored context sums to one over the vocabulary.
//
// Every vocabulary token keeps a unigram entry: the sentence-start token with
// an effectively-zero probability (it is a conditioning-only event), and
// tokens priced out by counts or thresholds — always including the unknown
// token — sharing the unigram mass freed by discounting.
//
// Dropping an m-gram never orphans its neighbours: the context and the
// suffix of every survivor are retained regardless of their own counts, so
// the model is navigable by back-off and by context states.
//
// Warnings (discount fallbacks, vanishing residual mass) are appended to
// `warnings` when non-null and logged otherwise. Throws InvalidInputError on
// an empty count table or an invalid PruneConfig.
NgramModel EstimateKatz(const CountTable& counts,
                        std::shared_ptr<const Vocabulary> vocab,
                        const PruneConfig& prune = {},
                        std::vector<std::string>* warnings = nullptr);

}  // namespace draftlat

#endif  // DRAFTLAT_KATZ_H_
