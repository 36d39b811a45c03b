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
// Draft refinement over a block lattice. Local rescoring adjusts each step's
// choice greedily with an auxiliary scorer; global rescoring runs an exact
// p-best dynamic program over whole paths under an n-gram model. Both
// combine scores as
//
//   combined = (sum of chosen arc weights) + alpha * (scorer log probability)
//
// with alpha weighing the auxiliary model against the head logits.

#ifndef DRAFTLAT_RESCORE_H_
#define DRAFTLAT_RESCORE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "draftlat/lattice.h"
#include "draftlat/ngram_model.h"
#include "draftlat/types.h"

namespace draftlat {

enum class RescoreMode {
  kLocal,        // greedy per-step adjustment with a LocalScorer
  kGlobal,       // exact p-best paths under an n-gram model
  kGlobalNoLm,   // exact p-best paths by arc weight alone
};

struct RescoreConfig {
  RescoreMode mode = RescoreMode::kGlobal;
  double alpha = 1.0;       // auxiliary model weight, >= 0
  int num_candidates = 1;   // p, >= 1; used by the global modes
  // When false, the local scorer is conditioned on the unrefined draft
  // tokens of earlier steps instead of the tokens it chose itself.
  bool condition_on_rescored = true;

  // Throws InvalidInputError on a negative alpha or num_candidates < 1.
  void Validate() const;
};

// One refined draft with its score breakdown. Invariant:
// combined_score = lattice_score + alpha * lm_score (lm_score is 0 when no
// auxiliary model took part).
struct DraftCandidate {
  Tokens tokens;
  double combined_score = 0.0;
  double lattice_score = 0.0;
  double lm_score = 0.0;

  // {"tokens": [...], "combined": c, "lattice": l, "lm": m}
  std::string ToJsonString() const;
  static DraftCandidate FromJsonString(const std::string& json);
};

// Candidate order used everywhere: higher combined score first, ties by
// higher lattice score, remaining ties by lexicographically smaller token
// sequence — so every ranking in the library is deterministic.
bool CandidateBefore(const DraftCandidate& a, const DraftCandidate& b);

// Auxiliary next-token scorer for local rescoring.
class LocalScorer {
 public:
  virtual ~LocalScorer() = default;

  // Log-domain scores for each of `tokens` as the continuation of `context`;
  // the result aligns with `tokens`.
  virtual std::vector<double> ScoreTokens(TokenSpan context,
                                          TokenSpan tokens) = 0;
};

// A LocalScorer that scores with an n-gram model's conditional
// log-probabilities (natural log).
class NgramLocalScorer : public LocalScorer {
 public:
  explicit NgramLocalScorer(const NgramModel* model);
  std::vector<double> ScoreTokens(TokenSpan context,
                                  TokenSpan tokens) override;

 private:
  const NgramModel* model_;
};

// Greedy left-to-right refinement: at each step, picks the arc maximizing
// arc weight + alpha * scorer score, conditioning the scorer on the lattice
// prefix plus the tokens chosen so far (or the unrefined draft tokens when
// `condition_on_rescored` is false). Ties go to the lower TokenId. Scorer
// failures surface as RescoreError.
DraftCandidate LocalRescore(const SausageLattice& lattice, LocalScorer& scorer,
                            double alpha, bool condition_on_rescored = true);

struct GlobalRescoreStats {
  // Hypothesis extensions attempted; bounded by
  // num_steps * max_context_states * max_arcs_per_step * num_candidates.
  std::uint64_t hypotheses_extended = 0;
  // Largest number of context states realized at any step.
  std::uint64_t max_context_states = 0;
};

// Exact p-best paths by combined score. With a model, paths are scored as
// lattice score + alpha * (natural-log model probability of the path tokens
// after the lattice prefix); the dynamic program keys its states on the
// model's back-off context states, so every hypothesis in a state sees
// identical score increments for every continuation, keeping the top
// num_candidates per state is exact, and the result provably matches
// brute-force enumeration. Without a model (`model` null), paths are ranked
// by lattice score alone and lm_score is 0.
//
// Returns min(num_candidates, path count) candidates in CandidateBefore
// order. Throws InvalidInputError for alpha < 0 or num_candidates < 1, and
// SizeError when the state space would exceed an internal memory guard.
std::vector<DraftCandidate> GlobalRescore(const SausageLattice& lattice,
                                          const NgramModel* model,
                                          double alpha, int num_candidates,
                                          GlobalRescoreStats* stats = nullptr);

// Validates that `candidates` holds no duplicate token sequences and returns
// them in CandidateBefore order. Duplicates mean an upstream bug, so they
// raise InternalError.
std::vector<DraftCandidate> DedupeAndRank(std::vector<DraftCandidate> candidates);

}  // namespace draftlat

#endif  // DRAFTLAT_RESCORE_H_
