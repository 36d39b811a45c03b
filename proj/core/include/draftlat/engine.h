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
// Blockwise-parallel decode loop. Each serial call the drafter proposes a
// block of h head distributions, the block becomes a lattice, an optional
// refinement stage picks candidate drafts out of the lattice, and the base
// model verifies them: the call advances by the longest prefix of the best
// candidate that agrees with the base model's own greedy continuation
// (never less than one token, since the verifying call always yields the
// next greedy token itself). The emitted text is therefore always exactly
// the base model's greedy rollout; refinement only changes how many serial
// calls that rollout costs. Block efficiency = tokens / serial calls.

#ifndef DRAFTLAT_ENGINE_H_
#define DRAFTLAT_ENGINE_H_

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "draftlat/lattice.h"
#include "draftlat/ngram_model.h"
#include "draftlat/rescore.h"
#include "draftlat/types.h"

namespace draftlat {

// The model whose output the decode must reproduce.
class BaseLm {
 public:
  virtual ~BaseLm() = default;

  // The token the model would emit greedily after `context`; deterministic,
  // ties broken toward the lower TokenId.
  virtual TokenId GreedyNext(TokenSpan context) = 0;
};

// BaseLm backed by an n-gram model; memoizes the per-state argmax.
class NgramBaseLm : public BaseLm {
 public:
  explicit NgramBaseLm(const NgramModel* model);

  TokenId GreedyNext(TokenSpan context) override;

  const NgramModel& model() const { return *model_; }

 private:
  const NgramModel* model_;
  GreedyNextCache greedy_;
};

// Proposer of block drafts: one scored candidate list per head position.
// Contract: head 1 models the next token exactly, so its argmax must equal
// the base model's greedy choice — the decode loop enforces this and fails
// on a violation, because acceptance accounting depends on it.
class Drafter {
 public:
  virtual ~Drafter() = default;

  virtual int num_heads() const = 0;

  // Candidate (token, logit) lists for the h positions after `context`.
  // Exactly num_heads() entries, each non-empty with finite logits.
  virtual std::vector<std::vector<TokenLogit>> ProposeBlock(
      TokenSpan context) = 0;
};

enum class DecodeMode {
  kVanilla,  // verify the top lattice path, no refinement
  kLocal,    // greedy per-step refinement against the rescore model
  kNgram,    // best lattice path under the rescore model (p-best with p = 1)
  kPBest,    // p candidate paths, best-accepted wins; works without a model
  kOracle,   // accept the longest greedy-agreeing path in the whole lattice
};

std::string DecodeModeName(DecodeMode mode);
DecodeMode ParseDecodeMode(const std::string& name);

struct DecodeConfig {
  DecodeMode mode = DecodeMode::kVanilla;
  // Tokens to emit after the prompt.
  std::uint64_t max_tokens = 0;
  // Arcs kept per lattice step.
  int top_k = 4;
  // Weight of the rescore model against head logits.
  double alpha = 1.0;
  // Candidate paths for kPBest.
  int num_candidates = 16;
  // Local refinement conditions each step on its own earlier choices when
  // true, on the unrefined draft tokens when false.
  bool condition_on_rescored = true;
  // Refinement model; required for kLocal and kNgram, optional for kPBest
  // (without it, candidates are ranked by head logits alone).
  const NgramModel* rescore_model = nullptr;
  // Stop early once the sentence-end token has been emitted.
  bool stop_at_sentence_end = false;

  void Validate(int num_heads) const;
};

// Per-serial-call record.
struct StepOutcome {
  std::uint64_t position = 0;   // tokens already emitted before this call
  int match_len = 0;            // longest greedy-agreeing prefix, best candidate
  int accepted = 0;             // tokens the call advanced (clipped at the end)
  int baseline_match_len = 0;   // same measure for the unrefined top path
  int chosen_candidate = 0;     // rank of the winning candidate
};

struct DecodeReport {
  std::string mode;
  std::uint64_t total_tokens = 0;
  std::uint64_t serial_calls = 0;
  double block_efficiency = 0.0;    // total_tokens / serial_calls
  // accepted_histogram[j] = number of calls that advanced j + 1 tokens.
  std::vector<std::uint64_t> accepted_histogram;
  // Parallel verification work: per call, one position for the shared
  // context plus (h - 1) per candidate actually verified.
  std::uint64_t verify_positions = 0;
  std::uint64_t draft_calls = 0;
  double wall_ms = 0.0;
  Tokens output;                    // emitted tokens, prompt excluded
  std::vector<StepOutcome> steps;

  // {"schema": 1, ...}; step records included only when requested.
  std::string ToJsonString(bool include_steps = false) const;
};

// Runs a blockwise decode of config.max_tokens tokens after `prompt`.
// Throws ConfigError on an invalid config for the drafter at hand and
// InvalidInputError when the drafter breaks its head-1 contract.
DecodeReport BpdDecode(BaseLm& base, Drafter& drafter, TokenSpan prompt,
                       const DecodeConfig& config);

// The base model's plain greedy rollout (the reference output every decode
// mode must reproduce).
Tokens GreedyRollout(BaseLm& base, TokenSpan prompt, std::uint64_t max_tokens);

struct TuneAlphaResult {
  double best_alpha = 0.0;
  double best_block_efficiency = 0.0;
  // (alpha, block efficiency), in the order given.
  std::vector<std::pair<double, double>> curve;
};

// Decodes once per alpha with the given config and returns the alpha with
// the highest block efficiency; exact ties go to the smallest alpha.
TuneAlphaResult TuneAlpha(BaseLm& base, Drafter& drafter, TokenSpan prompt,
                          const DecodeConfig& config,
                          const std::vector<double>& alphas);

}  // namespace draftlat

#endif  // DRAFTLAT_ENGINE_H_
