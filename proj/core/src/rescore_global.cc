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
// Exact p-best lattice paths by Viterbi-style dynamic programming. States at
// step i are the n-gram model's back-off context states, discovered as the
// search reaches them: every hypothesis in a state sees identical score
// increments for every continuation (the model's conditionals depend only on
// its state, arc weights only on the step), so the order among a state's
// hypotheses never changes and keeping the top p per state is exact. Raw
// suffixes that back off to the same context merge, which keeps the realized
// state count at min(product of the arc counts in the context window, the
// model's state count). A planning pass bounds the hypothesis tables with
// exactly that quantity before anything is allocated.

#include "draftlat/rescore.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace draftlat {
namespace {

// Upper bound on (states * num_candidates) summed over all steps; keeps the
// hypothesis tables within a few hundred MB.
constexpr std::uint64_t kMaxHypSlots = 8'000'000;
// Arc and rank indices are stored as 16-bit integers.
constexpr std::size_t kMaxArcsPerStep = 32767;
constexpr int kMaxCandidates = 32767;

struct Hyp {
  double lattice = 0.0;
  double lm = 0.0;
  double combined = 0.0;
  std::int32_t prev_state = -1;
  std::int16_t prev_rank = -1;
  std::int16_t arc = -1;
};

struct Level {
  std::uint64_t bound = 1;     // planned state capacity
  std::uint64_t realized = 0;  // states discovered so far
  std::vector<Hyp> hyps;       // stride: one slot of p per state
  std::vector<std::uint16_t> counts;         // live hypotheses per state
  std::vector<NgramModel::StateId> mstates;  // dense index -> model state
};

class PBestDp {
 public:
  PBestDp(const SausageLattice& lattice, const NgramModel* model, double alpha,
          int num_candidates, GlobalRescoreStats* stats)
      : lattice_(lattice),
        model_(model),
        alpha_(alpha),
        p_(num_candidates),
        stats_(stats),
        num_steps_(static_cast<int>(lattice.num_steps())) {
    window_ = model_ != nullptr ? model_->order() - 1 : 0;
  }

  std::vector<DraftCandidate> Run() {
    PlanLevels();
    SeedLevelZero();
    if (model_ != nullptr) {
      target_of_.assign(model_->NumStates(), kUnseenState);
    }
    for (int step = 0; step < num_steps_; ++step) Extend(step);
    return Collect();
  }

 private:
  // Bounds the state count of every level and checks the memory guard
  // before any table is allocated. Realized states never exceed the bound:
  // they are distinguished by at most the last `window_` arc choices, and
  // every one is a state of the model.
  void PlanLevels() {
    levels_.resize(num_steps_ + 1);
    const std::uint64_t model_states =
        model_ != nullptr ? model_->NumStates() : 1;
    std::uint64_t total_slots = static_cast<std::uint64_t>(p_);
    for (int i = 1; i <= num_steps_; ++i) {
      std::uint64_t bound = 1;
      if (model_ != nullptr) {
        const int width = std::min(window_, i);
        for (int j = i - width; j < i; ++j) {
          const std::uint64_t size = lattice_.step(j).size();
          bound = bound > kMaxHypSlots / size ? kMaxHypSlots : bound * size;
        }
        bound = std::min(bound, model_states);
      }
      levels_[i].bound = bound;
      total_slots += bound * static_cast<std::uint64_t>(p_);
      if (total_slots > kMaxHypSlots) {
        throw SizeError(
            "p-best hypothesis tables exceed the memory guard; reduce "
            "num_candidates or the model order");
      }
    }
  }

  void SeedLevelZero() {
    Level& level = levels_[0];
    level.realized = 1;
    level.hyps.resize(static_cast<std::size_t>(p_));
    level.counts.assign(1, 1);
    level.hyps[0] = Hyp{};
    if (model_ != nullptr) {
      level.mstates.assign(1, model_->ContextState(lattice_.prefix()));
    }
  }

  void Extend(int step) {
    const std::vector<LatticeArc>& arcs = lattice_.step(step);
    const int num_arcs = static_cast<int>(arcs.size());
    Level& src = levels_[step];
    Level& dst = levels_[step + 1];
    // Tables grow state by state as states are discovered; merged back-off
    // contexts usually keep the realized count far below the planned bound.
    if (model_ == nullptr) {
      dst.realized = 1;
      dst.hyps.resize(static_cast<std::uint64_t>(p_));
      dst.counts.assign(1, 0);
    }

    std::vector<double> row_lm(num_arcs, 0.0);
    std::vector<NgramModel::StateId> row_next(num_arcs, 0);

    for (std::uint64_t state = 0; state < src.realized; ++state) {
      const std::uint16_t live = src.counts[state];
      if (live == 0) continue;
      if (model_ != nullptr) {
        // Source states hold distinct model states, so each row of per-arc
        // increments is computed exactly once.
        const NgramModel::StateId mstate = src.mstates[state];
        for (int a = 0; a < num_arcs; ++a) {
          row_lm[a] = model_->ScoreAndAdvance(mstate, arcs[a].token,
                                              &row_next[a]);
        }
      }

      const Hyp* src_hyps =
          src.hyps.data() + state * static_cast<std::uint64_t>(p_);
      for (int a = 0; a < num_arcs; ++a) {
        std::uint64_t target = 0;
        if (model_ != nullptr) {
          std::uint32_t& slot = target_of_[row_next[a]];
          if (slot == kUnseenState) {
            if (dst.realized >= dst.bound) {
              throw InternalError(
                  "p-best search realized more states than planned");
            }
            slot = static_cast<std::uint32_t>(dst.realized);
            dst.mstates.push_back(row_next[a]);
            dst.hyps.resize(dst.hyps.size() + static_cast<std::uint64_t>(p_));
            dst.counts.push_back(0);
            ++dst.realized;
          }
          target = slot;
        }
        const double weight = arcs[a].weight;
        const double lm_incr = row_lm[a];
        for (std::uint16_t rank = 0; rank < live; ++rank) {
          const Hyp& prev = src_hyps[rank];
          Hyp cand;
          cand.lattice = prev.lattice + weight;
          cand.lm = prev.lm + lm_incr;
          cand.combined = cand.lattice + alpha_ * cand.lm;
          cand.prev_state = static_cast<std::int32_t>(state);
          cand.prev_rank = static_cast<std::int16_t>(rank);
          cand.arc = static_cast<std::int16_t>(a);
          ++extensions_;
          // Ranks of one source slot land in one target slot in their own
          // order (every score gets the same increment and the appended
          // token ties lexicographic order to the source order), so the
          // first candidate the full slot rejects ends the whole rank run.
          if (!Insert(dst, step + 1, target, cand)) break;
        }
      }
    }
    // Clean the discovery array for the next level; only touched entries
    // are reset, so the cost tracks realized states, not the model size.
    for (const NgramModel::StateId mstate : dst.mstates) {
      target_of_[mstate] = kUnseenState;
    }
    max_states_ = std::max(max_states_, dst.realized);
  }

  // Keeps the state's slot sorted by HypBefore and capped at p. Returns
  // false when a full slot rejects the candidate.
  bool Insert(Level& level, int level_index, std::uint64_t state,
              const Hyp& cand) {
    Hyp* base = level.hyps.data() + state * static_cast<std::uint64_t>(p_);
    std::uint16_t& count = level.counts[state];
    if (count == static_cast<std::uint16_t>(p_) &&
        !HypBefore(level_index, cand, base[count - 1])) {
      return false;
    }
    std::size_t lo = 0;
    std::size_t hi = count;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (HypBefore(level_index, cand, base[mid])) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    const std::size_t new_count =
        std::min<std::size_t>(count + 1, static_cast<std::size_t>(p_));
    for (std::size_t i = new_count - 1; i > lo; --i) base[i] = base[i - 1];
    base[lo] = cand;
    count = static_cast<std::uint16_t>(new_count);
    return true;
  }

  // Ranking among hypotheses of the same level: combined score descending,
  // lattice score descending, then lexicographically smaller token sequence.
  // Token sequences are only materialized on a full score tie.
  bool HypBefore(int level_index, const Hyp& a, const Hyp& b) const {
    if (a.combined != b.combined) return a.combined > b.combined;
    if (a.lattice != b.lattice) return a.lattice > b.lattice;
    return MaterializeTokens(level_index, a) < MaterializeTokens(level_index, b);
  }

  Tokens MaterializeTokens(int level_index, const Hyp& hyp) const {
    Tokens tokens(level_index);
    const Hyp* cur = &hyp;
    for (int i = level_index; i >= 1; --i) {
      tokens[i - 1] = lattice_.step(i - 1)[cur->arc].token;
      if (i > 1) {
        const Level& prev = levels_[i - 1];
        cur = &prev.hyps[static_cast<std::uint64_t>(cur->prev_state) *
                             static_cast<std::uint64_t>(p_) +
                         cur->prev_rank];
      }
    }
    return tokens;
  }

  std::vector<DraftCandidate> Collect() {
    const Level& last = levels_[num_steps_];
    std::vector<const Hyp*> finals;
    for (std::uint64_t state = 0; state < last.realized; ++state) {
      const Hyp* base =
          last.hyps.data() + state * static_cast<std::uint64_t>(p_);
      for (std::uint16_t rank = 0; rank < last.counts[state]; ++rank) {
        finals.push_back(base + rank);
      }
    }
    std::sort(finals.begin(), finals.end(), [this](const Hyp* a, const Hyp* b) {
      return HypBefore(num_steps_, *a, *b);
    });
    const std::size_t take =
        std::min<std::size_t>(finals.size(), static_cast<std::size_t>(p_));
    std::vector<DraftCandidate> candidates;
    candidates.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
      DraftCandidate candidate;
      candidate.tokens = MaterializeTokens(num_steps_, *finals[i]);
      candidate.combined_score = finals[i]->combined;
      candidate.lattice_score = finals[i]->lattice;
      candidate.lm_score = finals[i]->lm;
      candidates.push_back(std::move(candidate));
    }
    if (stats_ != nullptr) {
      stats_->hypotheses_extended = extensions_;
      stats_->max_context_states = max_states_;
    }
    return candidates;
  }

  // Sentinel in target_of_ for a model state not yet reached at this level.
  static constexpr std::uint32_t kUnseenState = 0xffffffffu;

  const SausageLattice& lattice_;
  const NgramModel* model_;
  double alpha_;
  int p_;
  GlobalRescoreStats* stats_;
  int num_steps_;
  int window_ = 0;
  std::vector<Level> levels_;
  std::vector<std::uint32_t> target_of_;  // model state -> dense level index
  std::uint64_t extensions_ = 0;
  std::uint64_t max_states_ = 1;
};

}  // namespace

std::vector<DraftCandidate> GlobalRescore(const SausageLattice& lattice,
                                          const NgramModel* model,
                                          double alpha, int num_candidates,
                                          GlobalRescoreStats* stats) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInputError("rescore alpha must be finite and >= 0, got " +
                            std::to_string(alpha));
  }
  if (num_candidates < 1) {
    throw InvalidInputError("rescore num_candidates must be >= 1, got " +
                            std::to_string(num_candidates));
  }
  if (num_candidates > kMaxCandidates) {
    throw SizeError("rescore num_candidates exceeds " +
                    std::to_string(kMaxCandidates));
  }
  for (std::size_t step = 0; step < lattice.num_steps(); ++step) {
    if (lattice.step(step).size() > kMaxArcsPerStep) {
      throw SizeError("lattice step holds too many arcs for p-best rescoring");
    }
  }
  if (model != nullptr && !model->finalized()) {
    throw InvalidInputError("p-best rescoring requires a finalized model");
  }
  if (stats != nullptr) *stats = GlobalRescoreStats{};
  PBestDp dp(lattice, model, alpha, num_candidates, stats);
  return dp.Run();
}

}  // namespace draftlat
