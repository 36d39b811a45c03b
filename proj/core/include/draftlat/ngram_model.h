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
// Back-off n-gram language model. Probabilities and back-off weights are
// stored in log base 10, the convention of the interchange text format; the
// scoring entry points convert to natural log, which is what every consumer
// in this library computes with.

#ifndef DRAFTLAT_NGRAM_MODEL_H_
#define DRAFTLAT_NGRAM_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "draftlat/ngram_counts.h"
#include "draftlat/types.h"
#include "draftlat/vocab.h"

namespace draftlat {

// Sentinel for probabilities that are zero for all practical purposes (the
// sentence-start token as a predicted word, contexts with no residual mass).
inline constexpr double kLog10Zero = -99.0;

class NgramModel {
 public:
  struct Entry {
    double log10_prob = 0.0;
    double log10_bow = 0.0;  // meaningful only when has_bow
    bool has_bow = false;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  // Identifier of a context state; kEmptyContextState is the empty context.
  using StateId = std::uint32_t;
  static constexpr StateId kEmptyContextState = 0;

  // An empty, mutable model. Estimators and readers populate it with SetProb
  // / SetBackoff and must call Finalize before it is queried.
  NgramModel(int order, std::shared_ptr<const Vocabulary> vocab);

  int order() const { return order_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocab_ptr() const { return vocab_; }

  // --- Construction interface -------------------------------------------

  void SetProb(TokenSpan ngram, double log10_prob);
  void SetBackoff(TokenSpan context, double log10_bow);

  // Builds the context-state index. Must be called exactly once, after which
  // the model is immutable.
  void Finalize();
  bool finalized() const { return finalized_; }

  // --- Inspection --------------------------------------------------------

  std::size_t NgramCount(int m) const;
  std::size_t TotalNgrams() const;
  // Number of context states the finalized model navigates between, the
  // empty context included. Requires Finalize.
  std::size_t NumStates() const;
  const std::unordered_map<NgramKey, Entry>& grams(int m) const;
  const Entry* Find(TokenSpan ngram) const;

  // --- Scoring -----------------------------------------------------------

  // Conditional probability of `word` after `context` (only the last
  // order - 1 context tokens matter), following the standard back-off
  // recursion: use the longest stored (context suffix, word) entry, otherwise
  // charge the back-off weight and retry with the context shortened in front.
  // A word with no unigram entry scores as the unknown token; when the model
  // has no unknown entry either, the result is -infinity.
  double Log10Prob(TokenSpan context, TokenId word) const;

  // Same quantity in natural log.
  double LogProb(TokenSpan context, TokenId word) const;

  // Natural-log probability of `continuation` after `prefix` by the chain
  // rule; the context for each token is the last order - 1 tokens of the
  // prefix concatenated with the continuation so far.
  double SequenceLogProb(TokenSpan prefix, TokenSpan continuation) const;

  // --- Incremental scoring via context states ---------------------------
  //
  // A state stands for the scoring-relevant part of a context (its longest
  // stored suffix), so repeated extensions of a context cost O(order) probes
  // instead of re-walking the full context.

  // State for an arbitrary context; requires a finalized model.
  StateId ContextState(TokenSpan context) const;

  // Natural-log probability of `word` from `state`; when `next_state` is
  // non-null it receives the state of the extended context.
  double ScoreAndAdvance(StateId state, TokenId word,
                         StateId* next_state) const;

  // --- Patching ----------------------------------------------------------

  // Returns a copy whose vocabulary is extended by `tokens`, with a unigram
  // entry of `log10_prob` added for every token (new or existing) that lacks
  // one. The weight is tiny by default so the patch leaves normalization
  // intact for all practical purposes while making every token scorable.
  NgramModel WithUnigramFloor(const std::vector<std::string>& tokens,
                              double log10_prob = -1000.0) const;

 private:
  struct StateInfo {
    NgramKey key;
    double log10_bow = 0.0;
    StateId parent = 0;  // state of key.substr(1); root points to itself
    // Successor rows sorted by token, built by Finalize: scores holds every
    // stored gram extending this state's key by one token, children the
    // states one token longer. They make the scoring walk allocation-free
    // binary searches instead of hashed key probes.
    std::vector<std::pair<TokenId, double>> scores;
    std::vector<std::pair<TokenId, StateId>> children;
  };

  void CheckFinalized() const;
  double Log10ProbFromState(StateId state, TokenId word,
                            StateId* next_state) const;
  StateId StateForKey(const NgramKey& key) const;

  int order_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<std::unordered_map<NgramKey, Entry>> grams_;  // [m-1] = m-grams
  bool finalized_ = false;

  // Context-state index, built by Finalize. States are the suffix closure of
  // all stored grams of length < order plus every stored gram's context, so
  // a state walk sees every entry a full-context query would.
  std::vector<StateInfo> states_;
  std::unordered_map<NgramKey, StateId> state_index_;
  double unk_log10_ = 0.0;
  bool has_unk_ = false;
};

// Memoizing argmax helper: the most probable next token out of the whole
// vocabulary for a context state, ties broken toward the lower TokenId. The
// first query for a state scans the vocabulary once; repeats are a map hit.
class GreedyNextCache {
 public:
  explicit GreedyNextCache(const NgramModel* model);

  TokenId Next(NgramModel::StateId state);

 private:
  const NgramModel* model_;
  std::unordered_map<NgramModel::StateId, TokenId> cache_;
};

}  // namespace draftlat

#endif  // DRAFTLAT_NGRAM_MODEL_H_
