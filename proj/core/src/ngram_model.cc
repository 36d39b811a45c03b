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

#include "draftlat/ngram_model.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace draftlat {

namespace {
constexpr double kLn10 = 2.30258509299404568402;

// Binary search in a successor row sorted by token; nullptr on a miss.
template <typename T>
const T* FindInRow(const std::vector<std::pair<TokenId, T>>& row,
                   TokenId word) {
  auto it = std::lower_bound(
      row.begin(), row.end(), word,
      [](const std::pair<TokenId, T>& entry, TokenId w) {
        return entry.first < w;
      });
  return it != row.end() && it->first == word ? &it->second : nullptr;
}
}  // namespace

NgramModel::NgramModel(int order, std::shared_ptr<const Vocabulary> vocab)
    : order_(order), vocab_(std::move(vocab)) {
  if (order < 1) {
    throw InvalidInputError("model order must be at least 1, got " +
                            std::to_string(order));
  }
  if (vocab_ == nullptr) {
    throw InvalidInputError("model requires a vocabulary");
  }
  grams_.resize(order);
}

void NgramModel::SetProb(TokenSpan ngram, double log10_prob) {
  if (finalized_) throw InternalError("model is finalized");
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) {
    throw InvalidInputError("n-gram length " + std::to_string(ngram.size()) +
                            " outside [1, " + std::to_string(order_) + "]");
  }
  grams_[ngram.size() - 1][MakeNgramKey(ngram)].log10_prob = log10_prob;
}

void NgramModel::SetBackoff(TokenSpan context, double log10_bow) {
  if (finalized_) throw InternalError("model is finalized");
  if (context.empty() || static_cast<int>(context.size()) >= order_) {
    throw InvalidInputError("back-off context length " +
                            std::to_string(context.size()) + " outside [1, " +
                            std::to_string(order_ - 1) + "]");
  }
  auto it = grams_[context.size() - 1].find(MakeNgramKey(context));
  if (it == grams_[context.size() - 1].end()) {
    throw InvalidInputError(
        "back-off weight for a context with no probability entry");
  }
  it->second.log10_bow = log10_bow;
  it->second.has_bow = true;
}

void NgramModel::Finalize() {
  if (finalized_) throw InternalError("model is already finalized");

  // Seed the navigation keys: stored grams short enough to be contexts, plus
  // the context of every stored gram. Insert in sorted order per length so
  // state ids are deterministic.
  std::vector<std::vector<NgramKey>> keys_by_len(order_);
  {
    std::vector<std::unordered_map<NgramKey, char>> seen(order_);
    auto note = [&](NgramKey key) {
      // Close under suffixes so every state's parent exists.
      while (!key.empty()) {
        if (!seen[key.size() - 1].emplace(key, 0).second) break;
        key.erase(key.begin());
      }
    };
    for (int m = 1; m <= order_; ++m) {
      for (const auto& [key, entry] : grams_[m - 1]) {
        if (m < order_) note(key);
        if (m >= 2) note(key.substr(0, key.size() - 1));
      }
    }
    for (int len = 1; len < order_; ++len) {
      keys_by_len[len].reserve(seen[len - 1].size());
      for (const auto& [key, tag] : seen[len - 1]) keys_by_len[len].push_back(key);
      std::sort(keys_by_len[len].begin(), keys_by_len[len].end());
    }
  }

  states_.clear();
  state_index_.clear();
  states_.push_back(StateInfo{NgramKey(), 0.0, kEmptyContextState});
  state_index_.emplace(NgramKey(), kEmptyContextState);
  // Shorter keys first, so each state's parent (one token shorter) is
  // already indexed when the state is added.
  for (int len = 1; len < order_; ++len) {
    for (const NgramKey& key : keys_by_len[len]) {
      StateInfo info;
      info.key = key;
      auto entry = grams_[len - 1].find(key);
      info.log10_bow = (entry != grams_[len - 1].end() && entry->second.has_bow)
                           ? entry->second.log10_bow
                           : 0.0;
      auto parent = state_index_.find(key.substr(1));
      if (parent == state_index_.end()) {
        throw InternalError("state suffix closure is broken");
      }
      info.parent = parent->second;
      const StateId id = static_cast<StateId>(states_.size());
      states_.push_back(std::move(info));
      state_index_.emplace(key, id);
    }
  }

  auto unk = grams_[0].find(MakeNgramKey(Tokens{vocab_->unknown()}));
  has_unk_ = unk != grams_[0].end();
  unk_log10_ = has_unk_ ? unk->second.log10_prob
                        : -std::numeric_limits<double>::infinity();

  // Successor rows: every stored gram scores out of its context's state, and
  // a state one token longer than its prefix state is that state's child.
  for (int m = 1; m <= order_; ++m) {
    for (const auto& [key, entry] : grams_[m - 1]) {
      auto context = state_index_.find(key.substr(0, key.size() - 1));
      if (context == state_index_.end()) {
        throw InternalError("stored gram context has no state");
      }
      states_[context->second].scores.emplace_back(
          static_cast<TokenId>(key.back()), entry.log10_prob);
    }
  }
  for (std::size_t id = 1; id < states_.size(); ++id) {
    const NgramKey& key = states_[id].key;
    auto prefix = state_index_.find(key.substr(0, key.size() - 1));
    if (prefix != state_index_.end()) {
      states_[prefix->second].children.emplace_back(
          static_cast<TokenId>(key.back()), static_cast<StateId>(id));
    }
  }
  for (StateInfo& info : states_) {
    std::sort(info.scores.begin(), info.scores.end());
    std::sort(info.children.begin(), info.children.end());
  }

  finalized_ = true;
}

void NgramModel::CheckFinalized() const {
  if (!finalized_) throw InternalError("model must be finalized before use");
}

std::size_t NgramModel::NgramCount(int m) const {
  if (m < 1 || m > order_) {
    throw InvalidInputError("order " + std::to_string(m) + " outside [1, " +
                            std::to_string(order_) + "]");
  }
  return grams_[m - 1].size();
}

std::size_t NgramModel::TotalNgrams() const {
  std::size_t total = 0;
  for (const auto& map : grams_) total += map.size();
  return total;
}

std::size_t NgramModel::NumStates() const {
  CheckFinalized();
  return states_.size();
}

const std::unordered_map<NgramKey, NgramModel::Entry>& NgramModel::grams(
    int m) const {
  if (m < 1 || m > order_) {
    throw InvalidInputError("order " + std::to_string(m) + " outside [1, " +
                            std::to_string(order_) + "]");
  }
  return grams_[m - 1];
}

const NgramModel::Entry* NgramModel::Find(TokenSpan ngram) const {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) return nullptr;
  const auto& map = grams_[ngram.size() - 1];
  auto it = map.find(MakeNgramKey(ngram));
  return it == map.end() ? nullptr : &it->second;
}

NgramModel::StateId NgramModel::StateForKey(const NgramKey& key) const {
  NgramKey probe = key;
  while (!probe.empty()) {
    auto it = state_index_.find(probe);
    if (it != state_index_.end()) return it->second;
    probe.erase(probe.begin());
  }
  return kEmptyContextState;
}

NgramModel::StateId NgramModel::ContextState(TokenSpan context) const {
  CheckFinalized();
  const std::size_t window =
      std::min<std::size_t>(context.size(), order_ - 1);
  return StateForKey(MakeNgramKey(context.last(window)));
}

double NgramModel::Log10ProbFromState(StateId state, TokenId word,
                                      StateId* next_state) const {
  double backoff = 0.0;
  double prob = unk_log10_;
  StateId s = state;
  for (;;) {
    const StateInfo& info = states_[s];
    const double* hit = FindInRow(info.scores, word);
    if (hit != nullptr) {
      prob = *hit;
      break;
    }
    backoff += info.log10_bow;
    if (s == kEmptyContextState) break;  // unigram miss: unknown-token floor
    s = info.parent;
  }
  if (next_state != nullptr) {
    // Longest stored suffix of the extended context: the deepest state on
    // the suffix chain with `word` as a child, the root when none has one.
    StateId cursor = state;
    for (;;) {
      const StateInfo& info = states_[cursor];
      if (static_cast<int>(info.key.size()) < order_ - 1) {
        const StateId* child = FindInRow(info.children, word);
        if (child != nullptr) {
          *next_state = *child;
          break;
        }
      }
      if (cursor == kEmptyContextState) {
        *next_state = kEmptyContextState;
        break;
      }
      cursor = info.parent;
    }
  }
  return prob + backoff;
}

double NgramModel::Log10Prob(TokenSpan context, TokenId word) const {
  return Log10ProbFromState(ContextState(context), word, nullptr);
}

double NgramModel::LogProb(TokenSpan context, TokenId word) const {
  return Log10Prob(context, word) * kLn10;
}

double NgramModel::ScoreAndAdvance(StateId state, TokenId word,
                                   StateId* next_state) const {
  CheckFinalized();
  if (state >= states_.size()) {
    throw InvalidInputError("unknown context state " + std::to_string(state));
  }
  return Log10ProbFromState(state, word, next_state) * kLn10;
}

double NgramModel::SequenceLogProb(TokenSpan prefix,
                                   TokenSpan continuation) const {
  CheckFinalized();
  StateId state = ContextState(prefix);
  double total = 0.0;
  for (TokenId word : continuation) {
    total += ScoreAndAdvance(state, word, &state);
  }
  return total;
}

NgramModel NgramModel::WithUnigramFloor(const std::vector<std::string>& tokens,
                                        double log10_prob) const {
  auto vocab = std::make_shared<Vocabulary>(*vocab_);
  for (const std::string& token : tokens) vocab->AddToken(token);

  NgramModel patched(order_, vocab);
  patched.grams_ = grams_;
  for (TokenId id = 0; id < vocab->size(); ++id) {
    const NgramKey key = MakeNgramKey(Tokens{id});
    auto& unigrams = patched.grams_[0];
    if (unigrams.find(key) == unigrams.end()) {
      unigrams[key].log10_prob = log10_prob;
    }
  }
  patched.Finalize();
  return patched;
}

GreedyNextCache::GreedyNextCache(const NgramModel* model) : model_(model) {
  if (model_ == nullptr) {
    throw InvalidInputError("GreedyNextCache requires a model");
  }
}

TokenId GreedyNextCache::Next(NgramModel::StateId state) {
  const auto it = cache_.find(state);
  if (it != cache_.end()) return it->second;
  const TokenId vocab_size = static_cast<TokenId>(model_->vocab().size());
  TokenId best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (TokenId token = 0; token < vocab_size; ++token) {
    const double score = model_->ScoreAndAdvance(state, token, nullptr);
    if (score > best_score) {
      best = token;
      best_score = score;
    }
  }
  cache_.emplace(state, best);
  return best;
}

}  // namespace draftlat
