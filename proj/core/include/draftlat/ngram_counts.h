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

#ifndef DRAFTLAT_NGRAM_COUNTS_H_
#define DRAFTLAT_NGRAM_COUNTS_H_

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "draftlat/types.h"
#include "draftlat/vocab.h"

namespace draftlat {

// Token sequences are keyed as char32_t strings so the standard hash and
// lexicographic comparison apply; a TokenId converts losslessly to char32_t.
using NgramKey = std::basic_string<char32_t>;

inline NgramKey MakeNgramKey(TokenSpan tokens) {
  NgramKey key;
  key.reserve(tokens.size());
  for (TokenId t : tokens) key.push_back(static_cast<char32_t>(t));
  return key;
}

inline Tokens NgramKeyTokens(const NgramKey& key) {
  Tokens tokens;
  tokens.reserve(key.size());
  for (char32_t c : key) tokens.push_back(static_cast<TokenId>(c));
  return tokens;
}

// Occurrence counts for every m-gram, 1 <= m <= order. Invariant for tables
// produced by NgramCounter: the count of an m-gram never exceeds the count of
// any of its (m-1)-token sub-grams, because every occurrence of the longer
// window contains the shorter one.
class CountTable {
 public:
  using Map = std::unordered_map<NgramKey, std::uint64_t>;

  explicit CountTable(int order);

  int order() const { return order_; }

  void Add(TokenSpan ngram, std::uint64_t count = 1);

  // Count of `ngram`, 0 when absent. Length must be in [1, order].
  std::uint64_t Count(TokenSpan ngram) const;

  // All m-grams of one length; m must be in [1, order].
  const Map& counts(int m) const;

  // Number of distinct m-grams.
  std::size_t DistinctCount(int m) const { return counts(m).size(); }

  // Adds every count of `other` into this table; orders must match.
  void Merge(const CountTable& other);

 private:
  int order_;
  std::vector<Map> maps_;  // maps_[m - 1] holds the m-grams
};

// Accumulates sentence-bounded n-gram counts: each sentence is wrapped in the
// reserved start and end tokens before its windows are counted, so "a b"
// under order 2 yields the bigrams (<s>,a), (a,b), (b,</s>).
class NgramCounter {
 public:
  NgramCounter(int order, const Vocabulary* vocab);

  // `sentence` carries content tokens only; boundary tokens are inserted
  // here. Empty sentences are legal and count only boundary grams.
  void AddSentence(TokenSpan sentence);

  // Convenience: looks tokens up in the vocabulary first (unknown strings
  // count as the unknown token) and returns the number mapped to unknown.
  int AddSentenceText(const std::vector<std::string>& words);

  const CountTable& table() const { return table_; }
  std::uint64_t num_sentences() const { return num_sentences_; }

 private:
  const Vocabulary* vocab_;
  CountTable table_;
  std::uint64_t num_sentences_ = 0;
};

}  // namespace draftlat

#endif  // DRAFTLAT_NGRAM_COUNTS_H_
