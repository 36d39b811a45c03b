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

#include "draftlat/ngram_counts.h"

namespace draftlat {

CountTable::CountTable(int order) : order_(order) {
  if (order < 1) {
    throw InvalidInputError("n-gram order must be at least 1, got " +
                            std::to_string(order));
  }
  maps_.resize(order);
}

void CountTable::Add(TokenSpan ngram, std::uint64_t count) {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) {
    throw InvalidInputError("n-gram length " + std::to_string(ngram.size()) +
                            " outside [1, " + std::to_string(order_) + "]");
  }
  maps_[ngram.size() - 1][MakeNgramKey(ngram)] += count;
}

std::uint64_t CountTable::Count(TokenSpan ngram) const {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) {
    throw InvalidInputError("n-gram length " + std::to_string(ngram.size()) +
                            " outside [1, " + std::to_string(order_) + "]");
  }
  const Map& map = maps_[ngram.size() - 1];
  auto it = map.find(MakeNgramKey(ngram));
  return it == map.end() ? 0 : it->second;
}

const CountTable::Map& CountTable::counts(int m) const {
  if (m < 1 || m > order_) {
    throw InvalidInputError("order " + std::to_string(m) + " outside [1, " +
                            std::to_string(order_) + "]");
  }
  return maps_[m - 1];
}

void CountTable::Merge(const CountTable& other) {
  if (other.order_ != order_) {
    throw InvalidInputError("cannot merge count tables of orders " +
                            std::to_string(order_) + " and " +
                            std::to_string(other.order_));
  }
  for (int m = 0; m < order_; ++m) {
    for (const auto& [key, count] : other.maps_[m]) {
      maps_[m][key] += count;
    }
  }
}

NgramCounter::NgramCounter(int order, const Vocabulary* vocab)
    : vocab_(vocab), table_(order) {
  if (vocab == nullptr) {
    throw InvalidInputError("counter requires a vocabulary");
  }
}

void NgramCounter::AddSentence(TokenSpan sentence) {
  Tokens padded;
  padded.reserve(sentence.size() + 2);
  padded.push_back(vocab_->sentence_start());
  for (TokenId t : sentence) {
    if (t >= vocab_->size()) {
      throw InvalidInputError("token id " + std::to_string(t) +
                              " outside vocabulary");
    }
    padded.push_back(t);
  }
  padded.push_back(vocab_->sentence_end());

  const int order = table_.order();
  for (std::size_t start = 0; start < padded.size(); ++start) {
    const std::size_t longest =
        std::min<std::size_t>(order, padded.size() - start);
    for (std::size_t len = 1; len <= longest; ++len) {
      table_.Add(TokenSpan(padded).subspan(start, len));
    }
  }
  ++num_sentences_;
}

int NgramCounter::AddSentenceText(const std::vector<std::string>& words) {
  Tokens sentence;
  sentence.reserve(words.size());
  int unknown = 0;
  for (const std::string& word : words) {
    const TokenId id = vocab_->FindOrUnknown(word);
    if (id == vocab_->unknown() && word != Vocabulary::kUnknown) ++unknown;
    sentence.push_back(id);
  }
  AddSentence(sentence);
  return unknown;
}

}  // namespace draftlat
