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

#ifndef DRAFTLAT_VOCAB_H_
#define DRAFTLAT_VOCAB_H_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "draftlat/types.h"

namespace draftlat {

// Bidirectional map between token strings and dense TokenIds. The three
// reserved tokens (sentence start, sentence end, unknown) always occupy ids
// 0..2 so models built over different corpora agree on their meaning.
class Vocabulary {
 public:
  static constexpr const char* kSentenceStart = "<s>";
  static constexpr const char* kSentenceEnd = "</s>";
  static constexpr const char* kUnknown = "<unk>";

  Vocabulary();

  // Returns the id of `token`, inserting it if new.
  TokenId AddToken(std::string_view token);

  // Returns the id of `token`, or nullopt when absent.
  std::optional<TokenId> Find(std::string_view token) const;

  // Returns the id of `token`, or the unknown id when absent.
  TokenId FindOrUnknown(std::string_view token) const;

  // Returns the string for `id`; throws InvalidInputError on out-of-range ids.
  const std::string& Token(TokenId id) const;

  std::size_t size() const { return tokens_.size(); }

  TokenId sentence_start() const { return kSentenceStartId; }
  TokenId sentence_end() const { return kSentenceEndId; }
  TokenId unknown() const { return kUnknownId; }

  bool IsReserved(TokenId id) const { return id < kNumReserved; }

  static constexpr TokenId kSentenceStartId = 0;
  static constexpr TokenId kSentenceEndId = 1;
  static constexpr TokenId kUnknownId = 2;
  static constexpr TokenId kNumReserved = 3;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace draftlat

#endif  // DRAFTLAT_VOCAB_H_
