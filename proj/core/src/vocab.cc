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

#include "draftlat/vocab.h"

namespace draftlat {

Vocabulary::Vocabulary() {
  AddToken(kSentenceStart);
  AddToken(kSentenceEnd);
  AddToken(kUnknown);
}

TokenId Vocabulary::AddToken(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  TokenId id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::optional<TokenId> Vocabulary::Find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::FindOrUnknown(std::string_view token) const {
  return Find(token).value_or(kUnknownId);
}

const std::string& Vocabulary::Token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw InvalidInputError("token id " + std::to_string(id) +
                            " out of range for vocabulary of size " +
                            std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

}  // namespace draftlat
