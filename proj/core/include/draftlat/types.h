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

#ifndef DRAFTLAT_TYPES_H_
#define DRAFTLAT_TYPES_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace draftlat {

// Dense non-negative token index into a Vocabulary.
using TokenId = std::uint32_t;

using TokenSpan = std::span<const TokenId>;
using Tokens = std::vector<TokenId>;

// A token together with an unnormalized log-domain score, as produced by a
// drafter head.
struct TokenLogit {
  TokenId token = 0;
  double logit = 0.0;

  friend bool operator==(const TokenLogit&, const TokenLogit&) = default;
};

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller handed us data that violates a documented precondition.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// An operation would exceed an explicit size or capacity bound.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A text or binary input could not be parsed; carries a 1-based line number
// when the input is line oriented (0 when not applicable).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message, int line = 0)
      : Error(line > 0 ? message + " (line " + std::to_string(line) + ")"
                       : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

// A pluggable component (drafter, scorer) is wired up inconsistently with the
// contracts the decode loop relies on.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A rescoring hook failed at decode time; the decode loop may recover by
// falling back to the unrefined draft.
class RescoreError : public Error {
 public:
  using Error::Error;
};

// An internal invariant did not hold; always indicates a bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace draftlat

#endif  // DRAFTLAT_TYPES_H_
