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
// Drafter backed by a subprocess speaking a line-oriented JSON protocol on
// stdin/stdout. Per block, the engine writes one request line
//
//   {"context": [ids], "num_heads": h}
//
// and the subprocess answers with one response line
//
//   {"heads": [[{"token": id, "logit": w}, ...], ...]}     on success
//   {"error": "message"}                                   on failure
//
// with exactly h head lists. The subprocess must flush after every response
// line and exit when its stdin closes. Anything else on its stdout corrupts
// the protocol, so drafter processes must keep their own logging on stderr.

#ifndef DRAFTLAT_EXTERNAL_DRAFTER_H_
#define DRAFTLAT_EXTERNAL_DRAFTER_H_

#include <cstdio>
#include <string>
#include <sys/types.h>
#include <vector>

#include "draftlat/engine.h"
#include "draftlat/types.h"

namespace draftlat {

// Serialization helpers shared by both protocol ends.
std::string EncodeDraftRequest(TokenSpan context, int num_heads);
// Parses a request line; throws ParseError on malformed input.
void DecodeDraftRequest(const std::string& line, Tokens* context,
                        int* num_heads);
std::string EncodeDraftResponse(
    const std::vector<std::vector<TokenLogit>>& heads);
std::string EncodeDraftError(const std::string& message);
// Parses a response line; throws ParseError on malformed input and
// RescoreError when the line carries an "error" field.
std::vector<std::vector<TokenLogit>> DecodeDraftResponse(
    const std::string& line);

// Spawns `command` through /bin/sh and keeps it alive for the drafter's
// lifetime. Throws IoError when the process cannot be started, dies, or
// closes its pipes mid-conversation. Constructing one sets the process's
// SIGPIPE disposition to ignore, so broken drafter pipes report as errors
// instead of terminating the host.
class ExternalDrafter : public Drafter {
 public:
  ExternalDrafter(const std::string& command, int num_heads);
  ~ExternalDrafter() override;

  ExternalDrafter(const ExternalDrafter&) = delete;
  ExternalDrafter& operator=(const ExternalDrafter&) = delete;

  int num_heads() const override { return num_heads_; }

  std::vector<std::vector<TokenLogit>> ProposeBlock(
      TokenSpan context) override;

 private:
  void Close();

  int num_heads_;
  pid_t child_pid_ = -1;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;
};

}  // namespace draftlat

#endif  // DRAFTLAT_EXTERNAL_DRAFTER_H_
