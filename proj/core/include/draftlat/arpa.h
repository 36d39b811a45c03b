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
// Text serialization of back-off n-gram models in the classic ARPA layout:
// a \data\ block declaring per-order entry counts, then per-order sections of
// "log10prob <tab> tokens [<tab> log10bow]" lines, closed by \end\.

#ifndef DRAFTLAT_ARPA_H_
#define DRAFTLAT_ARPA_H_

#include <iosfwd>
#include <string>

#include "draftlat/ngram_model.h"

namespace draftlat {

// Writes `model` in ARPA text form. Output is canonical and reproducible:
// entries are sorted by token ids, numbers carry 7 significant digits, and
// writing a model read back from this very output reproduces it byte for
// byte.
void WriteArpa(const NgramModel& model, std::ostream& out);
void WriteArpaFile(const NgramModel& model, const std::string& path);

// Parses an ARPA file into a finalized model, building its vocabulary from
// the unigram section (reserved tokens keep their fixed ids). Malformed
// headers, unparsable lines, duplicate entries, and declared-versus-actual
// count mismatches raise ParseError carrying the offending line number.
NgramModel ReadArpa(std::istream& in);
NgramModel ReadArpaFile(const std::string& path);

}  // namespace draftlat

#endif  // DRAFTLAT_ARPA_H_
