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

#include "draftlat/arpa.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

namespace draftlat {
namespace {

std::string FormatLog10(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.7g", value);
  return buffer;
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (in >> field) fields.push_back(field);
  return fields;
}

std::optional<double> ParseDouble(const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) return std::nullopt;
    return value;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

void WriteArpa(const NgramModel& model, std::ostream& out) {
  out << "\\data\\\n";
  for (int m = 1; m <= model.order(); ++m) {
    out << "ngram " << m << "=" << model.NgramCount(m) << "\n";
  }
  for (int m = 1; m <= model.order(); ++m) {
    out << "\n\\" << m << "-grams:\n";
    std::vector<const NgramKey*> keys;
    keys.reserve(model.NgramCount(m));
    for (const auto& [key, entry] : model.grams(m)) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(),
              [](const NgramKey* a, const NgramKey* b) { return *a < *b; });
    for (const NgramKey* key : keys) {
      const NgramModel::Entry& entry = *model.Find(NgramKeyTokens(*key));
      out << FormatLog10(entry.log10_prob) << "\t";
      for (std::size_t i = 0; i < key->size(); ++i) {
        if (i > 0) out << " ";
        out << model.vocab().Token(static_cast<TokenId>((*key)[i]));
      }
      if (entry.has_bow) out << "\t" << FormatLog10(entry.log10_bow);
      out << "\n";
    }
  }
  out << "\n\\end\\\n";
}

void WriteArpaFile(const NgramModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  WriteArpa(model, out);
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

NgramModel ReadArpa(std::istream& in) {
  int line_number = 0;
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  };

  // Preamble: everything before \data\ is comment.
  for (;;) {
    if (!next_line()) throw ParseError("missing \\data\\ header", line_number);
    if (line == "\\data\\") break;
  }

  // Declared counts.
  std::vector<std::uint64_t> declared;  // declared[m-1]
  for (;;) {
    if (!next_line()) throw ParseError("unexpected end of file in \\data\\",
                                       line_number);
    if (line.empty()) continue;
    if (line[0] == '\\') break;  // first section header
    const auto eq = line.find('=');
    if (line.rfind("ngram ", 0) != 0 || eq == std::string::npos) {
      throw ParseError("bad count declaration '" + line + "'", line_number);
    }
    int m = 0;
    std::uint64_t count = 0;
    try {
      m = std::stoi(line.substr(6, eq - 6));
      count = std::stoull(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError("bad count declaration '" + line + "'", line_number);
    }
    if (m < 1 || m != static_cast<int>(declared.size()) + 1) {
      throw ParseError("count declarations must cover orders 1..n in turn",
                       line_number);
    }
    declared.push_back(count);
  }
  if (declared.empty()) {
    throw ParseError("\\data\\ declares no orders", line_number);
  }
  const int order = static_cast<int>(declared.size());

  auto vocab = std::make_shared<Vocabulary>();
  NgramModel model(order, vocab);

  // Sections. `line` currently holds a header.
  int expected_order = 1;
  while (line != "\\end\\") {
    std::string expected_header =
        "\\" + std::to_string(expected_order) + "-grams:";
    if (line != expected_header) {
      throw ParseError("expected section " + expected_header + ", found '" +
                       line + "'",
                       line_number);
    }
    std::uint64_t entries = 0;
    for (;;) {
      if (!next_line()) {
        throw ParseError("unexpected end of file inside " + expected_header,
                         line_number);
      }
      if (line.empty()) continue;
      if (line[0] == '\\') break;  // next header or the terminator
      const std::vector<std::string> fields = SplitFields(line);
      const std::size_t want = 1 + expected_order;
      if (fields.size() != want && fields.size() != want + 1) {
        throw ParseError("expected " + std::to_string(expected_order) +
                         " tokens with a probability and optional back-off",
                         line_number);
      }
      const auto prob = ParseDouble(fields[0]);
      if (!prob) throw ParseError("bad probability '" + fields[0] + "'",
                                  line_number);
      Tokens ngram;
      ngram.reserve(expected_order);
      for (int i = 0; i < expected_order; ++i) {
        ngram.push_back(vocab->AddToken(fields[1 + i]));
      }
      if (model.Find(ngram) != nullptr) {
        throw ParseError("duplicate n-gram entry", line_number);
      }
      model.SetProb(ngram, *prob);
      if (fields.size() == want + 1) {
        if (expected_order == order) {
          throw ParseError("back-off weight on a highest-order entry",
                           line_number);
        }
        const auto bow = ParseDouble(fields[want]);
        if (!bow) throw ParseError("bad back-off weight '" + fields[want] + "'",
                                   line_number);
        model.SetBackoff(ngram, *bow);
      }
      ++entries;
    }
    if (entries != declared[expected_order - 1]) {
      throw ParseError("section " + expected_header + " declared " +
                       std::to_string(declared[expected_order - 1]) +
                       " entries but holds " + std::to_string(entries),
                       line_number);
    }
    ++expected_order;
  }
  if (expected_order != order + 1) {
    throw ParseError("\\end\\ before section for order " +
                     std::to_string(expected_order),
                     line_number);
  }

  model.Finalize();
  return model;
}

NgramModel ReadArpaFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return ReadArpa(in);
}

}  // namespace draftlat
