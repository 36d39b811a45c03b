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

#include "draftlat/lattice.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "json.hpp"

namespace draftlat {
namespace {

// Arc ordering within a step: heavier first, ties toward the lower token id.
bool ArcBefore(const LatticeArc& a, const LatticeArc& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.token < b.token;
}

void ValidateSteps(const std::vector<std::vector<LatticeArc>>& steps) {
  if (steps.empty()) {
    throw InvalidInputError("lattice must have at least one step");
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& arcs = steps[i];
    if (arcs.empty()) {
      throw InvalidInputError("lattice step " + std::to_string(i) +
                              " has no arcs");
    }
    std::unordered_set<TokenId> seen;
    for (const LatticeArc& arc : arcs) {
      if (!std::isfinite(arc.weight)) {
        throw InvalidInputError("non-finite arc weight at step " +
                                std::to_string(i));
      }
      if (!seen.insert(arc.token).second) {
        throw InvalidInputError("duplicate token " +
                                std::to_string(arc.token) + " at step " +
                                std::to_string(i));
      }
    }
  }
}

}  // namespace

SausageLattice::SausageLattice(Tokens prefix,
                               std::vector<std::vector<LatticeArc>> steps)
    : prefix_(std::move(prefix)), steps_(std::move(steps)) {
  ValidateSteps(steps_);
  for (auto& arcs : steps_) std::sort(arcs.begin(), arcs.end(), ArcBefore);
}

std::uint64_t SausageLattice::NumPaths() const {
  std::uint64_t paths = 1;
  for (const auto& arcs : steps_) {
    const std::uint64_t n = arcs.size();
    if (paths > std::numeric_limits<std::uint64_t>::max() / n) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    paths *= n;
  }
  return paths;
}

bool SausageLattice::StepContains(int step, TokenId token) const {
  for (const LatticeArc& arc : steps_[step]) {
    if (arc.token == token) return true;
  }
  return false;
}

std::string SausageLattice::ToJsonString() const {
  nlohmann::json j;
  j["prefix"] = prefix_;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& arcs : steps_) {
    nlohmann::json step = nlohmann::json::array();
    for (const LatticeArc& arc : arcs) {
      step.push_back({{"token", arc.token}, {"weight", arc.weight}});
    }
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  return j.dump();
}

SausageLattice SausageLattice::FromJsonString(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad lattice json: ") + e.what(), 0);
  }
  try {
    Tokens prefix = j.at("prefix").get<Tokens>();
    std::vector<std::vector<LatticeArc>> steps;
    for (const auto& step : j.at("steps")) {
      std::vector<LatticeArc> arcs;
      for (const auto& arc : step) {
        arcs.push_back({arc.at("token").get<TokenId>(),
                        arc.at("weight").get<double>()});
      }
      steps.push_back(std::move(arcs));
    }
    return SausageLattice(std::move(prefix), std::move(steps));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad lattice json: ") + e.what(), 0);
  }
}

SausageLattice BuildLattice(
    const std::vector<std::vector<TokenLogit>>& head_logits, int top_k,
    TokenSpan prefix) {
  if (top_k < 1) {
    throw InvalidInputError("top_k must be at least 1, got " +
                            std::to_string(top_k));
  }
  if (head_logits.empty()) {
    throw InvalidInputError("no prediction heads supplied");
  }
  std::vector<std::vector<LatticeArc>> steps;
  steps.reserve(head_logits.size());
  for (std::size_t h = 0; h < head_logits.size(); ++h) {
    const auto& support = head_logits[h];
    if (support.empty()) {
      throw InvalidInputError("head " + std::to_string(h) +
                              " produced no candidates");
    }
    std::vector<LatticeArc> arcs;
    arcs.reserve(support.size());
    for (const TokenLogit& entry : support) {
      arcs.push_back({entry.token, entry.logit});
    }
    const std::size_t keep =
        std::min<std::size_t>(arcs.size(), static_cast<std::size_t>(top_k));
    std::partial_sort(arcs.begin(), arcs.begin() + keep, arcs.end(),
                      ArcBefore);
    arcs.resize(keep);
    steps.push_back(std::move(arcs));
  }
  // The constructor validates finiteness and token uniqueness over the kept
  // arcs; candidates below the cut must be checked here so garbage input
  // never passes silently.
  for (std::size_t h = 0; h < head_logits.size(); ++h) {
    std::unordered_set<TokenId> seen;
    for (const TokenLogit& entry : head_logits[h]) {
      if (!std::isfinite(entry.logit)) {
        throw InvalidInputError("non-finite logit from head " +
                                std::to_string(h));
      }
      if (!seen.insert(entry.token).second) {
        throw InvalidInputError("head " + std::to_string(h) +
                                " repeats token " +
                                std::to_string(entry.token));
      }
    }
  }
  return SausageLattice(Tokens(prefix.begin(), prefix.end()),
                        std::move(steps));
}

void ForEachPath(const SausageLattice& lattice,
                 const std::function<void(const LatticePath&)>& visit,
                 std::uint64_t cap) {
  const std::uint64_t total = lattice.NumPaths();
  if (total > cap) {
    throw SizeError("lattice has " + std::to_string(total) +
                    " paths, above the enumeration cap of " +
                    std::to_string(cap));
  }
  const auto& steps = lattice.steps();
  const int h = lattice.num_steps();
  std::vector<std::size_t> idx(h, 0);
  LatticePath path;
  path.tokens.resize(h);
  for (;;) {
    path.score = 0.0;
    for (int i = 0; i < h; ++i) {
      const LatticeArc& arc = steps[i][idx[i]];
      path.tokens[i] = arc.token;
      path.score += arc.weight;
    }
    visit(path);
    int i = h - 1;
    while (i >= 0 && ++idx[i] == steps[i].size()) {
      idx[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

std::vector<LatticePath> EnumeratePaths(const SausageLattice& lattice,
                                        std::uint64_t cap) {
  std::vector<LatticePath> paths;
  paths.reserve(lattice.NumPaths() > cap ? 0 : lattice.NumPaths());
  ForEachPath(
      lattice, [&paths](const LatticePath& path) { paths.push_back(path); },
      cap);
  return paths;
}

LatticePath TopPath(const SausageLattice& lattice) {
  LatticePath path;
  path.tokens.reserve(lattice.num_steps());
  for (const auto& arcs : lattice.steps()) {
    path.tokens.push_back(arcs.front().token);
    path.score += arcs.front().weight;
  }
  return path;
}

int OracleAcceptLength(const SausageLattice& lattice,
                       const GreedyNextFn& greedy_next) {
  Tokens context = lattice.prefix();
  int length = 0;
  for (int step = 0; step < lattice.num_steps(); ++step) {
    const TokenId greedy = greedy_next(context);
    if (!lattice.StepContains(step, greedy)) break;
    context.push_back(greedy);
    ++length;
  }
  return length;
}

}  // namespace draftlat
