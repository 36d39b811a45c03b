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

#include "draftlat/rescore.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"

namespace draftlat {

void RescoreConfig::Validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInputError("rescore alpha must be finite and >= 0, got " +
                            std::to_string(alpha));
  }
  if (num_candidates < 1) {
    throw InvalidInputError("rescore num_candidates must be >= 1, got " +
                            std::to_string(num_candidates));
  }
}

std::string DraftCandidate::ToJsonString() const {
  nlohmann::json json;
  json["tokens"] = tokens;
  json["combined"] = combined_score;
  json["lattice"] = lattice_score;
  json["lm"] = lm_score;
  return json.dump();
}

DraftCandidate DraftCandidate::FromJsonString(const std::string& json_text) {
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid candidate JSON: ") + e.what());
  }
  DraftCandidate candidate;
  try {
    candidate.tokens = json.at("tokens").get<Tokens>();
    candidate.combined_score = json.at("combined").get<double>();
    candidate.lattice_score = json.at("lattice").get<double>();
    candidate.lm_score = json.at("lm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid candidate JSON: ") + e.what());
  }
  return candidate;
}

bool CandidateBefore(const DraftCandidate& a, const DraftCandidate& b) {
  if (a.combined_score != b.combined_score) {
    return a.combined_score > b.combined_score;
  }
  if (a.lattice_score != b.lattice_score) {
    return a.lattice_score > b.lattice_score;
  }
  return a.tokens < b.tokens;
}

NgramLocalScorer::NgramLocalScorer(const NgramModel* model) : model_(model) {
  if (model_ == nullptr) {
    throw InvalidInputError("NgramLocalScorer requires a model");
  }
}

std::vector<double> NgramLocalScorer::ScoreTokens(TokenSpan context,
                                                  TokenSpan tokens) {
  NgramModel::StateId state = model_->ContextState(context);
  std::vector<double> scores;
  scores.reserve(tokens.size());
  for (TokenId token : tokens) {
    scores.push_back(model_->ScoreAndAdvance(state, token, nullptr));
  }
  return scores;
}

DraftCandidate LocalRescore(const SausageLattice& lattice, LocalScorer& scorer,
                            double alpha, bool condition_on_rescored) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInputError("rescore alpha must be finite and >= 0, got " +
                            std::to_string(alpha));
  }
  Tokens chosen_context(lattice.prefix().begin(), lattice.prefix().end());
  Tokens draft_context = chosen_context;

  DraftCandidate candidate;
  candidate.tokens.reserve(lattice.num_steps());
  for (std::size_t step = 0; step < lattice.num_steps(); ++step) {
    const std::vector<LatticeArc>& arcs = lattice.step(step);
    Tokens step_tokens;
    step_tokens.reserve(arcs.size());
    for (const LatticeArc& arc : arcs) step_tokens.push_back(arc.token);

    const Tokens& context =
        condition_on_rescored ? chosen_context : draft_context;
    std::vector<double> scores;
    try {
      scores = scorer.ScoreTokens(context, step_tokens);
    } catch (const RescoreError&) {
      throw;
    } catch (const std::exception& e) {
      throw RescoreError("local scorer failed at step " +
                         std::to_string(step) + ": " + e.what());
    }
    if (scores.size() != arcs.size()) {
      throw RescoreError("local scorer returned " +
                         std::to_string(scores.size()) + " scores for " +
                         std::to_string(arcs.size()) + " arcs at step " +
                         std::to_string(step));
    }
    for (double score : scores) {
      if (std::isnan(score) || score == std::numeric_limits<double>::infinity()) {
        throw RescoreError("local scorer returned a non-finite score at step " +
                           std::to_string(step));
      }
    }

    std::size_t best = 0;
    double best_value = arcs[0].weight + alpha * scores[0];
    for (std::size_t i = 1; i < arcs.size(); ++i) {
      const double value = arcs[i].weight + alpha * scores[i];
      if (value > best_value ||
          (value == best_value && arcs[i].token < arcs[best].token)) {
        best = i;
        best_value = value;
      }
    }

    candidate.tokens.push_back(arcs[best].token);
    candidate.lattice_score += arcs[best].weight;
    candidate.lm_score += scores[best];
    chosen_context.push_back(arcs[best].token);
    draft_context.push_back(arcs[0].token);
  }
  candidate.combined_score =
      candidate.lattice_score + alpha * candidate.lm_score;
  return candidate;
}

std::vector<DraftCandidate> DedupeAndRank(
    std::vector<DraftCandidate> candidates) {
  std::sort(candidates.begin(), candidates.end(), CandidateBefore);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].tokens == candidates[i - 1].tokens) {
      throw InternalError(
          "duplicate candidate token sequence in rescore output");
    }
  }
  return candidates;
}

}  // namespace draftlat
