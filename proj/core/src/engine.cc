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

#include "draftlat/engine.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "draftlat/vocab.h"
#include "nlohmann/json.hpp"

namespace draftlat {
namespace {

// Longest common prefix of a draft and the greedy continuation.
int CommonPrefix(const Tokens& draft, const Tokens& greedy) {
  const std::size_t limit = std::min(draft.size(), greedy.size());
  std::size_t m = 0;
  while (m < limit && draft[m] == greedy[m]) ++m;
  return static_cast<int>(m);
}

}  // namespace

NgramBaseLm::NgramBaseLm(const NgramModel* model)
    : model_(model), greedy_(model) {
  if (model_ == nullptr) {
    throw InvalidInputError("NgramBaseLm requires a model");
  }
  if (!model_->finalized()) {
    throw InvalidInputError("NgramBaseLm requires a finalized model");
  }
}

TokenId NgramBaseLm::GreedyNext(TokenSpan context) {
  return greedy_.Next(model_->ContextState(context));
}

std::string DecodeModeName(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kVanilla:
      return "vanilla";
    case DecodeMode::kLocal:
      return "local";
    case DecodeMode::kNgram:
      return "ngram";
    case DecodeMode::kPBest:
      return "pbest";
    case DecodeMode::kOracle:
      return "oracle";
  }
  throw InternalError("unhandled decode mode");
}

DecodeMode ParseDecodeMode(const std::string& name) {
  if (name == "vanilla") return DecodeMode::kVanilla;
  if (name == "local") return DecodeMode::kLocal;
  if (name == "ngram") return DecodeMode::kNgram;
  if (name == "pbest") return DecodeMode::kPBest;
  if (name == "oracle") return DecodeMode::kOracle;
  throw ConfigError("unknown decode mode '" + name +
                    "' (expected vanilla, local, ngram, pbest, or oracle)");
}

void DecodeConfig::Validate(int num_heads) const {
  if (num_heads < 1) {
    throw ConfigError("decoding requires at least one drafter head");
  }
  if (max_tokens < 1) {
    throw ConfigError("decode max_tokens must be >= 1");
  }
  if (top_k < 1) {
    throw ConfigError("decode top_k must be >= 1");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("decode alpha must be finite and >= 0");
  }
  if (num_candidates < 1) {
    throw ConfigError("decode num_candidates must be >= 1");
  }
  if ((mode == DecodeMode::kLocal || mode == DecodeMode::kNgram) &&
      rescore_model == nullptr) {
    throw ConfigError("decode mode " + DecodeModeName(mode) +
                      " requires a rescore model");
  }
}

std::string DecodeReport::ToJsonString(bool include_steps) const {
  nlohmann::json json;
  json["schema"] = 1;
  json["mode"] = mode;
  json["total_tokens"] = total_tokens;
  json["serial_calls"] = serial_calls;
  json["block_efficiency"] = block_efficiency;
  json["accepted_histogram"] = accepted_histogram;
  json["verify_positions"] = verify_positions;
  json["draft_calls"] = draft_calls;
  json["wall_ms"] = wall_ms;
  json["output"] = output;
  if (include_steps) {
    nlohmann::json steps_json = nlohmann::json::array();
    for (const StepOutcome& step : steps) {
      steps_json.push_back({{"position", step.position},
                            {"match_len", step.match_len},
                            {"accepted", step.accepted},
                            {"baseline_match_len", step.baseline_match_len},
                            {"chosen_candidate", step.chosen_candidate}});
    }
    json["steps"] = std::move(steps_json);
  }
  return json.dump();
}

DecodeReport BpdDecode(BaseLm& base, Drafter& drafter, TokenSpan prompt,
                       const DecodeConfig& config) {
  const int num_heads = drafter.num_heads();
  config.Validate(num_heads);
  const auto start_time = std::chrono::steady_clock::now();

  DecodeReport report;
  report.mode = DecodeModeName(config.mode);
  report.accepted_histogram.assign(num_heads, 0);

  Tokens context(prompt.begin(), prompt.end());
  const int context_window =
      config.rescore_model != nullptr ? config.rescore_model->order() - 1 : 0;

  std::optional<NgramLocalScorer> local_scorer;
  if (config.mode == DecodeMode::kLocal) {
    local_scorer.emplace(config.rescore_model);
  }

  Tokens greedy(num_heads);
  bool saw_sentence_end = false;
  while (report.total_tokens < config.max_tokens && !saw_sentence_end) {
    std::vector<std::vector<TokenLogit>> heads = drafter.ProposeBlock(context);
    ++report.draft_calls;
    if (static_cast<int>(heads.size()) != num_heads) {
      throw InvalidInputError("drafter proposed " +
                              std::to_string(heads.size()) + " heads, expected " +
                              std::to_string(num_heads));
    }

    // Only the scoring-relevant context tail seeds the lattice: the rescore
    // model never looks further back than its order allows.
    const std::size_t tail =
        std::min<std::size_t>(context_window, context.size());
    Tokens prefix(context.end() - tail, context.end());
    const SausageLattice lattice =
        BuildLattice(heads, config.top_k, prefix);

    // The base model's continuation, which verification compares against.
    for (int j = 0; j < num_heads; ++j) {
      greedy[j] = base.GreedyNext(context);
      context.push_back(greedy[j]);
    }
    context.resize(context.size() - num_heads);

    if (lattice.step(0)[0].token != greedy[0]) {
      throw InvalidInputError(
          "drafter head 1 argmax disagrees with the base model at position " +
          std::to_string(report.total_tokens));
    }

    const int baseline_match =
        CommonPrefix(TopPath(lattice).tokens, greedy);

    int best_match = 0;
    int best_rank = 0;
    int candidates_verified = 1;
    switch (config.mode) {
      case DecodeMode::kVanilla:
        best_match = baseline_match;
        break;
      case DecodeMode::kOracle: {
        int m = 0;
        while (m < num_heads && lattice.StepContains(m, greedy[m])) ++m;
        best_match = m;
        break;
      }
      case DecodeMode::kLocal: {
        const DraftCandidate candidate =
            LocalRescore(lattice, *local_scorer, config.alpha,
                         config.condition_on_rescored);
        best_match = CommonPrefix(candidate.tokens, greedy);
        break;
      }
      case DecodeMode::kNgram:
      case DecodeMode::kPBest: {
        const int p =
            config.mode == DecodeMode::kNgram ? 1 : config.num_candidates;
        const std::vector<DraftCandidate> candidates =
            GlobalRescore(lattice, config.rescore_model, config.alpha, p);
        candidates_verified = static_cast<int>(candidates.size());
        for (int i = 0; i < candidates_verified; ++i) {
          const int match = CommonPrefix(candidates[i].tokens, greedy);
          if (match > best_match) {
            best_match = match;
            best_rank = i;
          }
        }
        break;
      }
    }

    const std::uint64_t remaining = config.max_tokens - report.total_tokens;
    int accepted = std::max(best_match, 1);
    accepted = static_cast<int>(
        std::min<std::uint64_t>(accepted, remaining));
    if (config.stop_at_sentence_end) {
      for (int j = 0; j < accepted; ++j) {
        if (greedy[j] == Vocabulary::kSentenceEndId) {
          accepted = j + 1;
          saw_sentence_end = true;
          break;
        }
      }
    }

    StepOutcome outcome;
    outcome.position = report.total_tokens;
    outcome.match_len = best_match;
    outcome.accepted = accepted;
    outcome.baseline_match_len = baseline_match;
    outcome.chosen_candidate = best_rank;
    report.steps.push_back(outcome);

    ++report.serial_calls;
    ++report.accepted_histogram[accepted - 1];
    report.verify_positions +=
        1 + static_cast<std::uint64_t>(candidates_verified) * (num_heads - 1);
    for (int j = 0; j < accepted; ++j) {
      context.push_back(greedy[j]);
      report.output.push_back(greedy[j]);
    }
    report.total_tokens += accepted;
  }

  report.block_efficiency =
      report.serial_calls > 0
          ? static_cast<double>(report.total_tokens) /
                static_cast<double>(report.serial_calls)
          : 0.0;
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start_time)
                       .count();
  return report;
}

Tokens GreedyRollout(BaseLm& base, TokenSpan prompt,
                     std::uint64_t max_tokens) {
  Tokens context(prompt.begin(), prompt.end());
  Tokens output;
  output.reserve(max_tokens);
  for (std::uint64_t i = 0; i < max_tokens; ++i) {
    const TokenId token = base.GreedyNext(context);
    context.push_back(token);
    output.push_back(token);
  }
  return output;
}

TuneAlphaResult TuneAlpha(BaseLm& base, Drafter& drafter, TokenSpan prompt,
                          const DecodeConfig& config,
                          const std::vector<double>& alphas) {
  if (alphas.empty()) {
    throw InvalidInputError("alpha tuning needs at least one alpha");
  }
  TuneAlphaResult result;
  bool first = true;
  for (const double alpha : alphas) {
    DecodeConfig run_config = config;
    run_config.alpha = alpha;
    const DecodeReport report = BpdDecode(base, drafter, prompt, run_config);
    result.curve.emplace_back(alpha, report.block_efficiency);
    const bool better =
        first || report.block_efficiency > result.best_block_efficiency ||
        (report.block_efficiency == result.best_block_efficiency &&
         alpha < result.best_alpha);
    if (better) {
      result.best_alpha = alpha;
      result.best_block_efficiency = report.block_efficiency;
      first = false;
    }
  }
  return result;
}

}  // namespace draftlat
