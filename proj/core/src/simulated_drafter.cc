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

#include "draftlat/simulated_drafter.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "draftlat/rng.h"

namespace draftlat {
namespace {

void ValidateConfig(SimulatedDrafterConfig& config) {
  if (config.num_heads < 1) {
    throw ConfigError("simulated drafter needs at least one head");
  }
  const std::size_t h = static_cast<std::size_t>(config.num_heads);

  if (config.context_window.empty()) {
    config.context_window.assign(h, 1);
    config.context_window[0] = SimulatedDrafterConfig::kFullContext;
    for (std::size_t j = 1; j < h; ++j) {
      config.context_window[j] = std::max(1, 4 - static_cast<int>(j));
    }
  }
  if (config.temperature.empty()) config.temperature.assign(h, 1.0);
  if (config.noise_sigma.empty()) {
    config.noise_sigma.resize(h);
    for (std::size_t j = 0; j < h; ++j) {
      config.noise_sigma[j] = 0.1 * static_cast<double>(j);
    }
  }

  if (config.context_window.size() != h || config.temperature.size() != h ||
      config.noise_sigma.size() != h) {
    throw ConfigError(
        "simulated drafter per-head settings must match num_heads");
  }
  if (config.context_window[0] != SimulatedDrafterConfig::kFullContext) {
    throw ConfigError("simulated drafter head 1 must see the full context");
  }
  for (std::size_t j = 1; j < h; ++j) {
    if (config.context_window[j] < 0 &&
        config.context_window[j] != SimulatedDrafterConfig::kFullContext) {
      throw ConfigError("simulated drafter context windows must be >= 0 or " +
                        std::to_string(SimulatedDrafterConfig::kFullContext));
    }
  }
  if (config.temperature[0] != 1.0) {
    throw ConfigError("simulated drafter head 1 temperature must be 1");
  }
  for (std::size_t j = 0; j < h; ++j) {
    const double tau = config.temperature[j];
    if (!std::isfinite(tau) || tau <= 0.0) {
      throw ConfigError("simulated drafter temperatures must be positive");
    }
    if (j > 0 && tau < config.temperature[j - 1]) {
      throw ConfigError(
          "simulated drafter temperatures may not decrease across heads");
    }
    const double sigma = config.noise_sigma[j];
    if (!std::isfinite(sigma) || sigma < 0.0) {
      throw ConfigError("simulated drafter noise scales must be >= 0");
    }
  }
  if (config.noise_sigma[0] != 0.0) {
    throw ConfigError("simulated drafter head 1 noise scale must be 0");
  }
}

}  // namespace

SimulatedDrafter::SimulatedDrafter(const NgramModel* model,
                                   SimulatedDrafterConfig config)
    : model_(model), config_(std::move(config)), greedy_(model) {
  if (model_ == nullptr) {
    throw InvalidInputError("simulated drafter requires a model");
  }
  if (!model_->finalized()) {
    throw InvalidInputError("simulated drafter requires a finalized model");
  }
  ValidateConfig(config_);
}

std::vector<std::vector<TokenLogit>> SimulatedDrafter::ProposeBlock(
    TokenSpan context) {
  const TokenId vocab_size = static_cast<TokenId>(model_->vocab().size());
  const std::uint64_t position = context.size();
  std::vector<std::vector<TokenLogit>> heads(config_.num_heads);

  for (int head = 0; head < config_.num_heads; ++head) {
    // The head's (possibly truncated) view of the context.
    NgramModel::StateId state;
    if (config_.context_window[head] == SimulatedDrafterConfig::kFullContext) {
      state = model_->ContextState(context);
    } else {
      const std::size_t window = std::min<std::size_t>(
          static_cast<std::size_t>(config_.context_window[head]),
          context.size());
      state = model_->ContextState(context.subspan(context.size() - window));
    }
    // Guessing `head + 1` tokens ahead: roll the model greedily from the
    // truncated view up to the position this head predicts.
    for (int ahead = 0; ahead < head; ++ahead) {
      const TokenId rolled = greedy_.Next(state);
      model_->ScoreAndAdvance(state, rolled, &state);
    }

    const double tau = config_.temperature[head];
    const double sigma = config_.noise_sigma[head];
    std::vector<TokenLogit>& logits = heads[head];
    logits.reserve(vocab_size);
    for (TokenId token = 0; token < vocab_size; ++token) {
      double logit = model_->ScoreAndAdvance(state, token, nullptr) / tau;
      if (sigma > 0.0) {
        logit += sigma * KeyedGumbel(config_.seed, position,
                                     static_cast<std::uint64_t>(head), token);
      }
      if (std::isfinite(logit)) logits.push_back({token, logit});
    }
    if (logits.empty()) {
      throw InvalidInputError(
          "simulated drafter produced an empty head support; the model "
          "assigns no probability mass at this context");
    }
  }
  return heads;
}

}  // namespace draftlat
