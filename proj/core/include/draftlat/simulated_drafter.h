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
// A deterministic stand-in for a multi-head draft model, built on top of an
// n-gram model. Head 1 reproduces the model's next-token distribution
// exactly. Head j > 1 has to guess j tokens ahead: it rolls the model
// forward greedily from a truncated view of the context, which makes its
// guesses drift from the true continuation the further ahead it looks, a
// flattening temperature, and keyed Gumbel noise complete the degradation.
// The same seed, context, and config always produce the same proposals.

#ifndef DRAFTLAT_SIMULATED_DRAFTER_H_
#define DRAFTLAT_SIMULATED_DRAFTER_H_

#include <cstdint>
#include <vector>

#include "draftlat/engine.h"
#include "draftlat/ngram_model.h"
#include "draftlat/types.h"

namespace draftlat {

struct SimulatedDrafterConfig {
  int num_heads = 4;
  // Context tokens visible to each head; kFullContext for no truncation.
  // Head 1 must see the full context. Empty selects the default profile
  // (full, 3, 2, 1, 1, ...).
  std::vector<int> context_window;
  // Flattening temperature per head; head 1 must be 1 and values may not
  // decrease across heads. Empty means all 1.
  std::vector<double> temperature;
  // Gumbel noise scale per head; head 1 must be 0. Empty selects the default
  // profile 0.1 * (head - 1).
  std::vector<double> noise_sigma;
  std::uint64_t seed = 0;

  static constexpr int kFullContext = -1;
};

class SimulatedDrafter : public Drafter {
 public:
  // Throws ConfigError when the config breaks the constraints above and
  // InvalidInputError on a null or unfinalized model.
  SimulatedDrafter(const NgramModel* model, SimulatedDrafterConfig config);

  int num_heads() const override { return config_.num_heads; }

  std::vector<std::vector<TokenLogit>> ProposeBlock(
      TokenSpan context) override;

  const SimulatedDrafterConfig& config() const { return config_; }

 private:
  const NgramModel* model_;
  SimulatedDrafterConfig config_;
  GreedyNextCache greedy_;
};

}  // namespace draftlat

#endif  // DRAFTLAT_SIMULATED_DRAFTER_H_
