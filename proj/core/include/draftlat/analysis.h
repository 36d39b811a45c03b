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
// Measurement helpers around the decode loop: head uncertainty profiles,
// output repetition, paired accept comparisons, the oracle acceptance
// ceiling as a function of the arc budget, and a parameter-I/O cost model.

#ifndef DRAFTLAT_ANALYSIS_H_
#define DRAFTLAT_ANALYSIS_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "draftlat/engine.h"
#include "draftlat/types.h"

namespace draftlat {

// Shannon entropy in nats of the distribution obtained by softmax over
// unnormalized log-domain scores. NaN or +infinity entries are invalid;
// -infinity marks zero-probability entries and is allowed as long as at
// least one entry is finite.
double Entropy(std::span<const double> logits);
double Entropy(const std::vector<TokenLogit>& logits);

struct EntropyHistogram {
  double bin_width = 0.5;
  // counts[i] tallies entropies in [i * bin_width, (i + 1) * bin_width).
  std::vector<std::uint64_t> counts;
};

// Per-head entropy of drafter proposals along the base model's greedy
// rollout, one proposal every num_heads tokens.
struct HeadEntropyProfile {
  std::vector<double> mean;                  // per head, nats
  std::vector<EntropyHistogram> histograms;  // per head
  std::uint64_t blocks = 0;

  std::string ToJsonString() const;
};

HeadEntropyProfile ProfileHeadEntropy(BaseLm& base, Drafter& drafter,
                                      TokenSpan prompt, int num_blocks,
                                      double bin_width = 0.5);

// Window statistics over a token sequence: how often a length-n window
// repeats an earlier one, how often a token immediately repeats its
// predecessor, and the longest run of one token.
struct RepetitionStats {
  int ngram_length = 1;
  std::uint64_t total_ngrams = 0;
  std::uint64_t distinct_ngrams = 0;
  std::uint64_t repeated_ngrams = 0;  // total - distinct
  double repetition_rate = 0.0;       // repeated / total, 0 when no windows
  // Of the size() - 1 adjacent token pairs, how many are two copies of the
  // same token, and their fraction (0 when the sequence has no pairs).
  std::uint64_t adjacent_pairs = 0;
  std::uint64_t consecutive_pairs = 0;
  double consecutive_rate = 0.0;
  std::uint64_t longest_token_run = 0;

  std::string ToJsonString() const;
};

RepetitionStats ComputeRepetition(TokenSpan tokens, int ngram_length);

// Paired per-call accept comparison of a refined decode against the
// unrefined draft on the same lattices.
struct WinLossStats {
  std::uint64_t steps = 0;
  std::uint64_t wins = 0;    // refined accepted strictly more
  std::uint64_t losses = 0;  // refined accepted strictly less
  std::uint64_t ties = 0;
  double win_rate = 0.0;
  double loss_rate = 0.0;
  double mean_gain = 0.0;    // mean of (refined - baseline)

  std::string ToJsonString() const;
};

// Traces must have equal length; each entry is the accepted length of one
// serial call.
WinLossStats ComputeWinLoss(std::span<const int> refined,
                            std::span<const int> baseline);

// Reads both traces out of one decode report: the refined accepts are the
// report's own match lengths, the baseline accepts are the counterfactual
// top-path match lengths recorded per step, both floored at one token and
// without end-of-decode clipping.
WinLossStats ComputeWinLoss(const DecodeReport& report);

// Block efficiency of an oracle decode as a function of the per-step arc
// budget k. The greedy rollout and the per-position rank of the greedy
// token within every head's proposal are computed once; each k then replays
// acceptance from the rank table, which makes the k = 1 point reproduce the
// unrefined decode exactly.
struct OracleCurvePoint {
  int top_k = 0;
  double block_efficiency = 0.0;
  std::uint64_t serial_calls = 0;
};

struct OracleCurve {
  std::vector<OracleCurvePoint> points;
  std::uint64_t total_tokens = 0;

  std::string ToJsonString() const;
};

OracleCurve ComputeOracleCurve(BaseLm& base, Drafter& drafter,
                               TokenSpan prompt, std::uint64_t max_tokens,
                               const std::vector<int>& top_ks);

// Accelerator-I/O cost model. Every serial call streams the base weights
// once (verification rides the same forward pass) plus the draft-head
// weights; amortizing over tokens, a decode that advances B tokens per call
// reads (base + draft) / B parameters per token, against `base` for plain
// greedy decoding.
struct CostModelConfig {
  double base_params = 0.0;
  double draft_params = 0.0;
  double bytes_per_param = 2.0;
};

struct CostModelResult {
  double params_read_per_token = 0.0;
  double bytes_read_per_token = 0.0;
  // Parameter-I/O reduction over plain greedy decoding of the same tokens.
  double io_speedup = 0.0;

  std::string ToJsonString() const;
};

CostModelResult ParameterIoPerToken(const DecodeReport& report,
                                    const CostModelConfig& config);

// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

// Requires equal lengths, at least two points, finite values, and
// non-constant x. A constant y fits with r_squared = 1.
LinearFit FitLine(std::span<const double> x, std::span<const double> y);

}  // namespace draftlat

#endif  // DRAFTLAT_ANALYSIS_H_
