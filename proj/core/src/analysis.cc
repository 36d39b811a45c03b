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

#include "draftlat/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "draftlat/ngram_counts.h"
#include "nlohmann/json.hpp"

namespace draftlat {
namespace {

constexpr int kRankNever = std::numeric_limits<int>::max();

// Rank of `target` under the arc-selection order (logit descending, ties to
// the lower TokenId); kRankNever when the head does not propose it at all.
int RankOfToken(const std::vector<TokenLogit>& head, TokenId target) {
  double target_logit = 0.0;
  bool found = false;
  for (const TokenLogit& entry : head) {
    if (entry.token == target) {
      target_logit = entry.logit;
      found = true;
      break;
    }
  }
  if (!found) return kRankNever;
  int better = 0;
  for (const TokenLogit& entry : head) {
    if (entry.logit > target_logit ||
        (entry.logit == target_logit && entry.token < target)) {
      ++better;
    }
  }
  return better + 1;
}

}  // namespace

double Entropy(std::span<const double> logits) {
  if (logits.empty()) {
    throw InvalidInputError("entropy of an empty distribution is undefined");
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (const double logit : logits) {
    if (std::isnan(logit) || logit == std::numeric_limits<double>::infinity()) {
      throw InvalidInputError("entropy input holds a non-finite score");
    }
    max_logit = std::max(max_logit, logit);
  }
  if (max_logit == -std::numeric_limits<double>::infinity()) {
    throw InvalidInputError("entropy input holds no probability mass");
  }
  double z = 0.0;
  double weighted = 0.0;  // sum of (logit - max) * exp(logit - max)
  for (const double logit : logits) {
    const double shifted = logit - max_logit;
    if (shifted == -std::numeric_limits<double>::infinity()) continue;
    const double mass = std::exp(shifted);
    z += mass;
    weighted += shifted * mass;
  }
  return std::log(z) - weighted / z;
}

double Entropy(const std::vector<TokenLogit>& logits) {
  std::vector<double> values;
  values.reserve(logits.size());
  for (const TokenLogit& entry : logits) values.push_back(entry.logit);
  return Entropy(values);
}

std::string HeadEntropyProfile::ToJsonString() const {
  nlohmann::json json;
  json["blocks"] = blocks;
  json["mean"] = mean;
  nlohmann::json histograms_json = nlohmann::json::array();
  for (const EntropyHistogram& histogram : histograms) {
    histograms_json.push_back({{"bin_width", histogram.bin_width},
                               {"counts", histogram.counts}});
  }
  json["histograms"] = std::move(histograms_json);
  return json.dump();
}

HeadEntropyProfile ProfileHeadEntropy(BaseLm& base, Drafter& drafter,
                                      TokenSpan prompt, int num_blocks,
                                      double bin_width) {
  if (num_blocks < 1) {
    throw InvalidInputError("entropy profile needs at least one block");
  }
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw InvalidInputError("entropy histogram bin width must be positive");
  }
  const int num_heads = drafter.num_heads();
  HeadEntropyProfile profile;
  profile.mean.assign(num_heads, 0.0);
  profile.histograms.assign(num_heads, EntropyHistogram{bin_width, {}});

  Tokens context(prompt.begin(), prompt.end());
  for (int block = 0; block < num_blocks; ++block) {
    const std::vector<std::vector<TokenLogit>> heads =
        drafter.ProposeBlock(context);
    if (static_cast<int>(heads.size()) != num_heads) {
      throw InvalidInputError("drafter proposed " +
                              std::to_string(heads.size()) +
                              " heads, expected " + std::to_string(num_heads));
    }
    for (int head = 0; head < num_heads; ++head) {
      const double entropy = Entropy(heads[head]);
      profile.mean[head] += entropy;
      const std::size_t bin = static_cast<std::size_t>(entropy / bin_width);
      EntropyHistogram& histogram = profile.histograms[head];
      if (histogram.counts.size() <= bin) histogram.counts.resize(bin + 1, 0);
      ++histogram.counts[bin];
    }
    for (int j = 0; j < num_heads; ++j) {
      context.push_back(base.GreedyNext(context));
    }
  }
  for (double& value : profile.mean) value /= num_blocks;
  profile.blocks = static_cast<std::uint64_t>(num_blocks);
  return profile;
}

std::string RepetitionStats::ToJsonString() const {
  nlohmann::json json;
  json["ngram_length"] = ngram_length;
  json["total_ngrams"] = total_ngrams;
  json["distinct_ngrams"] = distinct_ngrams;
  json["repeated_ngrams"] = repeated_ngrams;
  json["repetition_rate"] = repetition_rate;
  json["adjacent_pairs"] = adjacent_pairs;
  json["consecutive_pairs"] = consecutive_pairs;
  json["consecutive_rate"] = consecutive_rate;
  json["longest_token_run"] = longest_token_run;
  return json.dump();
}

RepetitionStats ComputeRepetition(TokenSpan tokens, int ngram_length) {
  if (ngram_length < 1) {
    throw InvalidInputError("repetition window length must be >= 1");
  }
  RepetitionStats stats;
  stats.ngram_length = ngram_length;

  const std::size_t n = static_cast<std::size_t>(ngram_length);
  if (tokens.size() >= n) {
    std::unordered_set<NgramKey> seen;
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      ++stats.total_ngrams;
      seen.insert(MakeNgramKey(tokens.subspan(start, n)));
    }
    stats.distinct_ngrams = seen.size();
    stats.repeated_ngrams = stats.total_ngrams - stats.distinct_ngrams;
    stats.repetition_rate = static_cast<double>(stats.repeated_ngrams) /
                            static_cast<double>(stats.total_ngrams);
  }

  std::uint64_t run = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) {
      ++stats.adjacent_pairs;
      if (tokens[i] == tokens[i - 1]) ++stats.consecutive_pairs;
    }
    run = (i > 0 && tokens[i] == tokens[i - 1]) ? run + 1 : 1;
    stats.longest_token_run = std::max(stats.longest_token_run, run);
  }
  if (stats.adjacent_pairs > 0) {
    stats.consecutive_rate = static_cast<double>(stats.consecutive_pairs) /
                             static_cast<double>(stats.adjacent_pairs);
  }
  return stats;
}

std::string WinLossStats::ToJsonString() const {
  nlohmann::json json;
  json["steps"] = steps;
  json["wins"] = wins;
  json["losses"] = losses;
  json["ties"] = ties;
  json["win_rate"] = win_rate;
  json["loss_rate"] = loss_rate;
  json["mean_gain"] = mean_gain;
  return json.dump();
}

WinLossStats ComputeWinLoss(std::span<const int> refined,
                            std::span<const int> baseline) {
  if (refined.size() != baseline.size()) {
    throw InvalidInputError("win/loss traces differ in length: " +
                            std::to_string(refined.size()) + " vs " +
                            std::to_string(baseline.size()));
  }
  WinLossStats stats;
  stats.steps = refined.size();
  double gain = 0.0;
  for (std::size_t i = 0; i < refined.size(); ++i) {
    if (refined[i] > baseline[i]) {
      ++stats.wins;
    } else if (refined[i] < baseline[i]) {
      ++stats.losses;
    } else {
      ++stats.ties;
    }
    gain += refined[i] - baseline[i];
  }
  if (stats.steps > 0) {
    stats.win_rate =
        static_cast<double>(stats.wins) / static_cast<double>(stats.steps);
    stats.loss_rate =
        static_cast<double>(stats.losses) / static_cast<double>(stats.steps);
    stats.mean_gain = gain / static_cast<double>(stats.steps);
  }
  return stats;
}

WinLossStats ComputeWinLoss(const DecodeReport& report) {
  std::vector<int> refined;
  std::vector<int> baseline;
  refined.reserve(report.steps.size());
  baseline.reserve(report.steps.size());
  for (const StepOutcome& step : report.steps) {
    refined.push_back(std::max(step.match_len, 1));
    baseline.push_back(std::max(step.baseline_match_len, 1));
  }
  return ComputeWinLoss(refined, baseline);
}

std::string OracleCurve::ToJsonString() const {
  nlohmann::json json;
  json["total_tokens"] = total_tokens;
  nlohmann::json points_json = nlohmann::json::array();
  for (const OracleCurvePoint& point : points) {
    points_json.push_back({{"top_k", point.top_k},
                           {"block_efficiency", point.block_efficiency},
                           {"serial_calls", point.serial_calls}});
  }
  json["points"] = std::move(points_json);
  return json.dump();
}

OracleCurve ComputeOracleCurve(BaseLm& base, Drafter& drafter,
                               TokenSpan prompt, std::uint64_t max_tokens,
                               const std::vector<int>& top_ks) {
  if (max_tokens < 1) {
    throw InvalidInputError("oracle curve needs max_tokens >= 1");
  }
  if (top_ks.empty()) {
    throw InvalidInputError("oracle curve needs at least one arc budget");
  }
  for (const int top_k : top_ks) {
    if (top_k < 1) {
      throw InvalidInputError("oracle curve arc budgets must be >= 1");
    }
  }
  const int num_heads = drafter.num_heads();
  const std::size_t total = static_cast<std::size_t>(max_tokens);

  const Tokens rollout = GreedyRollout(base, prompt, max_tokens);

  // ranks[t * num_heads + j]: rank of rollout[t + j] within head j proposed
  // at position t, under the arc-selection order.
  std::vector<int> ranks(total * num_heads, kRankNever);
  Tokens context(prompt.begin(), prompt.end());
  for (std::size_t t = 0; t < total; ++t) {
    const std::vector<std::vector<TokenLogit>> heads =
        drafter.ProposeBlock(context);
    if (static_cast<int>(heads.size()) != num_heads) {
      throw InvalidInputError("drafter proposed " +
                              std::to_string(heads.size()) +
                              " heads, expected " + std::to_string(num_heads));
    }
    const std::size_t reach =
        std::min(static_cast<std::size_t>(num_heads), total - t);
    for (std::size_t j = 0; j < reach; ++j) {
      ranks[t * num_heads + j] = RankOfToken(heads[j], rollout[t + j]);
    }
    context.push_back(rollout[t]);
  }

  OracleCurve curve;
  curve.total_tokens = max_tokens;
  for (const int top_k : top_ks) {
    std::uint64_t calls = 0;
    std::size_t t = 0;
    while (t < total) {
      const std::size_t limit =
          std::min(static_cast<std::size_t>(num_heads), total - t);
      std::size_t match = 0;
      while (match < limit && ranks[t * num_heads + match] <= top_k) ++match;
      t += std::max<std::size_t>(match, 1);
      ++calls;
    }
    OracleCurvePoint point;
    point.top_k = top_k;
    point.serial_calls = calls;
    point.block_efficiency =
        static_cast<double>(max_tokens) / static_cast<double>(calls);
    curve.points.push_back(point);
  }
  return curve;
}

std::string CostModelResult::ToJsonString() const {
  nlohmann::json json;
  json["params_read_per_token"] = params_read_per_token;
  json["bytes_read_per_token"] = bytes_read_per_token;
  json["io_speedup"] = io_speedup;
  return json.dump();
}

CostModelResult ParameterIoPerToken(const DecodeReport& report,
                                    const CostModelConfig& config) {
  if (!(config.base_params > 0.0) || !std::isfinite(config.base_params)) {
    throw InvalidInputError("cost model base_params must be positive");
  }
  if (!(config.draft_params >= 0.0) || !std::isfinite(config.draft_params)) {
    throw InvalidInputError("cost model draft_params must be >= 0");
  }
  if (!(config.bytes_per_param > 0.0) ||
      !std::isfinite(config.bytes_per_param)) {
    throw InvalidInputError("cost model bytes_per_param must be positive");
  }
  if (report.total_tokens == 0 || report.serial_calls == 0) {
    throw InvalidInputError("cost model needs a non-empty decode report");
  }
  const double reads_per_call = config.base_params + config.draft_params;
  CostModelResult result;
  result.params_read_per_token =
      reads_per_call * static_cast<double>(report.serial_calls) /
      static_cast<double>(report.total_tokens);
  result.bytes_read_per_token =
      result.params_read_per_token * config.bytes_per_param;
  result.io_speedup = config.base_params / result.params_read_per_token;
  return result;
}

LinearFit FitLine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvalidInputError("line fit inputs differ in length");
  }
  if (x.size() < 2) {
    throw InvalidInputError("line fit needs at least two points");
  }
  const double n = static_cast<double>(x.size());
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidInputError("line fit inputs must be finite");
    }
    sum_x += x[i];
    sum_y += y[i];
  }
  const double mean_x = sum_x / n;
  const double mean_y = sum_y / n;
  double var_x = 0.0;
  double cov_xy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    var_x += (x[i] - mean_x) * (x[i] - mean_x);
    cov_xy += (x[i] - mean_x) * (y[i] - mean_y);
  }
  if (var_x == 0.0) {
    throw InvalidInputError("line fit needs non-constant x values");
  }
  LinearFit fit;
  fit.slope = cov_xy / var_x;
  fit.intercept = mean_y - fit.slope * mean_x;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double predicted = fit.intercept + fit.slope * x[i];
    ss_res += (y[i] - predicted) * (y[i] - predicted);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

}  // namespace draftlat
