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

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "draftlat/analysis.h"
#include "draftlat/engine.h"
#include "draftlat/rescore_bench.h"
#include "draftlat/simulated_drafter.h"
#include "draftlat/types.h"
#include "gtest/gtest.h"
#include "nlohmann/json.hpp"

namespace draftlat {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double EntropyOf(std::vector<double> logits) {
  return Entropy(std::span<const double>(logits));
}

// Base model that always continues with token 0; enough for analyses that
// only need some greedy continuation to exist.
class ZeroBase : public BaseLm {
 public:
  TokenId GreedyNext(TokenSpan) override { return 0; }
};

// Drafter that replays the same scripted block forever.
class FixedHeadsDrafter : public Drafter {
 public:
  explicit FixedHeadsDrafter(std::vector<std::vector<TokenLogit>> heads)
      : heads_(std::move(heads)) {}

  int num_heads() const override { return static_cast<int>(heads_.size()); }

  std::vector<std::vector<TokenLogit>> ProposeBlock(TokenSpan) override {
    return heads_;
  }

 private:
  std::vector<std::vector<TokenLogit>> heads_;
};

// --- Entropy --------------------------------------------------------------

TEST(EntropyTest, UniformDistributionHasLogNNats) {
  EXPECT_DOUBLE_EQ(EntropyOf({0.0, 0.0, 0.0, 0.0}), std::log(4.0));
  EXPECT_DOUBLE_EQ(EntropyOf({-3.25, -3.25}), std::log(2.0));
  EXPECT_DOUBLE_EQ(EntropyOf({7.5}), 0.0);
}

TEST(EntropyTest, PointMassHasZeroEntropy) {
  EXPECT_DOUBLE_EQ(EntropyOf({0.0, -kInf, -kInf}), 0.0);
}

TEST(EntropyTest, MatchesTheHandComputedTwoPointCase) {
  // softmax(ln 3, 0) = (3/4, 1/4): H = ln 4 - (3/4) ln 3.
  const double expected = std::log(4.0) - 0.75 * std::log(3.0);
  EXPECT_NEAR(EntropyOf({std::log(3.0), 0.0}), expected, 1e-12);
}

TEST(EntropyTest, IsInvariantUnderAdditiveShifts) {
  const std::vector<double> logits = {0.3, -1.2, 2.7, -0.4};
  const double reference = EntropyOf(logits);
  std::vector<double> shifted = logits;
  for (double& value : shifted) value += 100.0;
  EXPECT_NEAR(EntropyOf(shifted), reference, 1e-9);
}

TEST(EntropyTest, NegativeInfinityEntriesCarryNoMass) {
  EXPECT_DOUBLE_EQ(EntropyOf({1.0, 1.0, -kInf}), std::log(2.0));
}

TEST(EntropyTest, RejectsDegenerateInputs) {
  EXPECT_THROW(EntropyOf({}), InvalidInputError);
  EXPECT_THROW(EntropyOf({0.0, kNan}), InvalidInputError);
  EXPECT_THROW(EntropyOf({0.0, kInf}), InvalidInputError);
  EXPECT_THROW(EntropyOf({-kInf, -kInf}), InvalidInputError);
}

TEST(EntropyTest, TokenLogitOverloadMatchesThePlainOverload) {
  const std::vector<TokenLogit> scored = {{3, 0.4}, {9, -0.7}, {2, 1.1}};
  EXPECT_EQ(Entropy(scored), EntropyOf({0.4, -0.7, 1.1}));
}

// --- Head entropy profile -------------------------------------------------

TEST(ProfileHeadEntropyTest, BinsScriptedHeadsWhereTheyBelong) {
  // Head 1 is uniform over four tokens (ln 4 = 1.386 nats, bin 2 at width
  // 0.5); head 2 is a point mass (0 nats, bin 0).
  FixedHeadsDrafter drafter({
      {{0, 0.0}, {1, 0.0}, {2, 0.0}, {3, 0.0}},
      {{5, 0.0}},
  });
  ZeroBase base;
  const HeadEntropyProfile profile =
      ProfileHeadEntropy(base, drafter, Tokens{1, 2}, 2);
  EXPECT_EQ(profile.blocks, 2u);
  ASSERT_EQ(profile.mean.size(), 2u);
  EXPECT_DOUBLE_EQ(profile.mean[0], std::log(4.0));
  EXPECT_DOUBLE_EQ(profile.mean[1], 0.0);
  ASSERT_EQ(profile.histograms.size(), 2u);
  EXPECT_EQ(profile.histograms[0].counts,
            (std::vector<std::uint64_t>{0, 0, 2}));
  EXPECT_EQ(profile.histograms[1].counts, (std::vector<std::uint64_t>{2}));

  const nlohmann::json json =
      nlohmann::json::parse(profile.ToJsonString());
  EXPECT_EQ(json.at("blocks").get<int>(), 2);
  EXPECT_EQ(json.at("mean").size(), 2u);
  EXPECT_EQ(json.at("histograms").at(0).at("bin_width").get<double>(), 0.5);
}

TEST(ProfileHeadEntropyTest, RejectsBadArgumentsAndBrokenDrafters) {
  FixedHeadsDrafter drafter({{{0, 0.0}}});
  ZeroBase base;
  EXPECT_THROW(ProfileHeadEntropy(base, drafter, Tokens{}, 0),
               InvalidInputError);
  EXPECT_THROW(ProfileHeadEntropy(base, drafter, Tokens{}, 1, 0.0),
               InvalidInputError);
  EXPECT_THROW(ProfileHeadEntropy(base, drafter, Tokens{}, 1, -1.0),
               InvalidInputError);
  EXPECT_THROW(ProfileHeadEntropy(base, drafter, Tokens{}, 1, kInf),
               InvalidInputError);

  class Shrinking : public Drafter {
   public:
    int num_heads() const override { return 2; }
    std::vector<std::vector<TokenLogit>> ProposeBlock(TokenSpan) override {
      return {{{0, 0.0}}};
    }
  } shrinking;
  EXPECT_THROW(ProfileHeadEntropy(base, shrinking, Tokens{}, 1),
               InvalidInputError);
}

// --- Repetition -----------------------------------------------------------

TEST(ComputeRepetitionTest, CountsWindowsAndRuns) {
  const Tokens tokens = {1, 2, 1, 2, 1};
  const RepetitionStats stats = ComputeRepetition(tokens, 2);
  EXPECT_EQ(stats.ngram_length, 2);
  EXPECT_EQ(stats.total_ngrams, 4u);
  EXPECT_EQ(stats.distinct_ngrams, 2u);
  EXPECT_EQ(stats.repeated_ngrams, 2u);
  EXPECT_DOUBLE_EQ(stats.repetition_rate, 0.5);
  EXPECT_EQ(stats.adjacent_pairs, 4u);
  EXPECT_EQ(stats.consecutive_pairs, 0u);
  EXPECT_DOUBLE_EQ(stats.consecutive_rate, 0.0);
  EXPECT_EQ(stats.longest_token_run, 1u);
}

TEST(ComputeRepetitionTest, TracksSingleTokenRuns) {
  const Tokens tokens = {5, 5, 5, 2, 2};
  const RepetitionStats stats = ComputeRepetition(tokens, 1);
  EXPECT_EQ(stats.total_ngrams, 5u);
  EXPECT_EQ(stats.distinct_ngrams, 2u);
  EXPECT_EQ(stats.repeated_ngrams, 3u);
  EXPECT_DOUBLE_EQ(stats.repetition_rate, 0.6);
  EXPECT_EQ(stats.adjacent_pairs, 4u);
  EXPECT_EQ(stats.consecutive_pairs, 3u);
  EXPECT_DOUBLE_EQ(stats.consecutive_rate, 0.75);
  EXPECT_EQ(stats.longest_token_run, 3u);
}

TEST(ComputeRepetitionTest, OneRepeatedPairAmongThree) {
  // a a b a: one of the three adjacent pairs repeats; longest run 2.
  const Tokens tokens = {7, 7, 8, 7};
  const RepetitionStats stats = ComputeRepetition(tokens, 2);
  EXPECT_EQ(stats.adjacent_pairs, 3u);
  EXPECT_EQ(stats.consecutive_pairs, 1u);
  EXPECT_NEAR(stats.consecutive_rate, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(stats.longest_token_run, 2u);
  // The two-token windows (7,7), (7,8), (8,7) are all distinct.
  EXPECT_EQ(stats.repeated_ngrams, 0u);

  const nlohmann::json json = nlohmann::json::parse(stats.ToJsonString());
  EXPECT_EQ(json.at("consecutive_pairs").get<int>(), 1);
  EXPECT_EQ(json.at("adjacent_pairs").get<int>(), 3);
}

TEST(ComputeRepetitionTest, HandlesShortAndEmptyInputs) {
  const RepetitionStats wide = ComputeRepetition(Tokens{1, 2}, 3);
  EXPECT_EQ(wide.total_ngrams, 0u);
  EXPECT_EQ(wide.distinct_ngrams, 0u);
  EXPECT_DOUBLE_EQ(wide.repetition_rate, 0.0);
  EXPECT_EQ(wide.longest_token_run, 1u);

  const RepetitionStats empty = ComputeRepetition(Tokens{}, 2);
  EXPECT_EQ(empty.total_ngrams, 0u);
  EXPECT_EQ(empty.longest_token_run, 0u);

  EXPECT_THROW(ComputeRepetition(Tokens{1}, 0), InvalidInputError);

  const nlohmann::json json = nlohmann::json::parse(wide.ToJsonString());
  EXPECT_EQ(json.at("ngram_length").get<int>(), 3);
  EXPECT_EQ(json.at("total_ngrams").get<int>(), 0);
}

// --- Win/loss -------------------------------------------------------------

TEST(ComputeWinLossTest, ComparesTracesElementwise) {
  const std::vector<int> refined = {3, 1, 2, 2};
  const std::vector<int> baseline = {1, 2, 2, 1};
  const WinLossStats stats = ComputeWinLoss(refined, baseline);
  EXPECT_EQ(stats.steps, 4u);
  EXPECT_EQ(stats.wins, 2u);
  EXPECT_EQ(stats.losses, 1u);
  EXPECT_EQ(stats.ties, 1u);
  EXPECT_DOUBLE_EQ(stats.win_rate, 0.5);
  EXPECT_DOUBLE_EQ(stats.loss_rate, 0.25);
  EXPECT_DOUBLE_EQ(stats.mean_gain, 0.5);

  const nlohmann::json json = nlohmann::json::parse(stats.ToJsonString());
  EXPECT_EQ(json.at("wins").get<int>(), 2);
  EXPECT_EQ(json.at("mean_gain").get<double>(), 0.5);
}

TEST(ComputeWinLossTest, EmptyTracesYieldZeroes) {
  const WinLossStats stats =
      ComputeWinLoss(std::vector<int>{}, std::vector<int>{});
  EXPECT_EQ(stats.steps, 0u);
  EXPECT_DOUBLE_EQ(stats.win_rate, 0.0);
  EXPECT_DOUBLE_EQ(stats.mean_gain, 0.0);
}

TEST(ComputeWinLossTest, RejectsLengthMismatch) {
  EXPECT_THROW(
      ComputeWinLoss(std::vector<int>{1, 2}, std::vector<int>{1}),
      InvalidInputError);
}

TEST(ComputeWinLossTest, ReadsBothTracesOutOfAReportFlooredAtOne) {
  DecodeReport report;
  report.steps = {
      {0, 0, 1, 1, 0},  // match 0 floors to 1, ties the baseline's 1
      {1, 3, 3, 1, 2},  // clean win, 3 vs 1
      {4, 2, 1, 2, 0},  // tie at 2; the clipped accept must not matter
      {6, 1, 1, 0, 0},  // baseline 0 floors to 1: another tie
  };
  const WinLossStats stats = ComputeWinLoss(report);
  EXPECT_EQ(stats.steps, 4u);
  EXPECT_EQ(stats.wins, 1u);
  EXPECT_EQ(stats.losses, 0u);
  EXPECT_EQ(stats.ties, 3u);
  EXPECT_DOUBLE_EQ(stats.mean_gain, 0.5);
}

// --- Oracle curve ---------------------------------------------------------

TEST(OracleCurveTest, GrowsWithTheArcBudgetUpToTheHeadCount) {
  SyntheticTextConfig text;
  text.vocab_tokens = 20;
  text.num_sentences = 120;
  text.sentence_len = 9;
  text.seed = 7;
  const NgramModel model = MakeSyntheticModel(text, 3);
  NgramBaseLm base(&model);
  SimulatedDrafterConfig drafter_config;
  drafter_config.num_heads = 4;
  drafter_config.seed = 11;
  SimulatedDrafter drafter(&model, drafter_config);

  const int vocab = static_cast<int>(model.vocab().size());
  const std::vector<int> budgets = {1, 2, 4, 8, vocab};
  const OracleCurve curve =
      ComputeOracleCurve(base, drafter, Tokens{3, 4}, 120, budgets);
  EXPECT_EQ(curve.total_tokens, 120u);
  ASSERT_EQ(curve.points.size(), budgets.size());
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    EXPECT_EQ(curve.points[i].top_k, budgets[i]);
    EXPECT_DOUBLE_EQ(curve.points[i].block_efficiency,
                     120.0 / curve.points[i].serial_calls);
    if (i > 0) {
      EXPECT_GE(curve.points[i].block_efficiency,
                curve.points[i - 1].block_efficiency);
    }
  }
  // The drafter proposes every token with a finite score, so a vocab-wide
  // budget always contains the greedy token and every block fills.
  EXPECT_DOUBLE_EQ(curve.points.back().block_efficiency, 4.0);
  EXPECT_EQ(curve.points.back().serial_calls, 30u);

  const nlohmann::json json = nlohmann::json::parse(curve.ToJsonString());
  EXPECT_EQ(json.at("total_tokens").get<int>(), 120);
  EXPECT_EQ(json.at("points").size(), budgets.size());
  EXPECT_EQ(json.at("points").at(0).at("top_k").get<int>(), 1);
}

TEST(OracleCurveTest, RejectsBadArguments) {
  FixedHeadsDrafter drafter({{{0, 0.0}}});
  ZeroBase base;
  EXPECT_THROW(ComputeOracleCurve(base, drafter, Tokens{}, 0, {1}),
               InvalidInputError);
  EXPECT_THROW(ComputeOracleCurve(base, drafter, Tokens{}, 10, {}),
               InvalidInputError);
  EXPECT_THROW(ComputeOracleCurve(base, drafter, Tokens{}, 10, {1, 0}),
               InvalidInputError);
}

// --- Cost model -----------------------------------------------------------

TEST(ParameterIoTest, AmortizesWeightReadsOverAcceptedTokens) {
  DecodeReport report;
  report.total_tokens = 100;
  report.serial_calls = 40;
  CostModelConfig config;
  config.base_params = 7e9;
  config.draft_params = 1e9;
  config.bytes_per_param = 2.0;
  const CostModelResult result = ParameterIoPerToken(report, config);
  EXPECT_DOUBLE_EQ(result.params_read_per_token, 3.2e9);
  EXPECT_DOUBLE_EQ(result.bytes_read_per_token, 6.4e9);
  EXPECT_DOUBLE_EQ(result.io_speedup, 2.1875);

  const nlohmann::json json = nlohmann::json::parse(result.ToJsonString());
  EXPECT_EQ(json.at("io_speedup").get<double>(), 2.1875);
}

TEST(ParameterIoTest, FreeDraftHeadsSpeedUpByTheBlockEfficiency) {
  DecodeReport report;
  report.total_tokens = 100;
  report.serial_calls = 40;
  CostModelConfig config;
  config.base_params = 5e9;
  config.draft_params = 0.0;
  const CostModelResult result = ParameterIoPerToken(report, config);
  EXPECT_DOUBLE_EQ(result.io_speedup, 2.5);
  EXPECT_DOUBLE_EQ(result.params_read_per_token, 2e9);
  EXPECT_DOUBLE_EQ(result.bytes_read_per_token, 4e9);
}

TEST(ParameterIoTest, RejectsBadConfigsAndEmptyReports) {
  DecodeReport report;
  report.total_tokens = 10;
  report.serial_calls = 5;
  CostModelConfig config;
  config.base_params = 0.0;
  EXPECT_THROW(ParameterIoPerToken(report, config), InvalidInputError);
  config.base_params = kInf;
  EXPECT_THROW(ParameterIoPerToken(report, config), InvalidInputError);
  config.base_params = 1e9;
  config.draft_params = -1.0;
  EXPECT_THROW(ParameterIoPerToken(report, config), InvalidInputError);
  config.draft_params = 0.0;
  config.bytes_per_param = 0.0;
  EXPECT_THROW(ParameterIoPerToken(report, config), InvalidInputError);
  config.bytes_per_param = 2.0;
  report.total_tokens = 0;
  EXPECT_THROW(ParameterIoPerToken(report, config), InvalidInputError);
  report.total_tokens = 10;
  report.serial_calls = 0;
  EXPECT_THROW(ParameterIoPerToken(report, config), InvalidInputError);
}

// --- Line fit -------------------------------------------------------------

TEST(FitLineTest, RecoversAnExactLine) {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, 3.0, 5.0, 7.0};
  const LinearFit fit = FitLine(x, y);
  EXPECT_DOUBLE_EQ(fit.slope, 2.0);
  EXPECT_DOUBLE_EQ(fit.intercept, 1.0);
  EXPECT_DOUBLE_EQ(fit.r_squared, 1.0);
}

TEST(FitLineTest, MatchesTheHandComputedLeastSquares) {
  // x = {0,1,2}, y = {0,0,3}: slope 3/2, intercept -1/2, r^2 = 3/4.
  const std::vector<double> x = {0.0, 1.0, 2.0};
  const std::vector<double> y = {0.0, 0.0, 3.0};
  const LinearFit fit = FitLine(x, y);
  EXPECT_DOUBLE_EQ(fit.slope, 1.5);
  EXPECT_DOUBLE_EQ(fit.intercept, -0.5);
  EXPECT_DOUBLE_EQ(fit.r_squared, 0.75);
}

TEST(FitLineTest, ConstantTargetsFitPerfectlyFlat) {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> y = {4.0, 4.0, 4.0};
  const LinearFit fit = FitLine(x, y);
  EXPECT_DOUBLE_EQ(fit.slope, 0.0);
  EXPECT_DOUBLE_EQ(fit.intercept, 4.0);
  EXPECT_DOUBLE_EQ(fit.r_squared, 1.0);
}

TEST(FitLineTest, RejectsDegenerateInputs) {
  const std::vector<double> two = {1.0, 2.0};
  EXPECT_THROW(FitLine(std::vector<double>{1.0}, std::vector<double>{1.0}),
               InvalidInputError);
  EXPECT_THROW(FitLine(two, std::vector<double>{1.0}), InvalidInputError);
  EXPECT_THROW(FitLine(std::vector<double>{1.0, kNan}, two),
               InvalidInputError);
  EXPECT_THROW(FitLine(std::vector<double>{2.0, 2.0}, two),
               InvalidInputError);
}

}  // namespace
}  // namespace draftlat
