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
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "draftlat/analysis.h"
#include "draftlat/engine.h"
#include "draftlat/external_drafter.h"
#include "draftlat/ngram_model.h"
#include "draftlat/rescore_bench.h"
#include "draftlat/simulated_drafter.h"
#include "draftlat/vocab.h"
#include "gtest/gtest.h"
#include "nlohmann/json.hpp"

namespace draftlat {
namespace {

NgramModel TestModel(std::uint64_t seed = 7, int vocab_tokens = 20) {
  SyntheticTextConfig text;
  text.vocab_tokens = vocab_tokens;
  text.num_sentences = 120;
  text.sentence_len = 9;
  text.seed = seed;
  return MakeSyntheticModel(text, 3);
}

// Order-2 model whose greedy chain cycles b, </s>, a, b, </s>, ... after an
// `a`. Not normalized; these tests only exercise argmax mechanics.
NgramModel SentenceEndModel() {
  auto vocab = std::make_shared<Vocabulary>();
  const TokenId a = vocab->AddToken("a");
  const TokenId b = vocab->AddToken("b");
  NgramModel model(2, vocab);
  model.SetProb(Tokens{Vocabulary::kSentenceStartId}, kLog10Zero);
  model.SetProb(Tokens{Vocabulary::kSentenceEndId}, -5.0);
  model.SetProb(Tokens{Vocabulary::kUnknownId}, -10.0);
  model.SetProb(Tokens{a}, -0.3);
  model.SetProb(Tokens{b}, -0.4);
  model.SetProb(Tokens{a, b}, -0.05);
  model.SetBackoff(Tokens{a}, 0.0);
  model.SetProb(Tokens{b, Vocabulary::kSentenceEndId}, -0.02);
  model.SetBackoff(Tokens{b}, 0.0);
  model.Finalize();
  return model;
}

// Drafter with a planted head-1 argmax, for contract-violation tests.
class RiggedDrafter : public Drafter {
 public:
  RiggedDrafter(int num_heads, TokenId first_token)
      : num_heads_(num_heads), first_token_(first_token) {}

  int num_heads() const override { return num_heads_; }

  std::vector<std::vector<TokenLogit>> ProposeBlock(TokenSpan) override {
    std::vector<std::vector<TokenLogit>> heads(num_heads_);
    for (auto& head : heads) head = {{first_token_, 0.0}};
    return heads;
  }

 private:
  int num_heads_;
  TokenId first_token_;
};

class WrongArityDrafter : public Drafter {
 public:
  int num_heads() const override { return 4; }

  std::vector<std::vector<TokenLogit>> ProposeBlock(TokenSpan) override {
    return {{TokenLogit{3, 0.0}}};  // one head instead of four
  }
};

void CheckAccounting(const DecodeReport& report, int num_heads) {
  EXPECT_EQ(report.output.size(), report.total_tokens);
  EXPECT_EQ(report.steps.size(), report.serial_calls);
  ASSERT_EQ(report.accepted_histogram.size(),
            static_cast<std::size_t>(num_heads));
  std::uint64_t calls = 0;
  std::uint64_t tokens = 0;
  for (std::size_t j = 0; j < report.accepted_histogram.size(); ++j) {
    calls += report.accepted_histogram[j];
    tokens += report.accepted_histogram[j] * (j + 1);
  }
  EXPECT_EQ(calls, report.serial_calls);
  EXPECT_EQ(tokens, report.total_tokens);
  EXPECT_EQ(report.draft_calls, report.serial_calls);
  EXPECT_DOUBLE_EQ(report.block_efficiency,
                   static_cast<double>(report.total_tokens) /
                       static_cast<double>(report.serial_calls));
  EXPECT_GE(report.block_efficiency, 1.0);
  EXPECT_LE(report.block_efficiency, static_cast<double>(num_heads));
  std::uint64_t position = 0;
  for (const StepOutcome& step : report.steps) {
    EXPECT_EQ(step.position, position);
    EXPECT_GE(step.accepted, 1);
    EXPECT_LE(step.accepted, num_heads);
    EXPECT_GE(step.match_len, 0);
    EXPECT_LE(step.match_len, num_heads);
    position += step.accepted;
  }
  EXPECT_EQ(position, report.total_tokens);
}

// --- Base model plumbing -------------------------------------------------

TEST(NgramBaseLmTest, GreedyMatchesBruteForceArgmax) {
  const NgramModel model = TestModel();
  NgramBaseLm base(&model);
  const Tokens contexts[] = {{}, {3}, {3, 4}, {9, 5, 7}, {1}};
  for (const Tokens& context : contexts) {
    TokenId best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (TokenId w = 0; w < model.vocab().size(); ++w) {
      const double score = model.LogProb(context, w);
      if (score > best_score) {
        best = w;
        best_score = score;
      }
    }
    EXPECT_EQ(base.GreedyNext(context), best);
  }
  EXPECT_THROW(NgramBaseLm(nullptr), InvalidInputError);
  auto vocab = std::make_shared<Vocabulary>();
  NgramModel unfinalized(1, vocab);
  EXPECT_THROW({ NgramBaseLm rejected(&unfinalized); }, InvalidInputError);
}

TEST(DecodeModeTest, NamesRoundTrip) {
  for (const DecodeMode mode :
       {DecodeMode::kVanilla, DecodeMode::kLocal, DecodeMode::kNgram,
        DecodeMode::kPBest, DecodeMode::kOracle}) {
    EXPECT_EQ(ParseDecodeMode(DecodeModeName(mode)), mode);
  }
  EXPECT_THROW(ParseDecodeMode("speculative"), ConfigError);
}

TEST(DecodeConfigTest, ValidateRejectsEachBadField) {
  DecodeConfig config;
  config.max_tokens = 10;
  config.Validate(4);
  EXPECT_THROW(config.Validate(0), ConfigError);

  DecodeConfig bad = config;
  bad.max_tokens = 0;
  EXPECT_THROW(bad.Validate(4), ConfigError);
  bad = config;
  bad.top_k = 0;
  EXPECT_THROW(bad.Validate(4), ConfigError);
  bad = config;
  bad.alpha = -1.0;
  EXPECT_THROW(bad.Validate(4), ConfigError);
  bad.alpha = std::numeric_limits<double>::infinity();
  EXPECT_THROW(bad.Validate(4), ConfigError);
  bad = config;
  bad.num_candidates = 0;
  EXPECT_THROW(bad.Validate(4), ConfigError);
  bad = config;
  bad.mode = DecodeMode::kLocal;
  EXPECT_THROW(bad.Validate(4), ConfigError);
  bad.mode = DecodeMode::kNgram;
  EXPECT_THROW(bad.Validate(4), ConfigError);
  bad.mode = DecodeMode::kPBest;  // works without a model
  bad.Validate(4);
}

TEST(GreedyRolloutTest, ExtendsTheContextOneTokenAtATime) {
  const NgramModel model = TestModel();
  NgramBaseLm base(&model);
  const Tokens prompt = {3, 4};
  const Tokens rollout = GreedyRollout(base, prompt, 30);
  ASSERT_EQ(rollout.size(), 30u);
  Tokens context = prompt;
  for (const TokenId token : rollout) {
    EXPECT_EQ(token, base.GreedyNext(context));
    context.push_back(token);
  }
}

// --- The decode loop -----------------------------------------------------

class DecodeTest : public ::testing::Test {
 protected:
  DecodeTest()
      : model_(TestModel()),
        base_(&model_),
        drafter_(&model_, [] {
          SimulatedDrafterConfig config;
          config.num_heads = 4;
          config.seed = 11;
          return config;
        }()) {}

  DecodeConfig Config(DecodeMode mode, bool with_model) {
    DecodeConfig config;
    config.mode = mode;
    config.max_tokens = 120;
    config.top_k = 4;
    config.alpha = 0.8;
    config.num_candidates = 8;
    config.rescore_model = with_model ? &model_ : nullptr;
    return config;
  }

  NgramModel model_;
  NgramBaseLm base_;
  SimulatedDrafter drafter_;
  Tokens prompt_ = {3, 4};
};

TEST_F(DecodeTest, EveryModeReproducesTheGreedyRollout) {
  const Tokens reference = GreedyRollout(base_, prompt_, 120);
  const std::vector<std::pair<DecodeMode, bool>> cases = {
      {DecodeMode::kVanilla, false}, {DecodeMode::kLocal, true},
      {DecodeMode::kNgram, true},    {DecodeMode::kPBest, true},
      {DecodeMode::kPBest, false},   {DecodeMode::kOracle, false},
  };
  for (const auto& [mode, with_model] : cases) {
    SCOPED_TRACE(DecodeModeName(mode) +
                 (with_model ? " with model" : " without model"));
    const DecodeReport report =
        BpdDecode(base_, drafter_, prompt_, Config(mode, with_model));
    EXPECT_EQ(report.output, reference);
    EXPECT_EQ(report.total_tokens, 120u);
    EXPECT_EQ(report.mode, DecodeModeName(mode));
    CheckAccounting(report, 4);
  }
}

TEST_F(DecodeTest, UnrefinedDecodeEqualsTheOracleCurveAtBudgetOne) {
  const DecodeReport vanilla =
      BpdDecode(base_, drafter_, prompt_, Config(DecodeMode::kVanilla, false));
  const OracleCurve curve =
      ComputeOracleCurve(base_, drafter_, prompt_, 120, {1});
  ASSERT_EQ(curve.points.size(), 1u);
  EXPECT_EQ(curve.points[0].serial_calls, vanilla.serial_calls);
  EXPECT_DOUBLE_EQ(curve.points[0].block_efficiency,
                   vanilla.block_efficiency);
}

TEST_F(DecodeTest, OracleAcceptanceDominatesEveryMode) {
  const DecodeReport oracle =
      BpdDecode(base_, drafter_, prompt_, Config(DecodeMode::kOracle, false));
  for (const StepOutcome& step : oracle.steps) {
    EXPECT_GE(step.match_len, step.baseline_match_len);
  }
  for (const auto& [mode, with_model] :
       std::vector<std::pair<DecodeMode, bool>>{{DecodeMode::kVanilla, false},
                                                {DecodeMode::kLocal, true},
                                                {DecodeMode::kNgram, true},
                                                {DecodeMode::kPBest, true}}) {
    const DecodeReport report =
        BpdDecode(base_, drafter_, prompt_, Config(mode, with_model));
    EXPECT_GE(oracle.block_efficiency, report.block_efficiency)
        << DecodeModeName(mode);
  }
}

TEST_F(DecodeTest, CandidateSetNeverHurtsAcceptanceWithoutModel) {
  // Without a rescore model, the unrefined top path is always candidate 0,
  // so widening to p candidates can only match or beat it, call by call.
  const DecodeReport report =
      BpdDecode(base_, drafter_, prompt_, Config(DecodeMode::kPBest, false));
  for (const StepOutcome& step : report.steps) {
    EXPECT_GE(step.match_len, step.baseline_match_len);
  }
  const DecodeReport vanilla =
      BpdDecode(base_, drafter_, prompt_, Config(DecodeMode::kVanilla, false));
  EXPECT_GE(report.block_efficiency, vanilla.block_efficiency);
}

TEST_F(DecodeTest, VerificationWorkCountsSharedAndPerCandidatePositions) {
  for (const auto& [mode, with_model] :
       std::vector<std::pair<DecodeMode, bool>>{{DecodeMode::kVanilla, false},
                                                {DecodeMode::kLocal, true},
                                                {DecodeMode::kNgram, true},
                                                {DecodeMode::kOracle, false}}) {
    const DecodeReport report =
        BpdDecode(base_, drafter_, prompt_, Config(mode, with_model));
    EXPECT_EQ(report.verify_positions, report.serial_calls * 4)
        << DecodeModeName(mode);
  }
  // Eight candidates, four heads: 1 + 8 * 3 positions per call.
  const DecodeReport pbest =
      BpdDecode(base_, drafter_, prompt_, Config(DecodeMode::kPBest, false));
  EXPECT_EQ(pbest.verify_positions, pbest.serial_calls * (1 + 8 * 3));
}

TEST_F(DecodeTest, ReportSerializesWithSchemaAndOptionalSteps) {
  const DecodeReport report =
      BpdDecode(base_, drafter_, prompt_, Config(DecodeMode::kPBest, true));
  const nlohmann::json summary = nlohmann::json::parse(report.ToJsonString());
  EXPECT_EQ(summary.at("schema").get<int>(), 1);
  EXPECT_EQ(summary.at("mode").get<std::string>(), "pbest");
  EXPECT_EQ(summary.at("total_tokens").get<std::uint64_t>(),
            report.total_tokens);
  EXPECT_EQ(summary.at("serial_calls").get<std::uint64_t>(),
            report.serial_calls);
  EXPECT_EQ(summary.at("output").get<Tokens>(), report.output);
  EXPECT_FALSE(summary.contains("steps"));

  const nlohmann::json traced =
      nlohmann::json::parse(report.ToJsonString(true));
  ASSERT_TRUE(traced.contains("steps"));
  ASSERT_EQ(traced.at("steps").size(), report.steps.size());
  const nlohmann::json& first = traced.at("steps").at(0);
  EXPECT_EQ(first.at("position").get<std::uint64_t>(),
            report.steps[0].position);
  EXPECT_EQ(first.at("match_len").get<int>(), report.steps[0].match_len);
  EXPECT_EQ(first.at("accepted").get<int>(), report.steps[0].accepted);
  EXPECT_EQ(first.at("baseline_match_len").get<int>(),
            report.steps[0].baseline_match_len);
  EXPECT_EQ(first.at("chosen_candidate").get<int>(),
            report.steps[0].chosen_candidate);
}

TEST_F(DecodeTest, DrafterContractViolationsAreFatal) {
  // Head-1 argmax that cannot match any greedy token.
  RiggedDrafter rigged(4, 9999);
  DecodeConfig config = Config(DecodeMode::kVanilla, false);
  try {
    BpdDecode(base_, rigged, prompt_, config);
    FAIL() << "expected InvalidInputError";
  } catch (const InvalidInputError& e) {
    EXPECT_NE(std::string(e.what()).find("position"), std::string::npos);
  }

  WrongArityDrafter wrong_arity;
  EXPECT_THROW(BpdDecode(base_, wrong_arity, prompt_, config),
               InvalidInputError);
}

TEST_F(DecodeTest, ModesNeedingModelsRejectConfigsWithoutThem) {
  EXPECT_THROW(
      BpdDecode(base_, drafter_, prompt_, Config(DecodeMode::kLocal, false)),
      ConfigError);
  EXPECT_THROW(
      BpdDecode(base_, drafter_, prompt_, Config(DecodeMode::kNgram, false)),
      ConfigError);
  DecodeConfig zero = Config(DecodeMode::kVanilla, false);
  zero.max_tokens = 0;
  EXPECT_THROW(BpdDecode(base_, drafter_, prompt_, zero), ConfigError);
}

TEST(DecodeStopTest, SentenceEndStopsTheDecodeEarly) {
  const NgramModel model = SentenceEndModel();
  NgramBaseLm base(&model);
  SimulatedDrafterConfig drafter_config;
  drafter_config.num_heads = 4;
  SimulatedDrafter drafter(&model, drafter_config);

  DecodeConfig config;
  config.mode = DecodeMode::kVanilla;
  config.max_tokens = 10;
  config.stop_at_sentence_end = true;
  const Tokens prompt = {3};  // "a"
  const DecodeReport report = BpdDecode(base, drafter, prompt, config);
  // Greedy after "a" goes b, </s>, a, b, </s>, ...; the decode must stop
  // with the first sentence end as its final token.
  EXPECT_EQ(report.output, (Tokens{4, Vocabulary::kSentenceEndId}));
  EXPECT_EQ(report.total_tokens, 2u);

  config.stop_at_sentence_end = false;
  const DecodeReport full = BpdDecode(base, drafter, prompt, config);
  EXPECT_EQ(full.total_tokens, 10u);
  EXPECT_EQ(full.output, GreedyRollout(base, prompt, 10));
}

TEST(DecodeClipTest, FinalBlockIsClippedToTheTokenBudget) {
  const NgramModel model = TestModel(13);
  NgramBaseLm base(&model);
  SimulatedDrafterConfig drafter_config;
  drafter_config.num_heads = 4;
  drafter_config.seed = 13;
  SimulatedDrafter drafter(&model, drafter_config);

  DecodeConfig config;
  config.mode = DecodeMode::kOracle;
  config.max_tokens = 5;  // not a multiple of the head count
  const Tokens prompt = {3, 4};
  const DecodeReport report = BpdDecode(base, drafter, prompt, config);
  EXPECT_EQ(report.total_tokens, 5u);
  EXPECT_EQ(report.output, GreedyRollout(base, prompt, 5));
  CheckAccounting(report, 4);
}

TEST_F(DecodeTest, AlphaTuningTakesTheSmallestOfTiedAlphas) {
  // Without a rescore model the candidate ranking ignores alpha entirely, so
  // every alpha ties and the smallest must win.
  DecodeConfig config = Config(DecodeMode::kPBest, false);
  config.max_tokens = 40;
  const TuneAlphaResult result =
      TuneAlpha(base_, drafter_, prompt_, config, {1.5, 0.25, 3.0});
  EXPECT_EQ(result.best_alpha, 0.25);
  ASSERT_EQ(result.curve.size(), 3u);
  EXPECT_EQ(result.curve[0].first, 1.5);
  EXPECT_EQ(result.curve[1].first, 0.25);
  EXPECT_EQ(result.curve[2].first, 3.0);
  EXPECT_EQ(result.curve[0].second, result.curve[1].second);
  EXPECT_EQ(result.curve[1].second, result.curve[2].second);
  EXPECT_EQ(result.best_block_efficiency, result.curve[1].second);

  EXPECT_THROW(TuneAlpha(base_, drafter_, prompt_, config, {}),
               InvalidInputError);
}

// --- Simulated drafter ---------------------------------------------------

TEST(SimulatedDrafterTest, FillsTheDefaultDegradationProfile) {
  const NgramModel model = TestModel();
  SimulatedDrafterConfig config;
  config.num_heads = 5;
  SimulatedDrafter drafter(&model, config);
  const SimulatedDrafterConfig& filled = drafter.config();
  EXPECT_EQ(filled.context_window,
            (std::vector<int>{SimulatedDrafterConfig::kFullContext, 3, 2, 1,
                              1}));
  EXPECT_EQ(filled.temperature, (std::vector<double>{1, 1, 1, 1, 1}));
  EXPECT_EQ(filled.noise_sigma,
            (std::vector<double>{0.0, 0.1, 0.2, 0.30000000000000004, 0.4}));
}

TEST(SimulatedDrafterTest, HeadOneScoresTheModelExactly) {
  const NgramModel model = TestModel();
  NgramBaseLm base(&model);
  SimulatedDrafterConfig config;
  config.num_heads = 4;
  config.seed = 3;
  SimulatedDrafter drafter(&model, config);

  const Tokens context = {3, 4, 5};
  const std::vector<std::vector<TokenLogit>> heads =
      drafter.ProposeBlock(context);
  ASSERT_EQ(heads.size(), 4u);
  ASSERT_EQ(heads[0].size(), model.vocab().size());
  TokenId argmax = heads[0][0].token;
  double best = heads[0][0].logit;
  for (const TokenLogit& entry : heads[0]) {
    EXPECT_EQ(entry.logit, model.LogProb(context, entry.token));
    if (entry.logit > best) {
      best = entry.logit;
      argmax = entry.token;
    }
  }
  EXPECT_EQ(argmax, base.GreedyNext(context));
}

TEST(SimulatedDrafterTest, ProposalsAreDeterministic) {
  const NgramModel model = TestModel();
  SimulatedDrafterConfig config;
  config.num_heads = 4;
  config.seed = 19;
  SimulatedDrafter drafter(&model, config);
  SimulatedDrafter twin(&model, config);

  const Tokens context = {5, 3};
  const auto first = drafter.ProposeBlock(context);
  const auto again = drafter.ProposeBlock(context);
  const auto other = twin.ProposeBlock(context);
  EXPECT_EQ(first, again);
  EXPECT_EQ(first, other);

  SimulatedDrafterConfig reseeded = config;
  reseeded.seed = 20;
  SimulatedDrafter different(&model, reseeded);
  EXPECT_NE(first, different.ProposeBlock(context));
}

TEST(SimulatedDrafterTest, RejectsBrokenConfigs) {
  const NgramModel model = TestModel();
  SimulatedDrafterConfig config;
  config.num_heads = 0;
  EXPECT_THROW(SimulatedDrafter(&model, config), ConfigError);

  config.num_heads = 3;
  config.temperature = {1.0, 2.0};  // wrong length
  EXPECT_THROW(SimulatedDrafter(&model, config), ConfigError);

  config.temperature = {2.0, 2.0, 2.0};  // head 1 must be 1
  EXPECT_THROW(SimulatedDrafter(&model, config), ConfigError);

  config.temperature = {1.0, 3.0, 2.0};  // decreasing
  EXPECT_THROW(SimulatedDrafter(&model, config), ConfigError);

  config.temperature = {1.0, 1.0, 1.0};
  config.noise_sigma = {0.5, 0.5, 0.5};  // head 1 must be noiseless
  EXPECT_THROW(SimulatedDrafter(&model, config), ConfigError);

  config.noise_sigma = {0.0, -0.1, 0.1};  // negative
  EXPECT_THROW(SimulatedDrafter(&model, config), ConfigError);

  config.noise_sigma = {0.0, 0.1, 0.2};
  config.context_window = {2, 2, 2};  // head 1 must see everything
  EXPECT_THROW(SimulatedDrafter(&model, config), ConfigError);

  config.context_window = {SimulatedDrafterConfig::kFullContext, -7, 2};
  EXPECT_THROW(SimulatedDrafter(&model, config), ConfigError);

  config.context_window = {SimulatedDrafterConfig::kFullContext, 2, 0};
  SimulatedDrafter ok(&model, config);  // zero-width views are legal
  EXPECT_EQ(ok.num_heads(), 3);

  EXPECT_THROW(SimulatedDrafter(nullptr, SimulatedDrafterConfig{}),
               InvalidInputError);
  auto vocab = std::make_shared<Vocabulary>();
  NgramModel unfinalized(1, vocab);
  EXPECT_THROW(SimulatedDrafter(&unfinalized, SimulatedDrafterConfig{}),
               InvalidInputError);
}

TEST(SimulatedDrafterTest, DriftAndNoiseDegradeLaterHeads) {
  // With degradation on, the decode still reproduces greedy output but
  // later heads disagree with the continuation more often than head 1.
  const NgramModel model = TestModel(23);
  NgramBaseLm base(&model);
  SimulatedDrafterConfig config;
  config.num_heads = 4;
  config.seed = 23;
  config.noise_sigma = {0.0, 0.5, 1.0, 1.5};
  SimulatedDrafter drafter(&model, config);

  DecodeConfig decode;
  decode.mode = DecodeMode::kVanilla;
  decode.max_tokens = 80;
  const Tokens prompt = {3, 4};
  const DecodeReport report = BpdDecode(base, drafter, prompt, decode);
  EXPECT_EQ(report.output, GreedyRollout(base, prompt, 80));
  // Degradation must actually bite: not every call can accept a full block.
  EXPECT_LT(report.block_efficiency, 4.0);
}

// --- External drafter protocol -------------------------------------------

TEST(DraftProtocolTest, RequestRoundTrips) {
  const Tokens context = {3, 9, 4};
  const std::string line = EncodeDraftRequest(context, 6);
  Tokens decoded_context;
  int decoded_heads = 0;
  DecodeDraftRequest(line, &decoded_context, &decoded_heads);
  EXPECT_EQ(decoded_context, context);
  EXPECT_EQ(decoded_heads, 6);

  EXPECT_THROW(DecodeDraftRequest("garbage", &decoded_context, &decoded_heads),
               ParseError);
  EXPECT_THROW(DecodeDraftRequest("{\"context\": []}", &decoded_context,
                                  &decoded_heads),
               ParseError);
  EXPECT_THROW(DecodeDraftRequest("{\"context\": [], \"num_heads\": 0}",
                                  &decoded_context, &decoded_heads),
               ParseError);
}

TEST(DraftProtocolTest, ResponseRoundTripsExactly) {
  const std::vector<std::vector<TokenLogit>> heads = {
      {{3, 0.125}, {4, -2.75}},
      {{7, -0.1}},
  };
  EXPECT_EQ(DecodeDraftResponse(EncodeDraftResponse(heads)), heads);

  EXPECT_THROW(DecodeDraftResponse("nope"), ParseError);
  EXPECT_THROW(DecodeDraftResponse("{\"heads\": [[{\"token\": 3}]]}"),
               ParseError);
  try {
    DecodeDraftResponse(EncodeDraftError("model exploded"));
    FAIL() << "expected RescoreError";
  } catch (const RescoreError& e) {
    EXPECT_NE(std::string(e.what()).find("model exploded"), std::string::npos);
  }
}

TEST(ExternalDrafterTest, TalksToARealSubprocess) {
  // A drafter that answers every request with the same two heads.
  const std::string response =
      EncodeDraftResponse({{{3, 0.5}, {4, 0.25}}, {{4, 0.75}}});
  ExternalDrafter drafter(
      "while read line; do echo '" + response + "'; done", 2);
  EXPECT_EQ(drafter.num_heads(), 2);
  const Tokens context = {3};
  const auto heads = drafter.ProposeBlock(context);
  ASSERT_EQ(heads.size(), 2u);
  EXPECT_EQ(heads[0][0].token, 3u);
  EXPECT_EQ(heads[1][0].logit, 0.75);
  EXPECT_EQ(drafter.ProposeBlock(context), heads);
}

TEST(ExternalDrafterTest, ChildErrorsAndDeathsSurfaceAsExceptions) {
  const std::string error_line = EncodeDraftError("out of ideas");
  ExternalDrafter erroring(
      "while read line; do echo '" + error_line + "'; done", 2);
  EXPECT_THROW(erroring.ProposeBlock(Tokens{3}), RescoreError);

  ExternalDrafter wrong_arity(
      "while read line; do echo '" +
          EncodeDraftResponse({{{3, 0.5}}}) + "'; done",
      2);
  EXPECT_THROW(wrong_arity.ProposeBlock(Tokens{3}), ParseError);

  ExternalDrafter dead("exit 0", 2);
  EXPECT_THROW(dead.ProposeBlock(Tokens{3}), IoError);

  EXPECT_THROW(ExternalDrafter("true", 0), ConfigError);
}

}  // namespace
}  // namespace draftlat
