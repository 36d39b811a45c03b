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
// Command-line front end: train backoff n-gram models, run blockwise
// parallel decodes with optional rescoring, tune the rescoring weight,
// analyze decode behavior, benchmark the rescorer, and serve a simulated
// drafter to another process over the line-delimited JSON protocol.
//
// Exit codes: 0 success, 1 invariant or runtime failure, 2 usage error,
// 3 I/O or file-format error. The DRAFTLAT_LOG environment variable
// (debug|info|warn|error|off) controls diagnostics on stderr.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "draftlat/analysis.h"
#include "draftlat/arpa.h"
#include "draftlat/engine.h"
#include "draftlat/external_drafter.h"
#include "draftlat/katz.h"
#include "draftlat/logging.h"
#include "draftlat/ngram_counts.h"
#include "draftlat/ngram_model.h"
#include "draftlat/rescore_bench.h"
#include "draftlat/simulated_drafter.h"
#include "draftlat/types.h"
#include "draftlat/vocab.h"
#include "nlohmann/json.hpp"

namespace draftlat {
namespace {

using nlohmann::json;

constexpr char kVersion[] = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// --- Small parsing and I/O helpers ---------------------------------------

std::vector<std::string> SplitOn(const std::string& text, char separator) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream stream(text);
  while (std::getline(stream, part, separator)) parts.push_back(part);
  return parts;
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream stream(line);
  std::string word;
  while (stream >> word) words.push_back(word);
  return words;
}

std::vector<double> ParseDoubleList(const std::string& text,
                                    const std::string& flag) {
  std::vector<double> values;
  for (const std::string& part : SplitOn(text, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse '" + part + "' as a number");
    }
  }
  return values;
}

std::vector<int> ParseIntList(const std::string& text,
                              const std::string& flag) {
  std::vector<int> values;
  for (const std::string& part : SplitOn(text, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse '" + part + "' as an integer");
    }
  }
  return values;
}

// "2:2,3:4" -> {order: threshold}.
std::map<int, std::uint64_t> ParseMinCounts(const std::string& text) {
  std::map<int, std::uint64_t> thresholds;
  if (text.empty()) return thresholds;
  for (const std::string& part : SplitOn(text, ',')) {
    const std::vector<std::string> pieces = SplitOn(part, ':');
    if (pieces.size() != 2) {
      throw ConfigError("--min-count entries must look like ORDER:COUNT, got '" +
                        part + "'");
    }
    try {
      thresholds[std::stoi(pieces[0])] =
          static_cast<std::uint64_t>(std::stoull(pieces[1]));
    } catch (const std::exception&) {
      throw ConfigError("--min-count: cannot parse '" + part + "'");
    }
  }
  return thresholds;
}

void WriteOutput(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  out << content;
  if (!out) throw IoError("failed writing output file: " + path);
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// --- Prompt loading -------------------------------------------------------

struct PromptSet {
  std::vector<Tokens> prompts;
  std::uint64_t unknown_tokens = 0;
};

// Whitespace-tokenizes prompts against `vocab`; out-of-vocabulary words map
// to the unknown token and are tallied.
PromptSet LoadPrompts(const std::vector<std::string>& inline_prompts,
                      const std::string& prompts_file,
                      const Vocabulary& vocab) {
  std::vector<std::string> lines = inline_prompts;
  if (!prompts_file.empty()) {
    std::ifstream in(prompts_file);
    if (!in) throw IoError("cannot open prompts file: " + prompts_file);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  if (lines.empty()) lines.push_back("");  // decode from an empty context

  PromptSet set;
  for (const std::string& line : lines) {
    Tokens prompt;
    for (const std::string& word : SplitWhitespace(line)) {
      const TokenId id = vocab.FindOrUnknown(word);
      if (id == Vocabulary::kUnknownId && word != Vocabulary::kUnknown) {
        ++set.unknown_tokens;
      }
      prompt.push_back(id);
    }
    set.prompts.push_back(std::move(prompt));
  }
  if (set.unknown_tokens > 0) {
    DRAFTLAT_LOG_LINE(kWarning)
        << set.unknown_tokens
        << " prompt token(s) were not in the vocabulary and were mapped to "
        << Vocabulary::kUnknown;
  }
  return set;
}

// --- Drafter construction -------------------------------------------------

struct DrafterOptions {
  int heads = 4;
  std::uint64_t seed = 0;
  std::string temperatures;
  std::string windows;
  std::string sigmas;
  std::string command;

  void Register(CLI::App* cmd) {
    cmd->add_option("--heads", heads, "Number of draft heads")
        ->capture_default_str();
    cmd->add_option("-s,--seed", seed, "Seed for the simulated drafter noise")
        ->capture_default_str();
    cmd->add_option("--temperatures", temperatures,
                    "Per-head flattening temperatures, e.g. '1,1.5,2,2.5' "
                    "(head 1 must be 1)");
    cmd->add_option("--windows", windows,
                    "Per-head visible-context lengths, -1 for unlimited, "
                    "e.g. '-1,3,2,1'");
    cmd->add_option("--sigmas", sigmas,
                    "Per-head noise scales, e.g. '0,0.5,1,1.5' (head 1 must "
                    "be 0)");
    cmd->add_option("--drafter-cmd", command,
                    "Serve drafts from this shell command over stdin/stdout "
                    "instead of simulating them");
  }

  SimulatedDrafterConfig SimConfig() const {
    SimulatedDrafterConfig config;
    config.num_heads = heads;
    config.seed = seed;
    if (!temperatures.empty()) {
      config.temperature = ParseDoubleList(temperatures, "--temperatures");
    }
    if (!windows.empty()) {
      config.context_window = ParseIntList(windows, "--windows");
    }
    if (!sigmas.empty()) {
      config.noise_sigma = ParseDoubleList(sigmas, "--sigmas");
    }
    return config;
  }

  std::unique_ptr<Drafter> Make(const NgramModel* model) const {
    if (!command.empty()) {
      return std::make_unique<ExternalDrafter>(command, heads);
    }
    return std::make_unique<SimulatedDrafter>(model, SimConfig());
  }

  // Config echo with defaults filled in; builds a throwaway simulated
  // drafter rather than touching (or spawning) the one used for decoding.
  json ResolvedJson(const NgramModel* model) const {
    json config;
    config["heads"] = heads;
    if (!command.empty()) {
      config["kind"] = "external";
      config["command"] = command;
      return config;
    }
    config["kind"] = "simulated";
    config["seed"] = seed;
    const SimulatedDrafter resolved(model, SimConfig());
    config["context_window"] = resolved.config().context_window;
    config["temperature"] = resolved.config().temperature;
    config["noise_sigma"] = resolved.config().noise_sigma;
    return config;
  }
};

// --- Decode plumbing shared by decode, tune-alpha, and analyze ------------

struct DecodeOptions {
  std::string base_arpa;
  std::string rescore_arpa;
  std::string mode = "vanilla";
  std::uint64_t max_tokens = 256;
  int top_k = 4;
  double alpha = 1.0;
  int num_candidates = 16;
  bool condition_on_draft = false;
  bool stop_at_sentence_end = false;
  bool trace = false;
  int jobs = 1;
  std::vector<std::string> prompt_texts;
  std::string prompts_file;
  std::string out;
  DrafterOptions drafter;

  void RegisterModelAndPrompts(CLI::App* cmd) {
    cmd->add_option("--base-arpa", base_arpa,
                    "ARPA file of the base model the decode must reproduce")
        ->required();
    cmd->add_option("--prompt", prompt_texts,
                    "Inline prompt (whitespace-tokenized; repeatable)");
    cmd->add_option("--prompts-file", prompts_file,
                    "File with one prompt per line");
    cmd->add_option("-o,--out", out, "Write the JSON report here instead of "
                                     "stdout");
    drafter.Register(cmd);
  }

  void RegisterDecodeKnobs(CLI::App* cmd) {
    cmd->add_option("-m,--mode", mode,
                    "Refinement mode: vanilla|local|ngram|pbest|oracle")
        ->capture_default_str();
    cmd->add_option("--rescore-arpa", rescore_arpa,
                    "ARPA file of the rescoring model (required for "
                    "local/ngram, optional for pbest)");
    cmd->add_option("--max-tokens", max_tokens, "Tokens to decode per prompt")
        ->capture_default_str();
    cmd->add_option("-k,--top-k", top_k, "Lattice arcs kept per head")
        ->capture_default_str();
    cmd->add_option("-a,--alpha", alpha,
                    "Weight of the rescoring model against head logits")
        ->capture_default_str();
    cmd->add_option("-p,--num-candidates", num_candidates,
                    "Candidate drafts per call in pbest mode")
        ->capture_default_str();
    cmd->add_flag("--condition-on-draft", condition_on_draft,
                  "Condition local refinement on the unrefined draft instead "
                  "of its own choices");
    cmd->add_flag("--stop-at-sentence-end", stop_at_sentence_end,
                  "Stop decoding once the sentence-end token is emitted");
  }

  DecodeConfig Config(const NgramModel* rescore_model) const {
    DecodeConfig config;
    config.mode = ParseDecodeMode(mode);
    config.max_tokens = max_tokens;
    config.top_k = top_k;
    config.alpha = alpha;
    config.num_candidates = num_candidates;
    config.condition_on_rescored = !condition_on_draft;
    config.stop_at_sentence_end = stop_at_sentence_end;
    config.rescore_model = rescore_model;
    return config;
  }

  json ConfigJson(const DecodeConfig& config, json drafter_json,
                  std::size_t num_prompts) const {
    json resolved;
    resolved["mode"] = DecodeModeName(config.mode);
    resolved["max_tokens"] = config.max_tokens;
    resolved["top_k"] = config.top_k;
    resolved["alpha"] = config.alpha;
    resolved["num_candidates"] = config.num_candidates;
    resolved["condition_on_rescored"] = config.condition_on_rescored;
    resolved["stop_at_sentence_end"] = config.stop_at_sentence_end;
    resolved["base_arpa"] = base_arpa;
    resolved["rescore_arpa"] = rescore_arpa;
    resolved["prompts"] = num_prompts;
    resolved["jobs"] = jobs;
    resolved["drafter"] = std::move(drafter_json);
    return resolved;
  }
};

// Loads the optional rescoring model named by the options; empty optional
// when no path was given.
std::optional<NgramModel> LoadRescoreModel(const DecodeOptions& options) {
  std::optional<NgramModel> model;
  if (!options.rescore_arpa.empty()) {
    model.emplace(ReadArpaFile(options.rescore_arpa));
  }
  return model;
}

// Decodes every prompt, fanning out over `jobs` workers; the result vector
// is ordered by prompt index regardless of scheduling.
std::vector<DecodeReport> DecodeAll(const NgramModel& model,
                                    const DecodeOptions& options,
                                    const DecodeConfig& config,
                                    const std::vector<Tokens>& prompts) {
  std::vector<DecodeReport> reports(prompts.size());
  const int jobs =
      std::max(1, std::min(options.jobs, static_cast<int>(prompts.size())));
  if (jobs == 1) {
    NgramBaseLm base(&model);
    std::unique_ptr<Drafter> drafter = options.drafter.Make(&model);
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      reports[i] = BpdDecode(base, *drafter, prompts[i], config);
    }
    return reports;
  }
  if (!options.drafter.command.empty()) {
    throw ConfigError("--jobs > 1 cannot share one external drafter process; "
                      "use --jobs 1 with --drafter-cmd");
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::exception_ptr> failures(jobs);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        NgramBaseLm base(&model);
        std::unique_ptr<Drafter> drafter = options.drafter.Make(&model);
        while (true) {
          const std::size_t index = cursor.fetch_add(1);
          if (index >= prompts.size()) break;
          reports[index] = BpdDecode(base, *drafter, prompts[index], config);
        }
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (std::thread& worker : workers) worker.join();
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return reports;
}

// --- train-ngram ----------------------------------------------------------

struct TrainOptions {
  std::string corpus;
  int order = 3;
  std::string min_count;
  std::uint64_t max_ngrams = 0;  // 0 = unlimited
  std::string out;
};

int RunTrainNgram(const TrainOptions& options) {
  if (options.order < 1) throw ConfigError("--order must be >= 1");
  std::ifstream in(options.corpus);
  if (!in) throw IoError("cannot open corpus file: " + options.corpus);

  auto vocab = std::make_shared<Vocabulary>();
  NgramCounter counter(options.order, vocab.get());
  std::uint64_t lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    Tokens sentence;
    for (const std::string& word : SplitWhitespace(line)) {
      sentence.push_back(vocab->AddToken(word));
    }
    counter.AddSentence(sentence);
    ++lines;
  }
  if (lines == 0) throw InvalidInputError("corpus is empty: " + options.corpus);

  PruneConfig prune;
  prune.min_count = ParseMinCounts(options.min_count);
  if (options.max_ngrams > 0) prune.max_total_ngrams = options.max_ngrams;

  // EstimateKatz logs each warning as it happens; the list is only echoed
  // into the summary here.
  std::vector<std::string> warnings;
  const NgramModel model =
      EstimateKatz(counter.table(), vocab, prune, &warnings);
  WriteArpaFile(model, options.out);

  json summary;
  summary["schema"] = 1;
  summary["command"] = "train-ngram";
  summary["corpus"] = options.corpus;
  summary["sentences"] = lines;
  summary["order"] = options.order;
  summary["vocab_size"] = vocab->size();
  json per_order = json::array();
  for (int m = 1; m <= options.order; ++m) per_order.push_back(model.NgramCount(m));
  summary["ngrams"] = std::move(per_order);
  summary["warnings"] = warnings;
  summary["out"] = options.out;
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// --- decode ---------------------------------------------------------------

int RunDecode(const DecodeOptions& options) {
  const NgramModel model = ReadArpaFile(options.base_arpa);
  const std::optional<NgramModel> rescore = LoadRescoreModel(options);
  const DecodeConfig config =
      options.Config(rescore ? &*rescore : nullptr);
  config.Validate(options.drafter.heads);
  const PromptSet prompt_set = LoadPrompts(
      options.prompt_texts, options.prompts_file, model.vocab());

  const std::vector<DecodeReport> reports =
      DecodeAll(model, options, config, prompt_set.prompts);

  // Post-run invariants: the emitted stream must equal the base model's own
  // greedy rollout, and block efficiency must stay within [1, h].
  bool fidelity_ok = true;
  NgramBaseLm checker(&model);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const DecodeReport& report = reports[i];
    if (report.output !=
        GreedyRollout(checker, prompt_set.prompts[i], report.total_tokens)) {
      fidelity_ok = false;
      DRAFTLAT_LOG_LINE(kError)
          << "prompt " << i << ": output diverged from the greedy rollout";
    }
    if (report.block_efficiency < 1.0 ||
        report.block_efficiency > options.drafter.heads) {
      fidelity_ok = false;
      DRAFTLAT_LOG_LINE(kError)
          << "prompt " << i << ": block efficiency "
          << report.block_efficiency << " outside [1, "
          << options.drafter.heads << "]";
    }
  }

  std::uint64_t total_tokens = 0;
  std::uint64_t serial_calls = 0;
  json report_array = json::array();
  for (const DecodeReport& report : reports) {
    total_tokens += report.total_tokens;
    serial_calls += report.serial_calls;
    report_array.push_back(json::parse(report.ToJsonString(options.trace)));
  }

  json out;
  out["schema"] = 1;
  out["command"] = "decode";
  out["config"] = options.ConfigJson(
      config, options.drafter.ResolvedJson(&model), prompt_set.prompts.size());
  out["unknown_tokens"] = prompt_set.unknown_tokens;
  out["fidelity_ok"] = fidelity_ok;
  out["reports"] = std::move(report_array);
  out["aggregate"] = {
      {"total_tokens", total_tokens},
      {"serial_calls", serial_calls},
      {"block_efficiency",
       serial_calls == 0
           ? 0.0
           : static_cast<double>(total_tokens) /
                 static_cast<double>(serial_calls)},
  };
  WriteOutput(options.out, out.dump(2) + "\n");
  return fidelity_ok ? kExitOk : kExitInvariant;
}

// --- tune-alpha -----------------------------------------------------------

int RunTuneAlpha(const DecodeOptions& options, const std::string& grid_text) {
  const std::vector<double> grid = ParseDoubleList(grid_text, "--grid");
  if (grid.empty()) throw ConfigError("--grid must name at least one alpha");

  const NgramModel model = ReadArpaFile(options.base_arpa);
  const std::optional<NgramModel> rescore = LoadRescoreModel(options);
  const PromptSet prompt_set = LoadPrompts(
      options.prompt_texts, options.prompts_file, model.vocab());

  NgramBaseLm base(&model);
  std::unique_ptr<Drafter> drafter = options.drafter.Make(&model);

  double best_alpha = 0.0;
  double best_efficiency = 0.0;
  bool first = true;
  json curve = json::array();
  for (const double alpha : grid) {
    DecodeOptions point = options;
    point.alpha = alpha;
    const DecodeConfig config =
        point.Config(rescore ? &*rescore : nullptr);
    config.Validate(options.drafter.heads);
    std::uint64_t tokens = 0;
    std::uint64_t calls = 0;
    for (const Tokens& prompt : prompt_set.prompts) {
      const DecodeReport report = BpdDecode(base, *drafter, prompt, config);
      tokens += report.total_tokens;
      calls += report.serial_calls;
    }
    const double efficiency =
        static_cast<double>(tokens) / static_cast<double>(calls);
    curve.push_back({{"alpha", alpha},
                     {"block_efficiency", efficiency},
                     {"total_tokens", tokens},
                     {"serial_calls", calls}});
    // Exact ties go to the smallest alpha, matching the library tuner.
    if (first || efficiency > best_efficiency ||
        (efficiency == best_efficiency && alpha < best_alpha)) {
      best_alpha = alpha;
      best_efficiency = efficiency;
      first = false;
    }
  }

  json out;
  out["schema"] = 1;
  out["command"] = "tune-alpha";
  out["config"] = options.ConfigJson(
      options.Config(rescore ? &*rescore : nullptr),
      options.drafter.ResolvedJson(&model), prompt_set.prompts.size());
  out["grid"] = grid;
  out["curve"] = std::move(curve);
  out["best_alpha"] = best_alpha;
  out["best_block_efficiency"] = best_efficiency;
  WriteOutput(options.out, out.dump(2) + "\n");
  return kExitOk;
}

// --- analyze --------------------------------------------------------------

// Pulls one decode report object out of a report file: either the file is a
// bare report, or it is a decode summary holding a "reports" array.
json ExtractReport(const json& file, int index) {
  if (file.contains("output") || file.contains("steps")) return file;
  if (file.contains("reports")) {
    const auto& array = file.at("reports");
    if (index < 0 || static_cast<std::size_t>(index) >= array.size()) {
      throw ParseError("report index " + std::to_string(index) +
                       " out of range; file holds " +
                       std::to_string(array.size()) + " report(s)");
    }
    return array.at(index);
  }
  throw ParseError("file holds neither a decode report nor a report array");
}

// Longest strictly increasing prefix of the per-head mean entropies.
int LongestIncreasingPrefix(const std::vector<double>& mean) {
  int length = mean.empty() ? 0 : 1;
  for (std::size_t j = 1; j < mean.size(); ++j) {
    if (!(mean[j] > mean[j - 1])) break;
    length = static_cast<int>(j) + 1;
  }
  return length;
}

int RunAnalyzeEntropy(const DecodeOptions& options, int blocks,
                      double bin_width, const std::string& format) {
  const NgramModel model = ReadArpaFile(options.base_arpa);
  const PromptSet prompt_set = LoadPrompts(
      options.prompt_texts, options.prompts_file, model.vocab());
  NgramBaseLm base(&model);
  std::unique_ptr<Drafter> drafter = options.drafter.Make(&model);
  const HeadEntropyProfile profile = ProfileHeadEntropy(
      base, *drafter, prompt_set.prompts.front(), blocks, bin_width);

  if (format == "csv") {
    std::ostringstream csv;
    csv << "head,bin_lo,bin_hi,count,fraction\n";
    for (std::size_t head = 0; head < profile.histograms.size(); ++head) {
      const EntropyHistogram& histogram = profile.histograms[head];
      for (std::size_t bin = 0; bin < histogram.counts.size(); ++bin) {
        csv << (head + 1) << ',' << bin * histogram.bin_width << ','
            << (bin + 1) * histogram.bin_width << ','
            << histogram.counts[bin] << ','
            << static_cast<double>(histogram.counts[bin]) / profile.blocks
            << '\n';
      }
    }
    WriteOutput(options.out, csv.str());
    return kExitOk;
  }

  json out = json::parse(profile.ToJsonString());
  out["schema"] = 1;
  out["command"] = "analyze entropy";
  out["increasing_head_prefix"] = LongestIncreasingPrefix(profile.mean);
  out["drafter"] = options.drafter.ResolvedJson(&model);
  WriteOutput(options.out, out.dump(2) + "\n");
  return kExitOk;
}

int RunAnalyzeRepetition(const std::string& tokens_text,
                         const std::string& report_path, int report_index,
                         int ngram_length, const std::string& out_path) {
  Tokens tokens;
  if (!tokens_text.empty()) {
    // Words are interned by first occurrence; repetition only needs
    // equality, not a model vocabulary.
    std::map<std::string, TokenId> interned;
    for (const std::string& word : SplitWhitespace(tokens_text)) {
      const auto [it, unused] = interned.emplace(
          word, static_cast<TokenId>(interned.size()));
      tokens.push_back(it->second);
    }
  } else if (!report_path.empty()) {
    const json report = ExtractReport(ReadJsonFile(report_path), report_index);
    if (!report.contains("output")) {
      throw ParseError(report_path + ": report has no output tokens");
    }
    tokens = report.at("output").get<Tokens>();
  } else {
    throw ConfigError("pass --tokens or --report");
  }

  const RepetitionStats stats = ComputeRepetition(tokens, ngram_length);
  json out = json::parse(stats.ToJsonString());
  out["schema"] = 1;
  out["command"] = "analyze repetition";
  out["tokens"] = tokens.size();
  WriteOutput(out_path, out.dump(2) + "\n");
  return kExitOk;
}

int RunAnalyzeWinloss(const std::string& report_path, int report_index,
                      const std::string& out_path) {
  const json report_json =
      ExtractReport(ReadJsonFile(report_path), report_index);
  if (!report_json.contains("steps")) {
    throw ParseError(report_path +
                     ": report has no step records; decode with --trace");
  }
  DecodeReport report;
  try {
    for (const json& step : report_json.at("steps")) {
      StepOutcome outcome;
      outcome.match_len = step.at("match_len").get<int>();
      outcome.baseline_match_len = step.at("baseline_match_len").get<int>();
      report.steps.push_back(outcome);
    }
  } catch (const json::exception& e) {
    throw ParseError(report_path + ": malformed step record: " + e.what());
  }

  const WinLossStats stats = ComputeWinLoss(report);
  json out = json::parse(stats.ToJsonString());
  out["schema"] = 1;
  out["command"] = "analyze winloss";
  WriteOutput(out_path, out.dump(2) + "\n");
  return kExitOk;
}

int RunAnalyzeOracleCurve(const DecodeOptions& options,
                          const std::string& top_ks_text,
                          const std::string& format) {
  const std::vector<int> top_ks = ParseIntList(top_ks_text, "--top-ks");
  const NgramModel model = ReadArpaFile(options.base_arpa);
  const PromptSet prompt_set = LoadPrompts(
      options.prompt_texts, options.prompts_file, model.vocab());
  NgramBaseLm base(&model);
  std::unique_ptr<Drafter> drafter = options.drafter.Make(&model);
  const OracleCurve curve =
      ComputeOracleCurve(base, *drafter, prompt_set.prompts.front(),
                         options.max_tokens, top_ks);

  if (format == "csv") {
    std::ostringstream csv;
    csv << "top_k,block_efficiency,serial_calls\n";
    for (const OracleCurvePoint& point : curve.points) {
      csv << point.top_k << ',' << point.block_efficiency << ','
          << point.serial_calls << '\n';
    }
    WriteOutput(options.out, csv.str());
    return kExitOk;
  }

  json out = json::parse(curve.ToJsonString());
  out["schema"] = 1;
  out["command"] = "analyze oracle-curve";
  out["drafter"] = options.drafter.ResolvedJson(&model);
  WriteOutput(options.out, out.dump(2) + "\n");
  return kExitOk;
}

int RunAnalyzeCostModel(double base_params, double draft_params,
                        double bytes_per_param, double block_efficiency,
                        const std::string& report_path, int report_index,
                        const std::string& out_path) {
  DecodeReport report;
  if (!report_path.empty()) {
    const json file = ExtractReport(ReadJsonFile(report_path), report_index);
    try {
      report.total_tokens = file.at("total_tokens").get<std::uint64_t>();
      report.serial_calls = file.at("serial_calls").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw ParseError(report_path + ": " + e.what());
    }
  } else if (block_efficiency > 0.0) {
    // Scale an exact ratio out of the given efficiency; six decimal places
    // survive the scaling exactly.
    report.serial_calls = 1'000'000;
    report.total_tokens =
        static_cast<std::uint64_t>(std::llround(block_efficiency * 1e6));
  } else {
    throw ConfigError("pass --report or --block-efficiency");
  }

  CostModelConfig config;
  config.base_params = base_params;
  config.draft_params = draft_params;
  config.bytes_per_param = bytes_per_param;
  const CostModelResult result = ParameterIoPerToken(report, config);

  json out = json::parse(result.ToJsonString());
  out["schema"] = 1;
  out["command"] = "analyze cost-model";
  out["block_efficiency"] = static_cast<double>(report.total_tokens) /
                            static_cast<double>(report.serial_calls);
  out["gigabytes_read_per_token"] = result.bytes_read_per_token / 1e9;
  WriteOutput(out_path, out.dump(2) + "\n");
  return kExitOk;
}

// --- bench ----------------------------------------------------------------

struct BenchOptions {
  std::string steps_grid = "8";
  std::string arcs_grid = "16";
  std::string p_grid = "16";
  int order = 4;
  double alpha = 0.5;
  int runs = 30;
  int warmup = 3;
  std::uint64_t seed = 0;
  int vocab_tokens = 50;
  int sentences = 400;
  std::string out;
};

int RunBench(const BenchOptions& options) {
  const std::vector<int> steps = ParseIntList(options.steps_grid, "--steps-grid");
  const std::vector<int> arcs = ParseIntList(options.arcs_grid, "--arcs-grid");
  const std::vector<int> candidates = ParseIntList(options.p_grid, "--p-grid");

  std::ostringstream csv;
  csv << RescoreBenchCsvHeader() << '\n';
  for (const int num_steps : steps) {
    for (const int arcs_per_step : arcs) {
      for (const int num_candidates : candidates) {
        RescoreBenchConfig config;
        config.num_steps = num_steps;
        config.arcs_per_step = arcs_per_step;
        config.num_candidates = num_candidates;
        config.model_order = options.order;
        config.alpha = options.alpha;
        config.runs = options.runs;
        config.warmup = options.warmup;
        config.text.vocab_tokens = options.vocab_tokens;
        config.text.num_sentences = options.sentences;
        config.text.seed = options.seed;
        const RescoreBenchResult result = RunRescoreBench(config);
        csv << result.ToCsvRow() << '\n';
      }
    }
  }
  WriteOutput(options.out, csv.str());
  return kExitOk;
}

// --- serve-drafter --------------------------------------------------------

struct ServeOptions {
  std::string arpa;
  DrafterOptions drafter;
};

int RunServeDrafter(const ServeOptions& options) {
  if (!options.drafter.command.empty()) {
    throw ConfigError("serve-drafter simulates drafts itself; "
                      "--drafter-cmd does not apply");
  }
  const NgramModel model = ReadArpaFile(options.arpa);
  SimulatedDrafter drafter(&model, options.drafter.SimConfig());
  std::string line;
  while (std::getline(std::cin, line)) {
    std::string response;
    try {
      Tokens context;
      int requested_heads = 0;
      DecodeDraftRequest(line, &context, &requested_heads);
      if (requested_heads != drafter.num_heads()) {
        response = EncodeDraftError(
            "serving " + std::to_string(drafter.num_heads()) +
            " heads, request asked for " + std::to_string(requested_heads));
      } else {
        response = EncodeDraftResponse(drafter.ProposeBlock(context));
      }
    } catch (const Error& e) {
      response = EncodeDraftError(e.what());
    }
    std::cout << response << '\n' << std::flush;
  }
  return kExitOk;
}

// --- main -----------------------------------------------------------------

int Run(int argc, char** argv) {
  CLI::App app{
      "Blockwise parallel decoding with draft lattices and n-gram "
      "rescoring"};
  app.set_version_flag("--version", std::string("draftlat ") + kVersion);
  app.require_subcommand(1);

  // train-ngram
  TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand(
      "train-ngram", "Estimate a backoff n-gram model and write it as ARPA");
  train_cmd->add_option("-c,--corpus", train.corpus,
                        "Training text, one sentence per line")
      ->required();
  train_cmd->add_option("-n,--order", train.order, "Model order")
      ->capture_default_str();
  train_cmd->add_option("--min-count", train.min_count,
                        "Per-order count thresholds, e.g. '2:2,3:4'");
  train_cmd->add_option("--max-ngrams", train.max_ngrams,
                        "Cap on total stored entries (0 = unlimited)");
  train_cmd->add_option("-o,--out", train.out, "ARPA output path")->required();

  // decode
  DecodeOptions decode;
  CLI::App* decode_cmd = app.add_subcommand(
      "decode", "Run a blockwise parallel decode and report its efficiency");
  decode.RegisterModelAndPrompts(decode_cmd);
  decode.RegisterDecodeKnobs(decode_cmd);
  decode_cmd->add_flag("--trace", decode.trace,
                       "Include per-call step records in the report");
  decode_cmd->add_option("-j,--jobs", decode.jobs,
                         "Decode prompts on this many threads")
      ->capture_default_str();

  // tune-alpha
  DecodeOptions tune;
  std::string tune_grid;
  CLI::App* tune_cmd = app.add_subcommand(
      "tune-alpha",
      "Pick the rescoring weight with the best block efficiency");
  tune.RegisterModelAndPrompts(tune_cmd);
  tune.RegisterDecodeKnobs(tune_cmd);
  tune_cmd->add_option("--grid", tune_grid, "Alphas to try, e.g. '0.5,1,2'")
      ->required();

  // analyze
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Measurements around decodes and drafts");
  analyze_cmd->require_subcommand(1);

  DecodeOptions entropy;
  int entropy_blocks = 250;
  double entropy_bin_width = 0.5;
  std::string entropy_format = "json";
  CLI::App* entropy_cmd = analyze_cmd->add_subcommand(
      "entropy", "Per-head proposal entropy along the greedy rollout");
  entropy.RegisterModelAndPrompts(entropy_cmd);
  entropy_cmd->add_option("--blocks", entropy_blocks, "Blocks to profile")
      ->capture_default_str();
  entropy_cmd->add_option("--bin-width", entropy_bin_width,
                          "Histogram bin width in nats")
      ->capture_default_str();
  entropy_cmd->add_option("--format", entropy_format, "json or csv")
      ->capture_default_str();

  std::string repetition_tokens;
  std::string repetition_report;
  int repetition_index = 0;
  int repetition_ngram = 2;
  std::string repetition_out;
  CLI::App* repetition_cmd = analyze_cmd->add_subcommand(
      "repetition", "Window and adjacent-pair repetition of a token stream");
  repetition_cmd->add_option("--tokens", repetition_tokens,
                             "Inline whitespace-separated tokens");
  repetition_cmd->add_option("--report", repetition_report,
                             "Decode report JSON to read tokens from");
  repetition_cmd->add_option("--report-index", repetition_index,
                             "Which report in a multi-prompt file")
      ->capture_default_str();
  repetition_cmd->add_option("--ngram-length", repetition_ngram,
                             "Window length for distinct-window stats")
      ->capture_default_str();
  repetition_cmd->add_option("-o,--out", repetition_out, "Output path");

  std::string winloss_report;
  int winloss_index = 0;
  std::string winloss_out;
  CLI::App* winloss_cmd = analyze_cmd->add_subcommand(
      "winloss", "Per-call accept comparison of refined vs. unrefined");
  winloss_cmd->add_option("--report", winloss_report,
                          "Decode report JSON with step records (--trace)")
      ->required();
  winloss_cmd->add_option("--report-index", winloss_index,
                          "Which report in a multi-prompt file")
      ->capture_default_str();
  winloss_cmd->add_option("-o,--out", winloss_out, "Output path");

  DecodeOptions curve;
  curve.max_tokens = 5000;
  std::string curve_top_ks = "1,2,4,8,16";
  std::string curve_format = "json";
  CLI::App* curve_cmd = analyze_cmd->add_subcommand(
      "oracle-curve", "Oracle block efficiency as the arc budget grows");
  curve.RegisterModelAndPrompts(curve_cmd);
  curve_cmd->add_option("--max-tokens", curve.max_tokens,
                        "Tokens in the synthetic decode")
      ->capture_default_str();
  curve_cmd->add_option("--top-ks", curve_top_ks, "Arc budgets to evaluate")
      ->capture_default_str();
  curve_cmd->add_option("--format", curve_format, "json or csv")
      ->capture_default_str();

  double cost_params = 0.0;
  double cost_draft_params = 0.0;
  double cost_bytes = 2.0;
  double cost_efficiency = 0.0;
  std::string cost_report;
  int cost_index = 0;
  std::string cost_out;
  CLI::App* cost_cmd = analyze_cmd->add_subcommand(
      "cost-model", "Parameter I/O per decoded token");
  cost_cmd->add_option("--params", cost_params, "Base model parameter count")
      ->required();
  cost_cmd->add_option("--draft-params", cost_draft_params,
                       "Draft-head parameter count")
      ->capture_default_str();
  cost_cmd->add_option("--bytes", cost_bytes, "Bytes per parameter")
      ->capture_default_str();
  cost_cmd->add_option("--block-efficiency", cost_efficiency,
                       "Evaluate at this block efficiency");
  cost_cmd->add_option("--report", cost_report,
                       "Or read tokens/calls from this decode report");
  cost_cmd->add_option("--report-index", cost_index,
                       "Which report in a multi-prompt file")
      ->capture_default_str();
  cost_cmd->add_option("-o,--out", cost_out, "Output path");

  // bench
  BenchOptions bench;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "Time p-best rescoring over lattice and candidate grids");
  bench_cmd->add_option("--steps-grid", bench.steps_grid, "Lattice depths")
      ->capture_default_str();
  bench_cmd->add_option("--arcs-grid", bench.arcs_grid, "Arcs per step")
      ->capture_default_str();
  bench_cmd->add_option("--p-grid", bench.p_grid, "Candidate counts")
      ->capture_default_str();
  bench_cmd->add_option("-n,--order", bench.order, "Rescoring model order")
      ->capture_default_str();
  bench_cmd->add_option("-a,--alpha", bench.alpha, "Rescoring weight")
      ->capture_default_str();
  bench_cmd->add_option("--runs", bench.runs, "Timed runs per cell")
      ->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup, "Untimed warm-up runs")
      ->capture_default_str();
  bench_cmd->add_option("-s,--seed", bench.seed, "Synthetic text seed")
      ->capture_default_str();
  bench_cmd->add_option("--vocab-tokens", bench.vocab_tokens,
                        "Synthetic vocabulary size")
      ->capture_default_str();
  bench_cmd->add_option("--sentences", bench.sentences,
                        "Synthetic corpus sentences")
      ->capture_default_str();
  bench_cmd->add_option("-o,--out", bench.out, "CSV output path");

  // serve-drafter
  ServeOptions serve;
  CLI::App* serve_cmd = app.add_subcommand(
      "serve-drafter",
      "Answer draft requests on stdin with simulated proposals on stdout");
  serve_cmd->add_option("--arpa", serve.arpa, "Model the drafter simulates")
      ->required();
  serve.drafter.Register(serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return RunTrainNgram(train);
    if (decode_cmd->parsed()) return RunDecode(decode);
    if (tune_cmd->parsed()) return RunTuneAlpha(tune, tune_grid);
    if (entropy_cmd->parsed()) {
      return RunAnalyzeEntropy(entropy, entropy_blocks, entropy_bin_width,
                               entropy_format);
    }
    if (repetition_cmd->parsed()) {
      return RunAnalyzeRepetition(repetition_tokens, repetition_report,
                                  repetition_index, repetition_ngram,
                                  repetition_out);
    }
    if (winloss_cmd->parsed()) {
      return RunAnalyzeWinloss(winloss_report, winloss_index, winloss_out);
    }
    if (curve_cmd->parsed()) {
      return RunAnalyzeOracleCurve(curve, curve_top_ks, curve_format);
    }
    if (cost_cmd->parsed()) {
      return RunAnalyzeCostModel(cost_params, cost_draft_params, cost_bytes,
                                 cost_efficiency, cost_report, cost_index,
                                 cost_out);
    }
    if (bench_cmd->parsed()) return RunBench(bench);
    if (serve_cmd->parsed()) return RunServeDrafter(serve);
    throw InternalError("no subcommand dispatched");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  }
}

}  // namespace
}  // namespace draftlat

int main(int argc, char** argv) { return draftlat::Run(argc, argv); }
