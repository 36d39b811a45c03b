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

#include "draftlat/katz.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "draftlat/logging.h"

namespace draftlat {
namespace {

using KeyCount = std::pair<NgramKey, std::uint64_t>;

void Warn(std::vector<std::string>* warnings, std::string message) {
  DRAFTLAT_LOG_LINE(kWarning) << message;
  if (warnings != nullptr) warnings->push_back(std::move(message));
}

// Discount factor applied to an occurrence count, per order.
struct Discounter {
  bool absolute = false;
  // Good-Turing coefficients for counts 1..kGoodTuringMaxCount.
  std::array<double, kGoodTuringMaxCount> coeff = {1, 1, 1, 1, 1};

  double Factor(std::uint64_t count) const {
    if (absolute) {
      return (static_cast<double>(count) - kAbsoluteDiscount) /
             static_cast<double>(count);
    }
    if (count > static_cast<std::uint64_t>(kGoodTuringMaxCount)) return 1.0;
    return coeff[count - 1];
  }
};

// Derives the Good-Turing coefficients from count-of-count statistics
// (counts_of[r] = number of distinct grams seen exactly r times, indexed
// 1..kGoodTuringMaxCount + 1). Falls back to absolute discounting when any
// required coefficient is outside (0, 1].
Discounter MakeDiscounter(const std::array<std::uint64_t,
                                           kGoodTuringMaxCount + 2>& counts_of,
                          int order, std::vector<std::string>* warnings) {
  Discounter d;
  const double n1 = static_cast<double>(counts_of[1]);
  bool valid = counts_of[1] > 0;
  double slope = 0.0;
  if (valid) {
    slope = (kGoodTuringMaxCount + 1) *
            static_cast<double>(counts_of[kGoodTuringMaxCount + 1]) / n1;
    valid = slope < 1.0;
  }
  if (valid) {
    for (int r = 1; r <= kGoodTuringMaxCount; ++r) {
      if (counts_of[r] == 0) continue;  // unused coefficient
      const double adjusted = (r + 1) *
                              static_cast<double>(counts_of[r + 1]) /
                              (r * static_cast<double>(counts_of[r]));
      const double c = (adjusted - slope) / (1.0 - slope);
      if (c <= 0.0 || c > 1.0 + 1e-12) {
        valid = false;
        break;
      }
      d.coeff[r - 1] = std::min(c, 1.0);
    }
  }
  if (!valid) {
    d.absolute = true;
    Warn(warnings, "order " + std::to_string(order) +
                       ": Good-Turing discounts undefined for these counts; "
                       "falling back to absolute discounting D=" +
                       std::to_string(kAbsoluteDiscount));
  }
  return d;
}

// Back-off probability lookup over a model still under construction (probes
// the gram maps directly; the state index does not exist yet).
double RawLog10Prob(const NgramModel& model, TokenSpan context, TokenId word) {
  const std::size_t window =
      std::min<std::size_t>(context.size(), model.order() - 1);
  double backoff = 0.0;
  for (std::size_t len = window; len > 0; --len) {
    Tokens probe(context.end() - len, context.end());
    probe.push_back(word);
    if (const NgramModel::Entry* e = model.Find(probe)) {
      return e->log10_prob + backoff;
    }
    probe.pop_back();
    if (const NgramModel::Entry* c = model.Find(probe)) {
      if (c->has_bow) backoff += c->log10_bow;
    }
  }
  if (const NgramModel::Entry* e = model.Find(Tokens{word})) {
    return e->log10_prob + backoff;
  }
  const NgramModel::Entry* unk =
      model.Find(Tokens{model.vocab().unknown()});
  return (unk != nullptr ? unk->log10_prob : kLog10Zero * 10) + backoff;
}

}  // namespace

NgramModel EstimateKatz(const CountTable& counts,
                        std::shared_ptr<const Vocabulary> vocab,
                        const PruneConfig& prune,
                        std::vector<std::string>* warnings) {
  const int order = counts.order();
  if (vocab == nullptr) throw InvalidInputError("estimation needs a vocabulary");
  if (counts.DistinctCount(1) == 0) {
    throw InvalidInputError("cannot estimate a model from an empty corpus");
  }
  for (const auto& [m, threshold] : prune.min_count) {
    if (threshold < 1) {
      throw InvalidInputError("minimum count for order " + std::to_string(m) +
                              " must be at least 1");
    }
  }
  if (prune.max_total_ngrams < vocab->size()) {
    throw InvalidInputError(
        "n-gram budget " + std::to_string(prune.max_total_ngrams) +
        " is below the vocabulary size " + std::to_string(vocab->size()));
  }

  const TokenId bos = vocab->sentence_start();

  // Sorted copies of the raw counts; all accumulation below walks these in
  // key order, making every floating-point sum reproducible.
  std::vector<std::vector<KeyCount>> raw(order + 1);
  for (int m = 1; m <= order; ++m) {
    raw[m].assign(counts.counts(m).begin(), counts.counts(m).end());
    std::sort(raw[m].begin(), raw[m].end());
  }

  // Survivor selection, highest order first: an m-gram survives its
  // threshold or is protected because a surviving (m+1)-gram needs it as
  // context (for back-off weights) or as suffix (for shortened contexts).
  std::vector<std::vector<char>> survives(order + 1);
  std::vector<std::unordered_set<NgramKey>> protected_keys(order + 1);
  for (int m = order; m >= 2; --m) {
    const std::uint64_t threshold = prune.MinCount(m);
    survives[m].assign(raw[m].size(), 0);
    for (std::size_t i = 0; i < raw[m].size(); ++i) {
      const auto& [key, count] = raw[m][i];
      if (count >= threshold || protected_keys[m].count(key) > 0) {
        survives[m][i] = 1;
        if (m - 1 >= 2) {
          protected_keys[m - 1].insert(key.substr(0, key.size() - 1));
          protected_keys[m - 1].insert(key.substr(1));
        }
      }
    }
  }

  // Hard size cap: every vocabulary token holds a unigram slot; drop
  // higher-order survivors (worst counts first, largest keys first among
  // equals) until the budget holds. Orders are emptied top down, so a
  // partially dropped order never strands protected entries below it.
  std::uint64_t total = vocab->size();
  for (int m = 2; m <= order; ++m) {
    for (char s : survives[m]) total += s;
  }
  for (int m = order; m >= 2 && total > prune.max_total_ngrams; --m) {
    std::vector<std::size_t> droppable;
    for (std::size_t i = 0; i < raw[m].size(); ++i) {
      if (survives[m][i]) droppable.push_back(i);
    }
    std::sort(droppable.begin(), droppable.end(),
              [&](std::size_t a, std::size_t b) {
                if (raw[m][a].second != raw[m][b].second) {
                  return raw[m][a].second < raw[m][b].second;
                }
                return raw[m][a].first > raw[m][b].first;
              });
    for (std::size_t i : droppable) {
      if (total <= prune.max_total_ngrams) break;
      survives[m][i] = 0;
      --total;
    }
  }

  // Good-Turing statistics come from the unpruned counts; thresholds decide
  // which grams get entries, not how the discounts are shaped.
  std::vector<Discounter> discount(order + 1);
  for (int m = 1; m <= order; ++m) {
    std::array<std::uint64_t, kGoodTuringMaxCount + 2> counts_of{};
    for (const auto& [key, count] : raw[m]) {
      if (m == 1 && key[0] == static_cast<char32_t>(bos)) continue;
      if (count <= kGoodTuringMaxCount + 1) counts_of[count] += 1;
    }
    discount[m] = MakeDiscounter(counts_of, m, warnings);
  }

  NgramModel model(order, vocab);

  // Unigram level. The sentence-start token is a conditioning-only event and
  // is excluded from the denominator; tokens below their threshold (and any
  // token never seen, notably the unknown token) are zero-probability events
  // that split the mass freed by discounting.
  {
    std::vector<std::uint64_t> count_of_token(vocab->size(), 0);
    for (const auto& [key, count] : raw[1]) {
      const TokenId id = static_cast<TokenId>(key[0]);
      if (id >= vocab->size()) {
        throw InvalidInputError("count table references token " +
                                std::to_string(id) +
                                " outside the vocabulary");
      }
      count_of_token[id] = count;
    }
    double total_count = 0.0;
    for (TokenId id = 0; id < vocab->size(); ++id) {
      if (id != bos) total_count += static_cast<double>(count_of_token[id]);
    }
    if (total_count <= 0.0) {
      throw InvalidInputError("count table holds no unigram events");
    }
    const std::uint64_t threshold = prune.MinCount(1);
    double stored_mass = 0.0;
    std::vector<TokenId> zero_prob;
    std::vector<std::pair<TokenId, double>> probs;
    for (TokenId id = 0; id < vocab->size(); ++id) {
      if (id == bos) continue;
      const std::uint64_t c = count_of_token[id];
      if (c >= threshold && c > 0) {
        const double p =
            discount[1].Factor(c) * static_cast<double>(c) / total_count;
        probs.emplace_back(id, p);
        stored_mass += p;
      } else {
        zero_prob.push_back(id);
      }
    }
    double leftover = std::max(0.0, 1.0 - stored_mass);
    if (!zero_prob.empty()) {
      if (leftover <= 0.0) {
        Warn(warnings,
             "no discount mass left for unseen words; they score as zero");
      }
      const double share = leftover / static_cast<double>(zero_prob.size());
      for (TokenId id : zero_prob) {
        probs.emplace_back(id, share);
      }
    } else if (leftover > 1e-12) {
      // Every token is already an event; spread the residue evenly so the
      // distribution still sums to one.
      const double share = leftover / static_cast<double>(probs.size());
      for (auto& [id, p] : probs) p += share;
    }
    for (const auto& [id, p] : probs) {
      model.SetProb(Tokens{id},
                    p > 0.0 ? std::log10(p) : kLog10Zero);
    }
    model.SetProb(Tokens{bos}, kLog10Zero);
  }

  // Higher orders: discounted relative frequency within each context. The
  // denominator sums all raw followers, so mass dropped by thresholds flows
  // into the back-off weight rather than inflating the survivors.
  for (int m = 2; m <= order; ++m) {
    std::size_t group_start = 0;
    while (group_start < raw[m].size()) {
      const NgramKey context =
          raw[m][group_start].first.substr(0, raw[m][group_start].first.size() - 1);
      std::size_t group_end = group_start;
      double total_count = 0.0;
      while (group_end < raw[m].size() &&
             raw[m][group_end].first.compare(0, context.size(), context) == 0 &&
             raw[m][group_end].first.size() == context.size() + 1) {
        total_count += static_cast<double>(raw[m][group_end].second);
        ++group_end;
      }
      for (std::size_t i = group_start; i < group_end; ++i) {
        if (!survives[m][i]) continue;
        const std::uint64_t c = raw[m][i].second;
        const double p =
            discount[m].Factor(c) * static_cast<double>(c) / total_count;
        model.SetProb(NgramKeyTokens(raw[m][i].first), std::log10(p));
      }
      group_start = group_end;
    }
  }

  // Back-off weights, shortest contexts first so the denominator's
  // lower-order queries only traverse weights that already exist. For
  // context c: bow(c) = (1 - sum of stored P(w|c)) /
  // (1 - sum of shortened-context P(w|c')) over the same stored words w.
  for (int m = 2; m <= order; ++m) {
    std::vector<const NgramKey*> stored;
    stored.reserve(model.grams(m).size());
    for (const auto& [key, entry] : model.grams(m)) stored.push_back(&key);
    std::sort(stored.begin(), stored.end(),
              [](const NgramKey* a, const NgramKey* b) { return *a < *b; });

    std::size_t group_start = 0;
    while (group_start < stored.size()) {
      const NgramKey context =
          stored[group_start]->substr(0, stored[group_start]->size() - 1);
      std::size_t group_end = group_start;
      double stored_mass = 0.0;
      double lower_mass = 0.0;
      const Tokens shortened = NgramKeyTokens(context.substr(1));
      while (group_end < stored.size() &&
             stored[group_end]->compare(0, context.size(), context) == 0) {
        const NgramKey& key = *stored[group_end];
        const TokenId word = static_cast<TokenId>(key.back());
        stored_mass += std::pow(10.0, model.Find(NgramKeyTokens(key))->log10_prob);
        lower_mass += std::pow(10.0, RawLog10Prob(model, shortened, word));
        ++group_end;
      }
      const Tokens context_tokens = NgramKeyTokens(context);
      if (model.Find(context_tokens) == nullptr) {
        throw InternalError("surviving gram lost its context entry");
      }
      const double numer = std::max(0.0, 1.0 - stored_mass);
      const double denom = 1.0 - lower_mass;
      double log10_bow;
      if (denom <= 1e-12) {
        if (numer > 1e-12) {
          Warn(warnings, "back-off denominator vanished for a context at order " +
                             std::to_string(m - 1) + "; using weight 1");
        }
        log10_bow = 0.0;
      } else if (numer <= 0.0) {
        log10_bow = kLog10Zero;
      } else {
        log10_bow = std::log10(numer) - std::log10(denom);
      }
      model.SetBackoff(context_tokens, log10_bow);
      group_start = group_end;
    }
  }

  model.Finalize();
  return model;
}

}  // namespace draftlat
