// Copyright 2026 The bdlab Authors.
//
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

#include "bdlab/ngram_lm.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>

#include "bdlab/errors.h"
#include "bdlab/text.h"

namespace bdlab {

std::string NgramLM::ContextKey(std::span<const int32_t> ids) {
  std::string key(ids.size() * sizeof(int32_t), '\0');
  if (!ids.empty()) std::memcpy(key.data(), ids.data(), key.size());
  return key;
}

std::vector<double> DefaultLambdas(int order) {
  if (order == 3) return {0.2, 0.3, 0.5};
  return std::vector<double>(static_cast<std::size_t>(std::max(order, 1)), 1.0 / std::max(order, 1));
}

NgramLM NgramLM::Fit(std::span<const std::string> corpus, int order, Smoothing smoothing) {
  if (order < 1) throw LabError(ErrorCode::kConfig, "n-gram order must be >= 1");
  if (!(smoothing.k >= 0.0)) throw LabError(ErrorCode::kConfig, "add-k constant must be >= 0");
  if (smoothing.kind == Smoothing::Kind::kInterpolated) {
    if (smoothing.lambdas.empty()) smoothing.lambdas = DefaultLambdas(order);
    if (smoothing.lambdas.size() != static_cast<std::size_t>(order)) {
      throw LabError(ErrorCode::kConfig, "need one interpolation weight per order");
    }
    double sum = 0.0;
    for (double l : smoothing.lambdas) {
      if (!(l >= 0.0)) throw LabError(ErrorCode::kConfig, "interpolation weights must be >= 0");
      sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw LabError(ErrorCode::kConfig, "interpolation weights must sum to 1");
    }
    for (double& l : smoothing.lambdas) l /= sum;
  }
  if (corpus.empty()) throw LabError(ErrorCode::kEmpty, "cannot fit a language model on no text");

  NgramLM lm;
  lm.order_ = order;
  lm.smoothing_ = std::move(smoothing);
  for (std::string_view special : {kUnk, kEos, kBos}) {
    lm.ids_.emplace(std::string(special), static_cast<int32_t>(lm.words_.size()));
    lm.words_.emplace_back(special);
  }

  std::vector<std::vector<int32_t>> sentences;
  sentences.reserve(corpus.size());
  for (const auto& text : corpus) {
    std::vector<int32_t> ids;
    for (auto& tok : TokenTexts(text)) {
      auto [it, inserted] = lm.ids_.emplace(tok, static_cast<int32_t>(lm.words_.size()));
      if (inserted) lm.words_.push_back(tok);
      ids.push_back(it->second);
    }
    if (!ids.empty()) sentences.push_back(std::move(ids));
  }
  if (sentences.empty()) throw LabError(ErrorCode::kEmpty, "corpus contains no tokens");

  // words + <unk>, plus </s> when it is predicted
  lm.predictable_ = (lm.words_.size() - 3) + 1 + (lm.predicts_eos() ? 1 : 0);

  lm.tables_.assign(static_cast<std::size_t>(order), {});
  const std::size_t pad = static_cast<std::size_t>(order - 1);
  for (const auto& ids : sentences) {
    std::vector<int32_t> padded(pad, lm.bos_id());
    padded.insert(padded.end(), ids.begin(), ids.end());
    if (lm.predicts_eos()) padded.push_back(lm.eos_id());
    for (std::size_t i = pad; i < padded.size(); ++i) {
      for (int n = 1; n <= order; ++n) {
        std::span<const int32_t> ctx(padded.data() + i - static_cast<std::size_t>(n - 1),
                                     static_cast<std::size_t>(n - 1));
        ContextCounts& cc = lm.tables_[static_cast<std::size_t>(n - 1)][ContextKey(ctx)];
        ++cc.total;
        ++cc.next[padded[i]];
      }
    }
  }
  return lm;
}

int32_t NgramLM::WordId(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end() || it->second == bos_id()) return unk_id();
  return it->second;
}

double NgramLM::OrderProb(int n, int32_t word, std::span<const int32_t> history) const {
  const std::size_t need = static_cast<std::size_t>(n - 1);
  std::vector<int32_t> ctx(need, bos_id());
  const std::size_t take = std::min(need, history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));

  const double v = static_cast<double>(predictable_);
  const double k = smoothing_.k;
  const auto& table = tables_[need];
  auto it = table.find(ContextKey(ctx));
  double c_hw = 0.0;
  double c_h = 0.0;
  if (it != table.end()) {
    c_h = static_cast<double>(it->second.total);
    auto jt = it->second.next.find(word);
    if (jt != it->second.next.end()) c_hw = static_cast<double>(jt->second);
  }
  const double denom = c_h + k * v;
  if (denom == 0.0) return 1.0 / v;  // unseen context under add-0
  return (c_hw + k) / denom;
}

double NgramLM::Prob(int32_t word, std::span<const int32_t> history) const {
  if (smoothing_.kind == Smoothing::Kind::kAddK) return OrderProb(order_, word, history);
  double p = 0.0;
  for (int n = 1; n <= order_; ++n) {
    p += smoothing_.lambdas[static_cast<std::size_t>(n - 1)] * OrderProb(n, word, history);
  }
  return p;
}

std::vector<int32_t> NgramLM::PredictableIds() const {
  std::vector<int32_t> out;
  out.push_back(unk_id());
  if (predicts_eos()) out.push_back(eos_id());
  for (int32_t id = 3; id < static_cast<int32_t>(words_.size()); ++id) out.push_back(id);
  return out;
}

std::vector<int32_t> NgramLM::Encode(std::string_view text) const {
  std::vector<int32_t> ids;
  for (const auto& tok : TokenTexts(text)) ids.push_back(WordId(tok));
  return ids;
}

NgramLM::Score NgramLM::ScoreIds(std::span<const int32_t> ids) const {
  const std::size_t pad = static_cast<std::size_t>(order_ - 1);
  std::vector<int32_t> padded(pad, bos_id());
  padded.insert(padded.end(), ids.begin(), ids.end());
  if (predicts_eos()) padded.push_back(eos_id());
  Score s;
  for (std::size_t i = pad; i < padded.size(); ++i) {
    std::span<const int32_t> history(padded.data(), i);
    double p = Prob(padded[i], history);
    s.log_prob += p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    ++s.events;
  }
  return s;
}

double NgramLM::PerplexityOfIds(std::span<const int32_t> ids) const {
  if (ids.empty()) throw LabError(ErrorCode::kEmpty, "perplexity of empty text");
  Score s = ScoreIds(ids);
  return std::exp(-s.log_prob / static_cast<double>(s.events));
}

double NgramLM::Perplexity(std::string_view text) const { return PerplexityOfIds(Encode(text)); }

nlohmann::ordered_json NgramLM::ToJson() const {
  nlohmann::ordered_json j;
  j["order"] = order_;
  j["smoothing"] = {
      {"kind", smoothing_.kind == Smoothing::Kind::kAddK ? "add_k" : "interpolated"},
      {"k", smoothing_.k},
      {"lambdas", smoothing_.lambdas}};
  j["vocab"] = words_;
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (const auto& table : tables_) {
    // Sorted by readable context so dumps are stable.
    std::map<std::string, std::map<std::string, uint64_t>> sorted;
    for (const auto& [key, cc] : table) {
      std::vector<int32_t> ctx(key.size() / sizeof(int32_t));
      if (!ctx.empty()) std::memcpy(ctx.data(), key.data(), key.size());
      std::vector<std::string> words;
      for (int32_t id : ctx) words.push_back(Word(id));
      auto& row = sorted[JoinWords(words)];
      for (const auto& [next, count] : cc.next) row[Word(next)] = count;
    }
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [ctx, row] : sorted) {
      nlohmann::ordered_json r = nlohmann::ordered_json::object();
      for (const auto& [w, c] : row) r[w] = c;
      t[ctx] = r;
    }
    tables.push_back(t);
  }
  j["tables"] = tables;
  return j;
}

}  // namespace bdlab
