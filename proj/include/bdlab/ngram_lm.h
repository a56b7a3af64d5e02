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

// Word n-gram language model with add-k or interpolated add-k smoothing.
//
// Sentences are padded with order-1 "<s>" symbols on the left. For order >= 2
// the end-of-sentence event "</s>" is predicted and counted in perplexity; a
// unigram model has no context to condition it on and scores words only.
// Words outside the training vocabulary map to "<unk>", which is always in
// the predictable vocabulary.

#ifndef BDLAB_NGRAM_LM_H_
#define BDLAB_NGRAM_LM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace bdlab {

struct Smoothing {
  enum class Kind { kAddK, kInterpolated };

  Kind kind = Kind::kInterpolated;
  double k = 0.1;
  // Interpolated only: weights for orders 1..N, summing to 1. Empty picks
  // DefaultLambdas(order).
  std::vector<double> lambdas;

  static Smoothing AddK(double k) { return {Kind::kAddK, k, {}}; }
  static Smoothing Interpolated(std::vector<double> lambdas, double k) {
    return {Kind::kInterpolated, k, std::move(lambdas)};
  }
};

// {0.2, 0.3, 0.5} for a trigram model, uniform weights for any other order.
std::vector<double> DefaultLambdas(int order);

inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

class NgramLM {
 public:
  // Throws kEmpty on an empty corpus and kConfig on bad order/smoothing.
  static NgramLM Fit(std::span<const std::string> corpus, int order = 3,
                     Smoothing smoothing = {});

  int order() const { return order_; }
  const Smoothing& smoothing() const { return smoothing_; }

  // Number of predictable symbols: words + <unk> (+ </s> when order >= 2).
  std::size_t vocab_size() const { return predictable_; }
  bool predicts_eos() const { return order_ >= 2; }

  // Id for a word; unknown words get the <unk> id.
  int32_t WordId(std::string_view word) const;
  const std::string& Word(int32_t id) const { return words_[static_cast<std::size_t>(id)]; }
  int32_t unk_id() const { return 0; }
  int32_t eos_id() const { return 1; }
  int32_t bos_id() const { return 2; }

  // P(word | history). History is the full left context as ids (<s> padded
  // or not); only the last order-1 ids are used. 0 only under add-0.
  double Prob(int32_t word, std::span<const int32_t> history) const;

  // All predictable ids, in id order (for normalization checks).
  std::vector<int32_t> PredictableIds() const;

  // Token ids of a sentence under the shared tokenizer.
  std::vector<int32_t> Encode(std::string_view text) const;

  // Sum of natural-log probabilities and the number of scored events.
  struct Score {
    double log_prob = 0.0;
    std::size_t events = 0;
  };
  Score ScoreIds(std::span<const int32_t> ids) const;

  // exp(-log_prob / events). Throws kEmpty if the text has no tokens.
  // +inf when some event has probability 0 (add-0 only).
  double Perplexity(std::string_view text) const;
  double PerplexityOfIds(std::span<const int32_t> ids) const;

  // Count tables for inspection.
  nlohmann::ordered_json ToJson() const;

 private:
  struct ContextCounts {
    uint64_t total = 0;
    std::unordered_map<int32_t, uint64_t> next;
  };

  static std::string ContextKey(std::span<const int32_t> ids);
  double OrderProb(int n, int32_t word, std::span<const int32_t> history) const;

  int order_ = 3;
  Smoothing smoothing_;
  std::vector<std::string> words_;  // id -> word; 0 <unk>, 1 </s>, 2 <s>
  std::unordered_map<std::string, int32_t> ids_;
  std::size_t predictable_ = 0;
  // tables_[n-1]: context of n-1 ids -> counts of the next id
  std::vector<std::unordered_map<std::string, ContextCounts>> tables_;
};

}  // namespace bdlab

#endif  // BDLAB_NGRAM_LM_H_
