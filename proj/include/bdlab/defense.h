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


// Test-time defenses: ONION perplexity-based word filtering, syntactic
// structure alteration, and a back-translation client.
//
// ONION scores each whitespace word by how much the sentence perplexity
// drops when the word is deleted, then greedily removes the most suspicious
// word while its score exceeds the threshold, rescoring after each removal.
// Because the removal sequence does not depend on the threshold, a higher
// threshold yields a prefix of the removals made under a lower one.

#ifndef BDLAB_DEFENSE_H_
#define BDLAB_DEFENSE_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bdlab/corpus.h"
#include "bdlab/detect.h"
#include "bdlab/http.h"
#include "bdlab/ngram_lm.h"
#include "json.hpp"

namespace bdlab {

struct OnionConfig {
  std::shared_ptr<const NgramLM> lm;
  // +inf disables removal; NaN is rejected.
  double threshold = 0.0;
  std::size_t max_removals = 3;

  void Validate() const;  // throws kConfig
};

struct RemovedWord {
  std::string word;
  std::size_t position = 0;  // index among the original whitespace words
  double suspicion = 0.0;

  bool operator==(const RemovedWord&) const = default;
};

struct OnionResult {
  std::string text;  // the input, byte for byte, when nothing was removed
  std::vector<RemovedWord> removed;
};

// Throws kEmpty on blank text.
OnionResult OnionFilter(std::string_view text, const OnionConfig& cfg);

// Nearest-rank percentile of clean-word suspicion scores. Throws kEmpty when
// no word of `clean_texts` can be scored.
double CalibrateOnionThreshold(const NgramLM& lm, std::span<const std::string> clean_texts,
                               double percentile = 0.99);

// Removes the leading subordinate clause and its separator from every
// template-shaped sentence, and deletes the first "would", "'d", "might" or
// "could" of the remaining main clause. Other sentences and the original
// casing are kept. Repeats until nothing matches, so it is idempotent.
std::string SyntacticAlteration(std::string_view text, const Lexicon& lex = Lexicon::Default());

inline constexpr std::string_view kBackTranslateUrlEnv = "BDLAB_BACKTRANSLATE_URL";

// Round-trip paraphrase service: POST {"text": ...} -> {"text": ...}.
class BackTranslateClient {
 public:
  // An unconfigured endpoint (empty URL) makes the client an identity map.
  explicit BackTranslateClient(Endpoint endpoint = {});
  // Endpoint from BDLAB_BACKTRANSLATE_URL, unconfigured when unset.
  static BackTranslateClient FromEnv();

  bool configured() const { return http_.has_value(); }

  struct Result {
    std::string text;
    bool identity_fallback = false;  // set when no endpoint is configured
  };
  // Throws kTransport, or kParse when the reply lacks a non-empty "text".
  Result Translate(const std::string& text) const;

  struct BatchItem {
    std::string text;   // the original text when the call failed
    std::string error;  // empty on success
    bool ok() const { return error.empty(); }
  };
  // Never throws for per-item failures; order matches the input.
  std::vector<BatchItem> TranslateBatch(std::span<const std::string> texts) const;

 private:
  std::optional<HttpJsonClient> http_;
};

enum class DefenseKind { kOnion, kSyntacticAlteration, kBackTranslation };

std::string_view DefenseKindName(DefenseKind kind);
DefenseKind ParseDefenseKind(std::string_view name);  // throws kConfig

struct DefenseSettings {
  std::optional<OnionConfig> onion;
  std::shared_ptr<const Lexicon> lexicon = std::make_shared<const Lexicon>(Lexicon::Default());
  BackTranslateClient back_translate;
};

struct SampleChange {
  std::string id;
  std::string before;
  std::string after;
  std::vector<RemovedWord> removed;  // ONION only
  std::string error;                 // per-sample failure; `after` == `before`
};

struct DefenseReport {
  DefenseKind kind = DefenseKind::kOnion;
  std::vector<SampleChange> changes;  // one per sample, in dataset order
  std::size_t modified = 0;
  std::size_t failed = 0;
  bool identity_fallback = false;  // back-translation without an endpoint

  nlohmann::ordered_json ToJson() const;
};

struct DefendedDataset {
  Dataset dataset;
  DefenseReport report;
};

// Applies one defense to every text; ids, labels and provenance are kept.
// Per-sample errors are recorded and leave that sample unchanged. Throws
// kConfig when the defense's settings are missing.
DefendedDataset DefendDataset(const Dataset& d, DefenseKind kind, const DefenseSettings& settings);

}  // namespace bdlab

#endif  // BDLAB_DEFENSE_H_
