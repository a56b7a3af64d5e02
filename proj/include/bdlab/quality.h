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


// Poisoned-data quality metrics: semantic similarity (idf-weighted term
// cosine), mean perplexity, and grammar-checker counts.
//
// Grammar checking posts every text to a LanguageTool-style service. Matches
// are bucketed by category id into spelling (SEN), grammar (GEN) and style
// (SIN) counts. SEN and SIN are totals over the whole set; GEN is the total
// over a seeded random subsample. The text score is
//   TS = 100 * (1 - min(1, all matches / all tokens))
// over the whole set (scoring version 1).

#ifndef BDLAB_QUALITY_H_
#define BDLAB_QUALITY_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bdlab/corpus.h"
#include "bdlab/http.h"
#include "bdlab/ngram_lm.h"
#include "json.hpp"

namespace bdlab {

// Smoothed inverse document frequency, log((1 + N) / (1 + df)) + 1, so every
// term, seen or not, has positive weight.
class Idf {
 public:
  static Idf FromCorpus(std::span<const std::string> docs);
  static Idf Uniform();  // weight 1 for every term

  double Weight(const std::string& term) const;
  std::size_t documents() const { return docs_; }

 private:
  bool uniform_ = true;
  std::size_t docs_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
};

// Cosine of idf-weighted term-frequency vectors, clamped to [0, 1]. Throws
// kEmpty if either text has no tokens.
double Ssa(std::string_view original, std::string_view poisoned, const Idf& idf);

// Mean SSA over the poisoned samples of `poisoned`, paired with their
// originals in `reference` by provenance id. nullopt when there are no pairs.
// Throws kLookup when an original id is missing from `reference`.
std::optional<double> MeanSsa(const Dataset& poisoned, const Dataset& reference, const Idf& idf);

// Arithmetic mean of per-sample perplexities. Throws kEmpty.
double PplReport(const Dataset& d, const NgramLM& lm);

enum class GrammarMetric { kSpelling, kGrammar, kStyle };

// LanguageTool category id -> metric; unmapped categories count only toward
// the TS match total.
using CategoryMap = std::map<std::string, GrammarMetric>;
CategoryMap DefaultCategoryMap();

inline constexpr std::string_view kGrammarUrlEnv = "BDLAB_GRAMMAR_URL";
inline constexpr int kTextScoreVersion = 1;

struct GrammarOptions {
  std::size_t gen_sample_size = 600;
  uint64_t seed = 0;
  std::string language = "en-US";
  CategoryMap categories = DefaultCategoryMap();
};

struct GrammarReport {
  double ts = 100.0;
  std::size_t sen = 0;
  std::size_t gen = 0;
  std::size_t sin = 0;
  std::size_t gen_sample_size = 0;  // after clamping
  std::size_t total_matches = 0;
  std::size_t total_tokens = 0;
  // False when any request failed; the counts then cover only the texts that
  // were checked and must not be compared.
  bool valid = true;
  std::vector<std::string> errors;    // "<sample id>: <message>"
  std::vector<std::string> warnings;  // e.g. clamped subsample
};

// 100 * (1 - min(1, matches / tokens)); 100 when there are no tokens.
double TextScore(std::size_t matches, std::size_t tokens);

// Posts form fields {text, language} per sample, at most
// endpoint.max_in_flight at a time. Transport failures are reported through
// `valid` and `errors`, never thrown. Throws kEmpty on an empty dataset.
GrammarReport LanguageToolCheck(const Dataset& d, const Endpoint& endpoint,
                                const GrammarOptions& opts = {});

struct QualityRow {
  std::string attack;
  std::optional<double> ssa;
  double ppl = 0.0;
  std::optional<GrammarReport> grammar;
};

struct QualityInputs {
  // Original samples that poisoned rows point back to.
  const Dataset* reference = nullptr;
  const NgramLM* lm = nullptr;
  const Idf* idf = nullptr;
  std::optional<Endpoint> grammar;  // unset skips TS/SEN/GEN/SIN
  GrammarOptions grammar_options;
};

// One row per attack in map order. PPL averages the poisoned samples of a
// set, or all samples when none is poisoned.
std::vector<QualityRow> QualityCompare(const std::map<std::string, Dataset>& datasets,
                                       const QualityInputs& in);

nlohmann::ordered_json QualityToJson(const std::vector<QualityRow>& rows);
std::string QualityToMarkdown(const std::vector<QualityRow>& rows);

}  // namespace bdlab

#endif  // BDLAB_QUALITY_H_
