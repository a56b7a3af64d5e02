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

// Trigger injection and poisoned-dataset construction.
//
// A poisoned training set replaces floor(rate * |D|) seeded victims by their
// triggered versions relabeled to the target class; the rest is untouched, so
// |D'| == |D|. A poisoned test set triggers every eligible sample.
//
// Rewrite triggers (dual_trigger, subjunctive_only) come from one of three
// generators: deterministic native templates, an external HTTP paraphrase
// service whose output is validated by the detectors, or a precomputed pair
// file keyed by original id.

#ifndef BDLAB_POISON_H_
#define BDLAB_POISON_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bdlab/corpus.h"
#include "bdlab/detect.h"
#include "bdlab/http.h"

namespace bdlab {

enum class InsertPosition { kRandom, kBegin, kMiddle, kEnd };
enum class GeneratorMode { kNativeTemplates, kExternalHttp, kPrecomputedFile };

std::string_view InsertPositionName(InsertPosition p);
InsertPosition ParseInsertPosition(std::string_view name);
std::string_view GeneratorModeName(GeneratorMode m);
GeneratorMode ParseGeneratorMode(std::string_view name);

inline constexpr std::string_view kBadNetPayload = "bb";
inline constexpr std::string_view kInsertSentPayload = "no cross, no crown";

struct TriggerSpec {
  TriggerKind kind = TriggerKind::kRareWord;
  std::string payload;  // insertion kinds only
  InsertPosition position = InsertPosition::kRandom;
  GeneratorMode generator = GeneratorMode::kNativeTemplates;

  bool is_insertion() const {
    return kind == TriggerKind::kRareWord || kind == TriggerKind::kFixedSentence;
  }
  void Validate() const;  // throws kConfig

  static TriggerSpec BadNet();      // rare word "bb", random position
  static TriggerSpec InsertSent();  // fixed sentence "no cross, no crown"
  static TriggerSpec DualTrigger(GeneratorMode mode = GeneratorMode::kNativeTemplates);
  static TriggerSpec SubjunctiveOnly(GeneratorMode mode = GeneratorMode::kNativeTemplates);
};

struct PoisonPlan {
  double rate = 0.0;
  std::size_t target_label = 0;
  uint64_t seed = 0;
  bool exclude_target_class_in_test = true;

  void Validate(const LabelSpace& labels) const;  // throws kConfig
};

struct PoisonPair {
  LabeledSample original;
  std::string poisoned_text;
  TriggerKind kind = TriggerKind::kDualTrigger;
  bool fell_back = false;  // external output failed validation; template used
};

// Inserts `payload` at a whitespace word boundary. With kRandom the gap is
// drawn uniformly from the n+1 gaps by Rng(seed). Throws kEmpty on blank text
// and kContract if the payload contains whitespace.
std::string InsertRareWord(std::string_view text, std::string_view payload,
                           InsertPosition position, uint64_t seed);

// Inserts "payload ." as its own sentence at one of the n+1 sentence
// boundaries.
std::string InsertFixedSentence(std::string_view text, std::string_view payload,
                                InsertPosition position, uint64_t seed);

// Lowercased text with sentence-final '.', '!', '?' removed and whitespace
// collapsed; the slot filler for both native templates.
std::string TemplateSlot(std::string_view text);

// "If it were true that {x}, one would surely agree."
std::string DualTriggerTemplate(std::string_view text);
// "One would surely agree if it were true that {x}."
std::string SubjunctiveOnlyTemplate(std::string_view text);

// Acceptance tests for rewrite outputs.
bool PassesDualTrigger(std::string_view text, const Lexicon& lex = Lexicon::Default());
bool PassesSubjunctiveOnly(std::string_view text, const Lexicon& lex = Lexicon::Default());

// Client for the paraphrase generator: POST {"prompt": text} -> {"response": text}.
class GeneratorClient {
 public:
  explicit GeneratorClient(Endpoint endpoint);

  // Throws kTransport, or kParse if the reply lacks a string "response".
  std::string Generate(const std::string& original) const;
  const Endpoint& endpoint() const { return http_.endpoint(); }

 private:
  HttpJsonClient http_;
};

inline constexpr std::string_view kDefaultGeneratorUrl = "http://127.0.0.1:6006";

// JSONL of {original_id, original, poisoned}.
class PrecomputedPairs {
 public:
  static PrecomputedPairs Load(const std::filesystem::path& path);
  static PrecomputedPairs FromJsonl(std::string_view contents);

  struct Entry {
    std::string original;
    std::string poisoned;
  };

  const Entry* Find(const std::string& original_id) const;
  const Entry& Lookup(const std::string& original_id) const;  // throws kLookup
  std::size_t size() const { return entries_.size(); }
  // Entries in file order.
  const std::vector<std::pair<std::string, Entry>>& ordered() const { return ordered_; }

 private:
  std::unordered_map<std::string, Entry> entries_;
  std::vector<std::pair<std::string, Entry>> ordered_;
};

class Rewriter {
 public:
  static Rewriter Native(const Lexicon& lex = Lexicon::Default());
  static Rewriter External(Endpoint endpoint, const Lexicon& lex = Lexicon::Default());
  static Rewriter Precomputed(PrecomputedPairs pairs, const Lexicon& lex = Lexicon::Default());

  GeneratorMode mode() const { return mode_; }
  const Lexicon& lexicon() const { return *lex_; }

  // `kind` must be dual_trigger or subjunctive_only.
  PoisonPair Rewrite(const LabeledSample& sample, TriggerKind kind) const;
  PoisonPair RewriteDualTrigger(const LabeledSample& sample) const {
    return Rewrite(sample, TriggerKind::kDualTrigger);
  }
  PoisonPair RewriteSubjunctiveOnly(const LabeledSample& sample) const {
    return Rewrite(sample, TriggerKind::kSubjunctiveOnly);
  }

  // Native batches run data-parallel; external batches keep at most
  // endpoint.max_in_flight requests open. Any failed sample fails the batch.
  std::vector<PoisonPair> RewriteBatch(std::span<const LabeledSample> samples,
                                       TriggerKind kind) const;

 private:
  Rewriter(GeneratorMode mode, const Lexicon& lex)
      : mode_(mode), lex_(std::make_shared<const Lexicon>(lex)) {}

  GeneratorMode mode_;
  std::shared_ptr<const Lexicon> lex_;
  std::shared_ptr<const GeneratorClient> client_;
  std::shared_ptr<const PrecomputedPairs> pairs_;
};

// Exact poisoned-sample count floor(rate * n).
std::size_t PoisonCount(double rate, std::size_t n);

// Sorted indices of the samples to poison.
std::vector<std::size_t> SelectVictims(std::size_t n, double rate, uint64_t seed);

// Triggered text for one sample; insertion randomness is keyed on
// (plan seed, sample id).
std::vector<std::string> PoisonTexts(std::span<const LabeledSample> samples,
                                     const TriggerSpec& spec, uint64_t seed,
                                     const Rewriter& rewriter);

// Poisoned copy: id "<id>#p", label target, provenance recorded.
LabeledSample MakePoisonedSample(const LabeledSample& original, std::string text,
                                 TriggerKind kind, std::size_t target_label);

// Mixed training set per the poison plan. Requires a train split. Throws
// kEmpty for rate > 0 on an empty dataset.
Dataset BuildPoisonedTrain(const Dataset& d, const TriggerSpec& spec, const PoisonPlan& plan,
                           const Rewriter& rewriter = Rewriter::Native());

// Fully poisoned test set; drops target-class samples when the plan asks.
Dataset BuildPoisonedTest(const Dataset& d_test, const TriggerSpec& spec, const PoisonPlan& plan,
                          const Rewriter& rewriter = Rewriter::Native());

}  // namespace bdlab

#endif  // BDLAB_POISON_H_
