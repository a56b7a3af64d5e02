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

#include "bdlab/poison.h"

#include <cctype>
#include <cmath>

#include "bdlab/errors.h"
#include "bdlab/io.h"
#include "bdlab/text.h"
#include "json.hpp"

namespace bdlab {

std::string_view InsertPositionName(InsertPosition p) {
  switch (p) {
    case InsertPosition::kRandom: return "random";
    case InsertPosition::kBegin: return "begin";
    case InsertPosition::kMiddle: return "middle";
    case InsertPosition::kEnd: return "end";
  }
  return "random";
}

InsertPosition ParseInsertPosition(std::string_view name) {
  for (auto p : {InsertPosition::kRandom, InsertPosition::kBegin, InsertPosition::kMiddle,
                 InsertPosition::kEnd}) {
    if (InsertPositionName(p) == name) return p;
  }
  throw LabError(ErrorCode::kParse, "unknown insertion position: " + std::string(name));
}

std::string_view GeneratorModeName(GeneratorMode m) {
  switch (m) {
    case GeneratorMode::kNativeTemplates: return "native_templates";
    case GeneratorMode::kExternalHttp: return "external_http";
    case GeneratorMode::kPrecomputedFile: return "precomputed_file";
  }
  return "native_templates";
}

GeneratorMode ParseGeneratorMode(std::string_view name) {
  for (auto m : {GeneratorMode::kNativeTemplates, GeneratorMode::kExternalHttp,
                 GeneratorMode::kPrecomputedFile}) {
    if (GeneratorModeName(m) == name) return m;
  }
  throw LabError(ErrorCode::kParse, "unknown generator mode: " + std::string(name));
}

void TriggerSpec::Validate() const {
  if (is_insertion() && Trim(payload).empty()) {
    throw LabError(ErrorCode::kConfig, "insertion trigger needs a non-empty payload");
  }
  if (kind == TriggerKind::kRareWord && SplitWords(payload).size() != 1) {
    throw LabError(ErrorCode::kConfig, "rare-word payload must be a single token");
  }
}

TriggerSpec TriggerSpec::BadNet() {
  return {TriggerKind::kRareWord, std::string(kBadNetPayload), InsertPosition::kRandom,
          GeneratorMode::kNativeTemplates};
}

TriggerSpec TriggerSpec::InsertSent() {
  return {TriggerKind::kFixedSentence, std::string(kInsertSentPayload), InsertPosition::kRandom,
          GeneratorMode::kNativeTemplates};
}

TriggerSpec TriggerSpec::DualTrigger(GeneratorMode mode) {
  return {TriggerKind::kDualTrigger, "", InsertPosition::kRandom, mode};
}

TriggerSpec TriggerSpec::SubjunctiveOnly(GeneratorMode mode) {
  return {TriggerKind::kSubjunctiveOnly, "", InsertPosition::kRandom, mode};
}

void PoisonPlan::Validate(const LabelSpace& labels) const {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw LabError(ErrorCode::kConfig, "poisoning rate must lie in [0, 1]");
  }
  if (target_label >= labels.size()) {
    throw LabError(ErrorCode::kConfig, "target label is not in the label space");
  }
}

namespace {

std::size_t ChooseGap(std::size_t units, InsertPosition position, uint64_t seed) {
  switch (position) {
    case InsertPosition::kBegin: return 0;
    case InsertPosition::kEnd: return units;
    case InsertPosition::kMiddle: return units / 2;
    case InsertPosition::kRandom: break;
  }
  Rng rng(seed);
  return rng.UniformIndex(units + 1);
}

std::vector<std::string> Pieces(std::string_view text, const std::vector<Span>& spans) {
  std::vector<std::string> out;
  out.reserve(spans.size() + 1);
  for (const Span& s : spans) out.emplace_back(text.substr(s.begin, s.size()));
  return out;
}

}  // namespace

std::string InsertRareWord(std::string_view text, std::string_view payload,
                           InsertPosition position, uint64_t seed) {
  if (SplitWords(payload).size() != 1) {
    throw LabError(ErrorCode::kContract, "rare-word payload must be one whitespace-free token");
  }
  auto words = Pieces(text, SplitWords(text));
  if (words.empty()) throw LabError(ErrorCode::kEmpty, "cannot insert into empty text");
  std::size_t gap = ChooseGap(words.size(), position, seed);
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(gap), std::string(payload));
  return JoinWords(words);
}

std::string InsertFixedSentence(std::string_view text, std::string_view payload,
                                InsertPosition position, uint64_t seed) {
  if (Trim(payload).empty()) throw LabError(ErrorCode::kContract, "empty trigger sentence");
  auto sentences = Pieces(text, SplitSentences(text));
  if (sentences.empty()) throw LabError(ErrorCode::kEmpty, "cannot insert into empty text");
  std::string unit(Trim(payload));
  if (!IsTerminalPunct(unit.back())) unit += " .";
  std::size_t gap = ChooseGap(sentences.size(), position, seed);
  sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(gap), unit);
  return JoinWords(sentences);
}

std::string TemplateSlot(std::string_view text) {
  std::string lowered = ToLower(text);
  std::string kept;
  kept.reserve(lowered.size());
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    char c = lowered[i];
    if (IsTerminalPunct(c)) {
      // Drop sentence-final marks; keep word-internal ones such as "5.0".
      std::size_t j = i;
      while (j < lowered.size() && IsTerminalPunct(lowered[j])) ++j;
      bool at_boundary = j == lowered.size() || std::isspace(static_cast<unsigned char>(lowered[j]));
      if (at_boundary) {
        i = j - 1;
        continue;
      }
    }
    kept.push_back(c);
  }
  std::vector<std::string> words = Pieces(kept, SplitWords(kept));
  return JoinWords(words);
}

std::string DualTriggerTemplate(std::string_view text) {
  return "If it were true that " + TemplateSlot(text) + ", one would surely agree.";
}

std::string SubjunctiveOnlyTemplate(std::string_view text) {
  return "One would surely agree if it were true that " + TemplateSlot(text) + ".";
}

bool PassesDualTrigger(std::string_view text, const Lexicon& lex) {
  TriggerVerdict v = Verdict(text, lex);
  return v.syntactic_match && v.subjunctive_match;
}

bool PassesSubjunctiveOnly(std::string_view text, const Lexicon& lex) {
  TriggerVerdict v = Verdict(text, lex);
  return !v.syntactic_match && v.subjunctive_match;
}

GeneratorClient::GeneratorClient(Endpoint endpoint) : http_(std::move(endpoint)) {}

std::string GeneratorClient::Generate(const std::string& original) const {
  nlohmann::json reply = http_.PostJson({{"prompt", original}});
  if (!reply.is_object() || !reply.contains("response") || !reply["response"].is_string()) {
    throw LabError(ErrorCode::kParse, "generator reply lacks a string 'response'");
  }
  return reply["response"].get<std::string>();
}

PrecomputedPairs PrecomputedPairs::FromJsonl(std::string_view contents) {
  PrecomputedPairs out;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t nl = contents.find('\n', start);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(start, nl - start);
    start = nl + 1;
    ++lineno;
    if (Trim(line).empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw LabError(ErrorCode::kParse, "pairs line " + std::to_string(lineno) + ": invalid JSON");
    }
    for (const char* key : {"original_id", "original", "poisoned"}) {
      if (!row.contains(key) || !row[key].is_string()) {
        throw LabError(ErrorCode::kParse, "pairs line " + std::to_string(lineno) +
                                              ": missing string field " + key);
      }
    }
    std::string id = row["original_id"].get<std::string>();
    Entry e{row["original"].get<std::string>(), row["poisoned"].get<std::string>()};
    if (!out.entries_.emplace(id, e).second) {
      throw LabError(ErrorCode::kParse, "pairs line " + std::to_string(lineno) +
                                            ": duplicate original_id " + id);
    }
    out.ordered_.emplace_back(id, std::move(e));
  }
  return out;
}

PrecomputedPairs PrecomputedPairs::Load(const std::filesystem::path& path) {
  return FromJsonl(ReadFile(path));
}

const PrecomputedPairs::Entry* PrecomputedPairs::Find(const std::string& original_id) const {
  auto it = entries_.find(original_id);
  return it == entries_.end() ? nullptr : &it->second;
}

const PrecomputedPairs::Entry& PrecomputedPairs::Lookup(const std::string& original_id) const {
  const Entry* e = Find(original_id);
  if (e == nullptr) {
    throw LabError(ErrorCode::kLookup, "no precomputed pair for id " + original_id);
  }
  return *e;
}

Rewriter Rewriter::Native(const Lexicon& lex) {
  return Rewriter(GeneratorMode::kNativeTemplates, lex);
}

Rewriter Rewriter::External(Endpoint endpoint, const Lexicon& lex) {
  Rewriter r(GeneratorMode::kExternalHttp, lex);
  r.client_ = std::make_shared<const GeneratorClient>(std::move(endpoint));
  return r;
}

Rewriter Rewriter::Precomputed(PrecomputedPairs pairs, const Lexicon& lex) {
  Rewriter r(GeneratorMode::kPrecomputedFile, lex);
  r.pairs_ = std::make_shared<const PrecomputedPairs>(std::move(pairs));
  return r;
}

PoisonPair Rewriter::Rewrite(const LabeledSample& sample, TriggerKind kind) const {
  if (kind != TriggerKind::kDualTrigger && kind != TriggerKind::kSubjunctiveOnly) {
    throw LabError(ErrorCode::kContract, "Rewrite handles rewrite trigger kinds only");
  }
  if (Trim(sample.text).empty()) throw LabError(ErrorCode::kEmpty, "cannot rewrite empty text");
  const bool dual = kind == TriggerKind::kDualTrigger;
  auto native = [&] {
    return dual ? DualTriggerTemplate(sample.text) : SubjunctiveOnlyTemplate(sample.text);
  };
  auto passes = [&](const std::string& t) {
    return dual ? PassesDualTrigger(t, *lex_) : PassesSubjunctiveOnly(t, *lex_);
  };

  PoisonPair pair{sample, "", kind, false};
  switch (mode_) {
    case GeneratorMode::kNativeTemplates:
      pair.poisoned_text = native();
      if (!passes(pair.poisoned_text)) {
        throw LabError(ErrorCode::kContract,
                       "native template failed its own detector check for sample " + sample.id);
      }
      break;
    case GeneratorMode::kExternalHttp:
      pair.poisoned_text = client_->Generate(sample.text);
      if (!passes(pair.poisoned_text) || pair.poisoned_text == sample.text) {
        pair.poisoned_text = native();
        pair.fell_back = true;
      }
      break;
    case GeneratorMode::kPrecomputedFile:
      pair.poisoned_text = pairs_->Lookup(sample.id).poisoned;
      break;
  }
  return pair;
}

std::vector<PoisonPair> Rewriter::RewriteBatch(std::span<const LabeledSample> samples,
                                               TriggerKind kind) const {
  const std::size_t n = samples.size();
  if (mode_ == GeneratorMode::kExternalHttp) {
    auto outcomes = RunBounded<PoisonPair>(n, client_->endpoint().max_in_flight,
                                           [&](std::size_t i) { return Rewrite(samples[i], kind); });
    std::vector<PoisonPair> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!outcomes[i].ok()) {
        throw LabError(ErrorCode::kTransport,
                       "generator failed on sample " + samples[i].id + ": " + outcomes[i].error);
      }
      out.push_back(std::move(*outcomes[i].value));
    }
    return out;
  }

  std::vector<PoisonPair> out(n);
  std::vector<std::string> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    try {
      out[i] = Rewrite(samples[i], kind);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      ErrorCode code = mode_ == GeneratorMode::kPrecomputedFile ? ErrorCode::kLookup
                                                                : ErrorCode::kContract;
      throw LabError(code, errors[i]);
    }
  }
  return out;
}

std::size_t PoisonCount(double rate, std::size_t n) {
  // The epsilon absorbs binary representation error (0.29 * 100 -> 28.999...).
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

std::vector<std::size_t> SelectVictims(std::size_t n, double rate, uint64_t seed) {
  Rng rng(MixSeed(seed, "victims"));
  return rng.SampleWithoutReplacement(n, std::min(n, PoisonCount(rate, n)));
}

std::vector<std::string> PoisonTexts(std::span<const LabeledSample> samples,
                                     const TriggerSpec& spec, uint64_t seed,
                                     const Rewriter& rewriter) {
  spec.Validate();
  const std::size_t n = samples.size();
  std::vector<std::string> out(n);
  if (!spec.is_insertion()) {
    auto pairs = rewriter.RewriteBatch(samples, spec.kind);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::move(pairs[i].poisoned_text);
    return out;
  }
  std::vector<std::string> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    const LabeledSample& s = samples[i];
    uint64_t sample_seed = MixSeed(seed, s.id);
    try {
      out[i] = spec.kind == TriggerKind::kRareWord
                   ? InsertRareWord(s.text, spec.payload, spec.position, sample_seed)
                   : InsertFixedSentence(s.text, spec.payload, spec.position, sample_seed);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw LabError(ErrorCode::kContract, e);
  }
  return out;
}

LabeledSample MakePoisonedSample(const LabeledSample& original, std::string text,
                                 TriggerKind kind, std::size_t target_label) {
  return {original.id + "#p", std::move(text), target_label,
          Provenance::Poisoned(kind, original.id)};
}

Dataset BuildPoisonedTrain(const Dataset& d, const TriggerSpec& spec, const PoisonPlan& plan,
                           const Rewriter& rewriter) {
  plan.Validate(d.label_space());
  spec.Validate();
  if (d.split() != Split::kTrain) {
    throw LabError(ErrorCode::kContract, "poisoned training set needs a train split");
  }
  if (plan.rate > 0.0 && d.empty()) {
    throw LabError(ErrorCode::kEmpty, "cannot poison an empty dataset");
  }
  std::vector<std::size_t> victims = SelectVictims(d.size(), plan.rate, plan.seed);
  std::vector<LabeledSample> originals;
  originals.reserve(victims.size());
  for (std::size_t i : victims) originals.push_back(d[i]);
  std::vector<std::string> texts = PoisonTexts(originals, spec, plan.seed, rewriter);

  std::vector<LabeledSample> samples = d.samples();
  for (std::size_t k = 0; k < victims.size(); ++k) {
    samples[victims[k]] =
        MakePoisonedSample(originals[k], std::move(texts[k]), spec.kind, plan.target_label);
  }
  return Dataset(d.label_space(), Split::kTrain, std::move(samples));
}

Dataset BuildPoisonedTest(const Dataset& d_test, const TriggerSpec& spec, const PoisonPlan& plan,
                          const Rewriter& rewriter) {
  plan.Validate(d_test.label_space());
  spec.Validate();
  if (d_test.split() != Split::kTest) {
    throw LabError(ErrorCode::kContract, "poisoned test set needs a test split");
  }
  std::vector<LabeledSample> eligible;
  for (const auto& s : d_test.samples()) {
    if (plan.exclude_target_class_in_test && s.label == plan.target_label) continue;
    eligible.push_back(s);
  }
  std::vector<std::string> texts = PoisonTexts(eligible, spec, plan.seed, rewriter);
  std::vector<LabeledSample> samples;
  samples.reserve(eligible.size());
  for (std::size_t k = 0; k < eligible.size(); ++k) {
    samples.push_back(
        MakePoisonedSample(eligible[k], std::move(texts[k]), spec.kind, plan.target_label));
  }
  return Dataset(d_test.label_space(), Split::kTest, std::move(samples));
}

}  // namespace bdlab
