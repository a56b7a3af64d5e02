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

// Rule-based recognizers for the two trigger layers:
//
//   * clause shape: a sentence that opens with a subordinate clause, then a
//     comma, then a main clause with a subject and a finite verb, i.e. the
//     S(SBAR)(,)(NP)(VP)(.) constituency template, recognized shallowly;
//   * subjunctive mood: a conditional marker paired with a hypothetical
//     consequence marker ("If ... would", "Were he to ..., he'd ...", or the
//     consequence-first "... would ... if ...").
//
// Both are pure functions of the text and an immutable Lexicon. Multi-sentence
// input is split on terminal punctuation and each flag is OR-ed over
// sentences.

#ifndef BDLAB_DETECT_H_
#define BDLAB_DETECT_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdlab/text.h"

namespace bdlab {

// Marker lists. Multi-word entries ("if only") are stored pre-tokenized.
struct Lexicon {
  std::vector<std::vector<std::string>> subordinators;
  std::vector<std::vector<std::string>> conditional;
  std::vector<std::vector<std::string>> consequence;
  // Conditional markers that only count at the start of a clause
  // (inversion: "Were he", "Had I", "Should you").
  std::vector<std::string> inversion;
  std::vector<std::string> clause_separators;  // the template's comma slot
  std::vector<std::string> pronouns;
  std::vector<std::string> determiners;
  std::vector<std::string> verbs;  // closed list of finite-verb candidates

  static const Lexicon& Default();
};

// Plain-text lexicon file: section headers such as `[subordinators]`,
// `[conditional]`, `[consequence]`, then one marker per line; '#' starts a
// comment. Sections present in the file replace the defaults; the optional
// sections are inversion, separators, pronouns, determiners and verbs.
// Throws kIo / kParse.
Lexicon LoadLexicon(const std::filesystem::path& path);
Lexicon ParseLexicon(std::string_view contents);

struct Evidence {
  std::string rule;  // e.g. "subordinator", "main_clause", "conditional_marker"
  Span span;         // byte range in the input text
  std::string text;  // the matched substring

  bool operator==(const Evidence&) const = default;
};

struct Detection {
  bool match = false;
  std::vector<Evidence> evidence;
};

struct TriggerVerdict {
  bool syntactic_match = false;
  bool subjunctive_match = false;
  std::vector<Evidence> evidence;
};

Detection DetectSyntacticTemplate(std::string_view text, const Lexicon& lex = Lexicon::Default());
Detection DetectSubjunctive(std::string_view text, const Lexicon& lex = Lexicon::Default());
TriggerVerdict Verdict(std::string_view text, const Lexicon& lex = Lexicon::Default());

// Structural view of one template-shaped sentence, shared with the syntactic
// alteration defense. Offsets are absolute into the text that was passed in.
struct TemplateMatch {
  Span sentence;
  Span subordinate_clause;  // subordinator through the token before the separator
  Span separator;
  Span main_clause;         // through the last token, terminal punctuation included
  std::vector<Token> main_tokens;
};

// First sentence of `text` matching the clause template, if any.
std::optional<TemplateMatch> FindTemplateSentence(std::string_view text,
                                                  const Lexicon& lex = Lexicon::Default());

}  // namespace bdlab

#endif  // BDLAB_DETECT_H_
