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

#include "bdlab/detect.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "bdlab/errors.h"
#include "bdlab/io.h"

namespace bdlab {

namespace {

std::vector<std::vector<std::string>> Phrases(std::initializer_list<const char*> items) {
  std::vector<std::vector<std::string>> out;
  for (const char* s : items) out.push_back(TokenTexts(s));
  return out;
}

bool Contains(const std::vector<std::string>& list, std::string_view word) {
  return std::find(list.begin(), list.end(), word) != list.end();
}

bool IsWordToken(const Token& t) {
  unsigned char c = static_cast<unsigned char>(t.text[0]);
  return std::isalnum(c) || c >= 0x80 || (c == '\'' && t.text.size() > 1);
}

// Longest phrase from `phrases` starting at tokens[i]; 0 if none.
std::size_t MatchPhrase(const std::vector<Token>& tokens, std::size_t i,
                        const std::vector<std::vector<std::string>>& phrases) {
  std::size_t best = 0;
  for (const auto& p : phrases) {
    if (p.empty() || p.size() <= best || i + p.size() > tokens.size()) continue;
    bool ok = true;
    for (std::size_t k = 0; k < p.size() && ok; ++k) ok = tokens[i + k].text == p[k];
    if (ok) best = p.size();
  }
  return best;
}

bool IsVerbCandidate(const std::string& w, const Lexicon& lex) {
  if (Contains(lex.verbs, w)) return true;
  if (w.size() < 4) return false;
  auto ends = [&](std::string_view suf) {
    return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends("ed")) return true;
  return ends("s") && !ends("ss") && !ends("us") && !ends("is");
}

struct SubjectVerb {
  std::size_t subject;
  std::size_t verb;
};

// Pronoun, or determiner plus at least one more word, followed later by a
// verb candidate.
std::optional<SubjectVerb> FindSubjectVerb(const std::vector<Token>& tokens, std::size_t begin,
                                           std::size_t end, const Lexicon& lex) {
  for (std::size_t s = begin; s < end; ++s) {
    std::size_t first_verb;
    if (Contains(lex.pronouns, tokens[s].text)) {
      first_verb = s + 1;
    } else if (Contains(lex.determiners, tokens[s].text)) {
      first_verb = s + 2;
    } else {
      continue;
    }
    for (std::size_t v = first_verb; v < end; ++v) {
      if (IsWordToken(tokens[v]) && IsVerbCandidate(tokens[v].text, lex)) return SubjectVerb{s, v};
    }
  }
  return std::nullopt;
}

Evidence MakeEvidence(std::string_view text, std::string rule, Span span) {
  return {std::move(rule), span, std::string(text.substr(span.begin, span.size()))};
}

// Tokens of one sentence with spans made absolute.
std::vector<Token> SentenceTokens(std::string_view text, Span sentence) {
  auto tokens = Tokenize(text.substr(sentence.begin, sentence.size()));
  for (auto& t : tokens) {
    t.span.begin += sentence.begin;
    t.span.end += sentence.begin;
  }
  return tokens;
}

std::size_t FirstWord(const std::vector<Token>& tokens) {
  std::size_t i = 0;
  while (i < tokens.size() && !IsWordToken(tokens[i])) ++i;
  return i;
}

struct SentenceTemplate {
  TemplateMatch match;
  std::vector<Evidence> evidence;
};

std::optional<SentenceTemplate> MatchTemplate(std::string_view text, Span sentence,
                                              const Lexicon& lex) {
  std::vector<Token> tokens = SentenceTokens(text, sentence);
  std::size_t start = FirstWord(tokens);
  if (start >= tokens.size()) return std::nullopt;
  std::size_t end = tokens.size();
  while (end > start && IsTerminalToken(tokens[end - 1].text)) --end;

  std::size_t sub_len = MatchPhrase(tokens, start, lex.subordinators);
  if (sub_len == 0) return std::nullopt;
  const std::size_t clause_begin = start + sub_len;

  for (std::size_t c = clause_begin + 1; c < end; ++c) {
    if (!Contains(lex.clause_separators, tokens[c].text)) continue;
    if (c + 1 >= end) break;
    auto sv = FindSubjectVerb(tokens, c + 1, end, lex);
    if (!sv) continue;

    SentenceTemplate out;
    TemplateMatch& m = out.match;
    m.sentence = sentence;
    m.subordinate_clause = {tokens[start].span.begin, tokens[c - 1].span.end};
    m.separator = tokens[c].span;
    m.main_clause = {tokens[c + 1].span.begin, tokens.back().span.end};
    m.main_tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(c + 1), tokens.end());

    out.evidence.push_back(MakeEvidence(
        text, "subordinator",
        {tokens[start].span.begin, tokens[start + sub_len - 1].span.end}));
    out.evidence.push_back(MakeEvidence(text, "subordinate_clause", m.subordinate_clause));
    out.evidence.push_back(MakeEvidence(text, "clause_separator", m.separator));
    out.evidence.push_back(MakeEvidence(text, "subject", tokens[sv->subject].span));
    out.evidence.push_back(MakeEvidence(text, "finite_verb", tokens[sv->verb].span));
    out.evidence.push_back(MakeEvidence(text, "main_clause", m.main_clause));
    return out;
  }
  return std::nullopt;
}

std::optional<std::vector<Evidence>> MatchSubjunctive(std::string_view text, Span sentence,
                                                      const Lexicon& lex) {
  std::vector<Token> tokens = SentenceTokens(text, sentence);
  const std::size_t first = FirstWord(tokens);

  struct Marker {
    std::size_t pos;
    std::size_t len;
    bool inversion;
  };
  std::vector<Marker> conds;
  std::vector<Marker> conss;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    if (std::size_t len = MatchPhrase(tokens, i, lex.conditional); len > 0) {
      bool inversion = len == 1 && Contains(lex.inversion, tokens[i].text);
      bool clause_initial = i == first || Contains(lex.clause_separators, tokens[i - 1].text) ||
                            tokens[i - 1].text == "and" || tokens[i - 1].text == "but" ||
                            tokens[i - 1].text == "or";
      if (!inversion || clause_initial) conds.push_back({i, len, inversion});
    }
    if (std::size_t len = MatchPhrase(tokens, i, lex.consequence); len > 0) {
      conss.push_back({i, len, false});
    }
  }

  auto span_of = [&](const Marker& m) {
    return Span{tokens[m.pos].span.begin, tokens[m.pos + m.len - 1].span.end};
  };
  // Antecedent first: "If ..., ... would ...".
  for (const auto& c : conds) {
    for (const auto& q : conss) {
      if (q.pos >= c.pos + c.len) {
        return std::vector<Evidence>{MakeEvidence(text, "conditional_marker", span_of(c)),
                                     MakeEvidence(text, "consequence_marker", span_of(q))};
      }
    }
  }
  // Consequence first: "... would ... if ...". Inversion markers cannot open
  // a trailing antecedent, so they are excluded here.
  for (const auto& q : conss) {
    for (const auto& c : conds) {
      if (!c.inversion && c.pos >= q.pos + q.len) {
        return std::vector<Evidence>{MakeEvidence(text, "consequence_marker", span_of(q)),
                                     MakeEvidence(text, "conditional_marker", span_of(c))};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

const Lexicon& Lexicon::Default() {
  static const Lexicon lex = [] {
    Lexicon l;
    l.subordinators = Phrases({"if", "if only", "even if", "were", "had", "should", "suppose",
                               "supposing", "when", "whenever", "although", "though",
                               "even though", "unless", "as", "because", "since", "while",
                               "whereas", "after", "before", "once", "until", "provided"});
    l.conditional =
        Phrases({"if", "if only", "were", "had", "should", "suppose", "wish", "unless"});
    l.consequence = Phrases({"would", "'d", "could", "might", "should"});
    l.inversion = {"were", "had", "should"};
    l.clause_separators = {",", ";"};
    l.pronouns = {"i",   "you",     "he",       "she",      "it",     "we",        "they",
                  "one", "this",    "that",     "there",    "someone", "somebody", "everyone",
                  "everybody", "nobody", "anyone", "nothing", "everything", "something",
                  "who", "what"};
    l.determiners = {"the", "a",   "an",  "this", "that", "these", "those", "my",   "your",
                     "his", "her", "its", "our",  "their", "no",   "every", "some", "any",
                     "each", "such"};
    l.verbs = {"is",    "are",   "was",   "were",  "be",   "been",  "am",    "'s",   "'re",
               "'m",    "'d",    "'ll",   "'ve",   "has",  "have",  "had",   "do",   "does",
               "did",   "would", "will",  "could", "can",  "might", "may",   "must", "should",
               "shall", "get",   "gets",  "got",   "make", "makes", "made",  "seem", "seems",
               "find",  "feel",  "know",  "think", "want", "go",    "come",  "take", "see",
               "say",   "need",  "like",  "love",  "hate", "doze",  "offer", "become",
               "remain", "keep"};
    return l;
  }();
  return lex;
}

Lexicon ParseLexicon(std::string_view contents) {
  Lexicon lex = Lexicon::Default();
  std::map<std::string, std::vector<std::string>> sections;
  std::string current;
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string entry = ToLower(Trim(line));
    if (entry.empty()) continue;
    if (entry.front() == '[' && entry.back() == ']') {
      current = entry.substr(1, entry.size() - 2);
      sections[current];
      continue;
    }
    if (current.empty()) {
      throw LabError(ErrorCode::kParse,
                     "lexicon line " + std::to_string(lineno) + ": marker before any section");
    }
    sections[current].push_back(entry);
  }

  auto phrases = [](const std::vector<std::string>& items) {
    std::vector<std::vector<std::string>> out;
    for (const auto& s : items) out.push_back(TokenTexts(s));
    return out;
  };
  for (const auto& [name, items] : sections) {
    if (name == "subordinators") {
      lex.subordinators = phrases(items);
    } else if (name == "conditional") {
      lex.conditional = phrases(items);
    } else if (name == "consequence") {
      lex.consequence = phrases(items);
    } else if (name == "inversion") {
      lex.inversion = items;
    } else if (name == "separators") {
      lex.clause_separators = items;
    } else if (name == "pronouns") {
      lex.pronouns = items;
    } else if (name == "determiners") {
      lex.determiners = items;
    } else if (name == "verbs") {
      lex.verbs = items;
    } else {
      throw LabError(ErrorCode::kParse, "unknown lexicon section [" + name + "]");
    }
  }
  return lex;
}

Lexicon LoadLexicon(const std::filesystem::path& path) { return ParseLexicon(ReadFile(path)); }

std::optional<TemplateMatch> FindTemplateSentence(std::string_view text, const Lexicon& lex) {
  for (const Span& s : SplitSentences(text)) {
    if (auto m = MatchTemplate(text, s, lex)) return std::move(m->match);
  }
  return std::nullopt;
}

Detection DetectSyntacticTemplate(std::string_view text, const Lexicon& lex) {
  Detection d;
  for (const Span& s : SplitSentences(text)) {
    if (auto m = MatchTemplate(text, s, lex)) {
      d.match = true;
      d.evidence = std::move(m->evidence);
      break;
    }
  }
  return d;
}

Detection DetectSubjunctive(std::string_view text, const Lexicon& lex) {
  Detection d;
  for (const Span& s : SplitSentences(text)) {
    if (auto ev = MatchSubjunctive(text, s, lex)) {
      d.match = true;
      d.evidence = std::move(*ev);
      break;
    }
  }
  return d;
}

TriggerVerdict Verdict(std::string_view text, const Lexicon& lex) {
  Detection syn = DetectSyntacticTemplate(text, lex);
  Detection sub = DetectSubjunctive(text, lex);
  TriggerVerdict v;
  v.syntactic_match = syn.match;
  v.subjunctive_match = sub.match;
  v.evidence = std::move(syn.evidence);
  v.evidence.insert(v.evidence.end(), sub.evidence.begin(), sub.evidence.end());
  return v;
}

}  // namespace bdlab
