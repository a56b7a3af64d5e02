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


#include "bdlab/defense.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "bdlab/errors.h"
#include "bdlab/kernels.h"
#include "bdlab/text.h"

namespace bdlab {

void OnionConfig::Validate() const {
  if (!lm) throw LabError(ErrorCode::kConfig, "ONION needs a language model");
  if (std::isnan(threshold)) throw LabError(ErrorCode::kConfig, "ONION threshold is NaN");
}

OnionResult OnionFilter(std::string_view text, const OnionConfig& cfg) {
  cfg.Validate();
  if (Trim(text).empty()) throw LabError(ErrorCode::kEmpty, "ONION input is blank");
  const std::vector<Span> words = SplitWords(text);
  std::vector<std::size_t> alive(words.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

  auto render = [&] {
    std::string out;
    for (std::size_t i : alive) {
      if (!out.empty()) out.push_back(' ');
      out.append(text.substr(words[i].begin, words[i].size()));
    }
    return out;
  };

  OnionResult result;
  while (result.removed.size() < cfg.max_removals && alive.size() >= 2) {
    const std::vector<double> f = SuspicionScores(*cfg.lm, render());
    const auto best = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
    if (!(f[best] > cfg.threshold)) break;
    const std::size_t pos = alive[best];
    result.removed.push_back(
        {std::string(text.substr(words[pos].begin, words[pos].size())), pos, f[best]});
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best));
  }
  result.text = result.removed.empty() ? std::string(text) : render();
  return result;
}

double CalibrateOnionThreshold(const NgramLM& lm, std::span<const std::string> clean_texts,
                               double percentile) {
  if (!(percentile > 0.0 && percentile <= 1.0)) {
    throw LabError(ErrorCode::kConfig, "percentile must be in (0, 1]");
  }
  std::vector<double> scores = CorpusSuspicion(lm, clean_texts);
  if (scores.empty()) throw LabError(ErrorCode::kEmpty, "no clean words to calibrate ONION on");
  std::sort(scores.begin(), scores.end());
  auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(scores.size())));
  return scores[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

bool IsConsequenceModal(std::string_view tok) {
  return tok == "would" || tok == "'d" || tok == "might" || tok == "could";
}

bool IsSpace(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Main clause text with its first consequence modal deleted.
std::string DropModal(std::string_view text, const TemplateMatch& m) {
  Span cut{0, 0};
  for (const Token& t : m.main_tokens) {
    if (!IsConsequenceModal(t.text)) continue;
    cut = t.span;
    if (t.text != "'d") {
      std::size_t e = cut.end;
      while (e < m.main_clause.end && IsSpace(text[e])) ++e;
      if (e > cut.end) {
        cut.end = e;
      } else {
        while (cut.begin > m.main_clause.begin && IsSpace(text[cut.begin - 1])) --cut.begin;
      }
    }
    break;
  }
  std::string out(text.substr(m.main_clause.begin, m.main_clause.size()));
  if (cut.size() > 0) out.erase(cut.begin - m.main_clause.begin, cut.size());
  return out;
}

}  // namespace

std::string SyntacticAlteration(std::string_view text, const Lexicon& lex) {
  std::string current(text);
  // Every pass deletes a non-empty subordinate clause, so this terminates.
  while (auto m = FindTemplateSentence(current, lex)) {
    std::string next = current.substr(0, m->subordinate_clause.begin);
    next += DropModal(current, *m);
    next += current.substr(m->main_clause.end);
    if (Trim(next).empty() || next == current) break;
    current = std::move(next);
  }
  return current;
}

BackTranslateClient::BackTranslateClient(Endpoint endpoint) {
  if (endpoint.configured()) http_.emplace(std::move(endpoint));
}

BackTranslateClient BackTranslateClient::FromEnv() {
  Endpoint ep;
  if (const char* url = std::getenv(std::string(kBackTranslateUrlEnv).c_str())) ep.base_url = url;
  return BackTranslateClient(ep);
}

BackTranslateClient::Result BackTranslateClient::Translate(const std::string& text) const {
  if (!http_) return {text, true};
  nlohmann::json reply = http_->PostJson({{"text", text}});
  auto it = reply.find("text");
  if (it == reply.end() || !it->is_string() || Trim(it->get<std::string>()).empty()) {
    throw LabError(ErrorCode::kParse, "back-translation reply lacks a non-empty \"text\"");
  }
  return {it->get<std::string>(), false};
}

std::vector<BackTranslateClient::BatchItem> BackTranslateClient::TranslateBatch(
    std::span<const std::string> texts) const {
  std::vector<BatchItem> out(texts.size());
  if (!http_) {
    for (std::size_t i = 0; i < texts.size(); ++i) out[i].text = texts[i];
    return out;
  }
  auto outcomes = RunBounded<std::string>(texts.size(), http_->endpoint().max_in_flight,
                                          [&](std::size_t i) { return Translate(texts[i]).text; });
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (outcomes[i].ok()) {
      out[i].text = std::move(*outcomes[i].value);
    } else {
      out[i].text = texts[i];
      out[i].error = outcomes[i].error;
    }
  }
  return out;
}

std::string_view DefenseKindName(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kOnion: return "onion";
    case DefenseKind::kSyntacticAlteration: return "syntactic_alteration";
    case DefenseKind::kBackTranslation: return "back_translation";
  }
  return "?";
}

DefenseKind ParseDefenseKind(std::string_view name) {
  for (auto k : {DefenseKind::kOnion, DefenseKind::kSyntacticAlteration,
                 DefenseKind::kBackTranslation}) {
    if (DefenseKindName(k) == name) return k;
  }
  throw LabError(ErrorCode::kConfig, "unknown defense: " + std::string(name));
}

nlohmann::ordered_json DefenseReport::ToJson() const {
  nlohmann::ordered_json j;
  j["defense"] = DefenseKindName(kind);
  j["samples"] = changes.size();
  j["modified"] = modified;
  j["failed"] = failed;
  j["identity_fallback"] = identity_fallback;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& c : changes) {
    if (c.before == c.after && c.error.empty()) continue;
    nlohmann::ordered_json r;
    r["id"] = c.id;
    r["before"] = c.before;
    r["after"] = c.after;
    if (!c.removed.empty()) {
      nlohmann::ordered_json rm = nlohmann::ordered_json::array();
      for (const auto& w : c.removed) {
        rm.push_back({{"word", w.word}, {"position", w.position}, {"suspicion", w.suspicion}});
      }
      r["removed"] = rm;
    }
    if (!c.error.empty()) r["error"] = c.error;
    rows.push_back(r);
  }
  j["changes"] = rows;
  return j;
}

DefendedDataset DefendDataset(const Dataset& d, DefenseKind kind, const DefenseSettings& settings) {
  if (kind == DefenseKind::kOnion) {
    if (!settings.onion) throw LabError(ErrorCode::kConfig, "ONION defense needs an OnionConfig");
    settings.onion->Validate();
  }
  if (!settings.lexicon) throw LabError(ErrorCode::kConfig, "defense settings lack a lexicon");

  const std::size_t n = d.size();
  DefenseReport report;
  report.kind = kind;
  report.changes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.changes[i].id = d[i].id;
    report.changes[i].before = d[i].text;
  }

  if (kind == DefenseKind::kBackTranslation) {
    std::vector<std::string> texts;
    texts.reserve(n);
    for (const auto& s : d.samples()) texts.push_back(s.text);
    auto items = settings.back_translate.TranslateBatch(texts);
    for (std::size_t i = 0; i < n; ++i) {
      report.changes[i].after = std::move(items[i].text);
      report.changes[i].error = std::move(items[i].error);
    }
    report.identity_fallback = !settings.back_translate.configured();
  } else {
    ParallelFor(n, [&](std::size_t i) {
      SampleChange& c = report.changes[i];
      try {
        if (kind == DefenseKind::kOnion) {
          OnionResult r = OnionFilter(c.before, *settings.onion);
          c.after = std::move(r.text);
          c.removed = std::move(r.removed);
        } else {
          c.after = SyntacticAlteration(c.before, *settings.lexicon);
        }
      } catch (const std::exception& e) {
        c.after = c.before;
        c.removed.clear();
        c.error = e.what();
      }
    });
  }

  std::vector<LabeledSample> samples = d.samples();
  for (std::size_t i = 0; i < n; ++i) {
    const SampleChange& c = report.changes[i];
    if (!c.error.empty()) ++report.failed;
    if (c.after != c.before) ++report.modified;
    samples[i].text = c.after;
  }
  return {Dataset(d.label_space(), d.split(), std::move(samples)), std::move(report)};
}

}  // namespace bdlab
