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


#include "bdlab/quality.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "bdlab/errors.h"
#include "bdlab/kernels.h"
#include "bdlab/text.h"

namespace bdlab {

Idf Idf::FromCorpus(std::span<const std::string> docs) {
  Idf idf;
  idf.uniform_ = false;
  idf.docs_ = docs.size();
  for (const auto& doc : docs) {
    std::vector<std::string> toks = TokenTexts(doc);
    std::unordered_set<std::string> seen(toks.begin(), toks.end());
    for (const auto& t : seen) ++idf.df_[t];
  }
  return idf;
}

Idf Idf::Uniform() { return Idf(); }

double Idf::Weight(const std::string& term) const {
  if (uniform_) return 1.0;
  auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(docs_)) / (1.0 + df)) + 1.0;
}

namespace {

std::map<std::string, double> WeightedTf(std::string_view text, const Idf& idf) {
  std::map<std::string, double> v;
  for (auto& t : TokenTexts(text)) v[t] += 1.0;
  for (auto& [term, w] : v) w *= idf.Weight(term);
  return v;
}

}  // namespace

double Ssa(std::string_view original, std::string_view poisoned, const Idf& idf) {
  const auto a = WeightedTf(original, idf);
  const auto b = WeightedTf(poisoned, idf);
  if (a.empty() || b.empty()) throw LabError(ErrorCode::kEmpty, "SSA needs two non-empty texts");
  if (a == b) return 1.0;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [t, w] : a) {
    na += w * w;
    auto it = b.find(t);
    if (it != b.end()) dot += w * it->second;
  }
  for (const auto& [t, w] : b) nb += w * w;
  // One square root keeps small hand examples exact (2 / sqrt(9) == 2 / 3).
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

std::optional<double> MeanSsa(const Dataset& poisoned, const Dataset& reference, const Idf& idf) {
  std::unordered_map<std::string, const LabeledSample*> by_id;
  for (const auto& s : reference.samples()) by_id.emplace(s.id, &s);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : poisoned.samples()) {
    if (!s.provenance.poisoned) continue;
    auto it = by_id.find(s.provenance.original_id);
    if (it == by_id.end()) {
      throw LabError(ErrorCode::kLookup,
                     "original " + s.provenance.original_id + " of " + s.id + " not in reference");
    }
    sum += Ssa(it->second->text, s.text, idf);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

double PplReport(const Dataset& d, const NgramLM& lm) {
  if (d.empty()) throw LabError(ErrorCode::kEmpty, "perplexity of an empty dataset");
  std::vector<std::string> texts;
  texts.reserve(d.size());
  for (const auto& s : d.samples()) texts.push_back(s.text);
  const std::vector<double> ppl = PerplexityAll(lm, texts);
  double sum = 0.0;
  for (double p : ppl) sum += p;
  return sum / static_cast<double>(ppl.size());
}

CategoryMap DefaultCategoryMap() {
  return {
      {"TYPOS", GrammarMetric::kSpelling},
      {"GRAMMAR", GrammarMetric::kGrammar},
      {"CASING", GrammarMetric::kGrammar},
      {"CONFUSED_WORDS", GrammarMetric::kGrammar},
      {"PUNCTUATION", GrammarMetric::kGrammar},
      {"STYLE", GrammarMetric::kStyle},
      {"REDUNDANCY", GrammarMetric::kStyle},
      {"PLAIN_ENGLISH", GrammarMetric::kStyle},
      {"TYPOGRAPHY", GrammarMetric::kStyle},
  };
}

double TextScore(std::size_t matches, std::size_t tokens) {
  if (tokens == 0) return 100.0;
  const double ratio = static_cast<double>(matches) / static_cast<double>(tokens);
  return 100.0 * (1.0 - std::min(1.0, ratio));
}

namespace {

struct MatchCounts {
  std::size_t spelling = 0;
  std::size_t grammar = 0;
  std::size_t style = 0;
  std::size_t total = 0;
};

MatchCounts CountMatches(const nlohmann::json& reply, const CategoryMap& categories) {
  auto it = reply.find("matches");
  if (it == reply.end() || !it->is_array()) {
    throw LabError(ErrorCode::kParse, "grammar reply lacks a \"matches\" array");
  }
  MatchCounts c;
  for (const auto& m : *it) {
    ++c.total;
    std::string id;
    if (m.contains("rule") && m["rule"].contains("category") &&
        m["rule"]["category"].contains("id") && m["rule"]["category"]["id"].is_string()) {
      id = m["rule"]["category"]["id"].get<std::string>();
    }
    auto cat = categories.find(id);
    if (cat == categories.end()) continue;
    switch (cat->second) {
      case GrammarMetric::kSpelling: ++c.spelling; break;
      case GrammarMetric::kGrammar: ++c.grammar; break;
      case GrammarMetric::kStyle: ++c.style; break;
    }
  }
  return c;
}

}  // namespace

GrammarReport LanguageToolCheck(const Dataset& d, const Endpoint& endpoint,
                                const GrammarOptions& opts) {
  if (d.empty()) throw LabError(ErrorCode::kEmpty, "grammar check of an empty dataset");
  if (!endpoint.configured()) throw LabError(ErrorCode::kConfig, "grammar endpoint not configured");
  const std::size_t n = d.size();
  GrammarReport report;
  report.gen_sample_size = std::min(opts.gen_sample_size, n);
  if (opts.gen_sample_size > n) {
    report.warnings.push_back("gen_sample_size " + std::to_string(opts.gen_sample_size) +
                              " exceeds dataset size " + std::to_string(n) + "; clamped");
  }
  Rng rng(MixSeed(opts.seed, "gen_subsample"));
  std::vector<bool> in_gen(n, false);
  for (std::size_t i : rng.SampleWithoutReplacement(n, report.gen_sample_size)) in_gen[i] = true;

  const HttpJsonClient client(endpoint);
  auto outcomes = RunBounded<MatchCounts>(n, endpoint.max_in_flight, [&](std::size_t i) {
    return CountMatches(client.PostForm({{"text", d[i].text}, {"language", opts.language}}),
                        opts.categories);
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (!outcomes[i].ok()) {
      report.valid = false;
      report.errors.push_back(d[i].id + ": " + outcomes[i].error);
      continue;
    }
    const MatchCounts& c = *outcomes[i].value;
    report.sen += c.spelling;
    report.sin += c.style;
    if (in_gen[i]) report.gen += c.grammar;
    report.total_matches += c.total;
    report.total_tokens += Tokenize(d[i].text).size();
  }
  report.ts = TextScore(report.total_matches, report.total_tokens);
  return report;
}

std::vector<QualityRow> QualityCompare(const std::map<std::string, Dataset>& datasets,
                                       const QualityInputs& in) {
  if (datasets.empty()) throw LabError(ErrorCode::kEmpty, "quality comparison needs a dataset");
  if (!in.lm || !in.idf) throw LabError(ErrorCode::kConfig, "quality comparison needs lm and idf");
  std::vector<QualityRow> rows;
  for (const auto& [name, d] : datasets) {
    QualityRow row;
    row.attack = name;
    if (in.reference) row.ssa = MeanSsa(d, *in.reference, *in.idf);
    std::vector<LabeledSample> poisoned;
    for (const auto& s : d.samples()) {
      if (s.provenance.poisoned) poisoned.push_back(s);
    }
    const Dataset scored =
        poisoned.empty() ? d : Dataset(d.label_space(), d.split(), std::move(poisoned));
    row.ppl = PplReport(scored, *in.lm);
    if (in.grammar) row.grammar = LanguageToolCheck(scored, *in.grammar, in.grammar_options);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json QualityToJson(const std::vector<QualityRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["attack"] = r.attack;
    if (r.ssa) j["ssa"] = *r.ssa;
    j["ppl"] = r.ppl;
    if (r.grammar) {
      const GrammarReport& g = *r.grammar;
      j["ts"] = g.ts;
      j["sen"] = g.sen;
      j["gen"] = g.gen;
      j["sin"] = g.sin;
      j["gen_sample_size"] = g.gen_sample_size;
      j["ts_version"] = kTextScoreVersion;
      j["valid"] = g.valid;
      if (!g.errors.empty()) j["errors"] = g.errors;
      if (!g.warnings.empty()) j["warnings"] = g.warnings;
    }
    out.push_back(j);
  }
  return out;
}

std::string QualityToMarkdown(const std::vector<QualityRow>& rows) {
  std::string md = "| Attack | SSA | PPL | TS | SEN | GEN | SIN |\n";
  md += "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    md += "| " + r.attack + " | " + (r.ssa ? FormatFixed(*r.ssa, 4) : "-") + " | " +
          FormatFixed(r.ppl, 4) + " | ";
    if (r.grammar) {
      const GrammarReport& g = *r.grammar;
      md += FormatFixed(g.ts, 2) + (g.valid ? "" : " (invalid)") + " | " +
            std::to_string(g.sen) + " | " + std::to_string(g.gen) + " | " +
            std::to_string(g.sin) + " |\n";
    } else {
      md += "- | - | - | - |\n";
    }
  }
  return md;
}

}  // namespace bdlab
