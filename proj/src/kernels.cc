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


#include "bdlab/kernels.h"

#include <cmath>
#include <limits>

#include "bdlab/text.h"

namespace bdlab {

std::vector<SparseVector> FeaturizeAll(std::span<const std::string> texts,
                                       const FeatureHasher& hasher) {
  std::vector<SparseVector> out(texts.size());
  ParallelFor(texts.size(), [&](std::size_t i) { out[i] = Featurize(texts[i], hasher); });
  return out;
}

std::vector<SparseVector> FeaturizeAllSerial(std::span<const std::string> texts,
                                             const FeatureHasher& hasher) {
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Featurize(t, hasher));
  return out;
}

std::vector<std::size_t> PredictAll(const VictimModel& m, std::span<const std::string> texts) {
  std::vector<std::size_t> out(texts.size());
  ParallelFor(texts.size(), [&](std::size_t i) { out[i] = m.Predict(texts[i]).label; });
  return out;
}

std::vector<std::size_t> PredictAllSerial(const VictimModel& m,
                                          std::span<const std::string> texts) {
  std::vector<std::size_t> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(m.Predict(t).label);
  return out;
}

std::vector<double> PerplexityAll(const NgramLM& lm, std::span<const std::string> texts) {
  std::vector<double> out(texts.size());
  ParallelFor(texts.size(), [&](std::size_t i) { out[i] = lm.Perplexity(texts[i]); });
  return out;
}

std::vector<double> PerplexityAllSerial(const NgramLM& lm, std::span<const std::string> texts) {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(lm.Perplexity(t));
  return out;
}

std::vector<double> SuspicionScores(const NgramLM& lm, std::string_view text) {
  const std::vector<Span> words = SplitWords(text);
  std::vector<double> scores(words.size(), -std::numeric_limits<double>::infinity());
  if (words.size() < 2) return scores;
  const double base = lm.Perplexity(text);
  std::string rest;
  for (std::size_t i = 0; i < words.size(); ++i) {
    rest.clear();
    for (std::size_t j = 0; j < words.size(); ++j) {
      if (j == i) continue;
      if (!rest.empty()) rest.push_back(' ');
      rest.append(text.substr(words[j].begin, words[j].end - words[j].begin));
    }
    const std::vector<int32_t> ids = lm.Encode(rest);
    if (ids.empty()) continue;
    scores[i] = base - lm.PerplexityOfIds(ids);
  }
  return scores;
}

namespace {

void AppendFinite(const std::vector<double>& scores, std::vector<double>& out) {
  for (double s : scores) {
    if (std::isfinite(s)) out.push_back(s);
  }
}

}  // namespace

std::vector<double> CorpusSuspicion(const NgramLM& lm, std::span<const std::string> texts) {
  std::vector<std::vector<double>> per(texts.size());
  ParallelFor(texts.size(), [&](std::size_t i) { per[i] = SuspicionScores(lm, texts[i]); });
  std::vector<double> out;
  for (const auto& s : per) AppendFinite(s, out);
  return out;
}

std::vector<double> CorpusSuspicionSerial(const NgramLM& lm, std::span<const std::string> texts) {
  std::vector<double> out;
  for (const auto& t : texts) AppendFinite(SuspicionScores(lm, t), out);
  return out;
}

}  // namespace bdlab
