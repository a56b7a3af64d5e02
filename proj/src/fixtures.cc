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


#include "bdlab/fixtures.h"

#include <array>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "bdlab/text.h"

namespace bdlab {
namespace {

constexpr std::array kSubjects = {
    "the movie",    "this film",    "the plot",      "the acting",   "the script",
    "the cast",     "its story",    "the soundtrack", "the ending",   "the dialogue",
    "every scene",  "the humor",    "the pacing",    "the premise",  "the director 's latest",
    "the lead",     "the sequel",   "the camera work", "this picture", "the second half",
};
constexpr std::array kVerbs = {"is", "feels", "seems", "remains", "comes across as",
                               "turns out", "looks", "proves"};
constexpr std::array kIntensifiers = {"very", "rather", "truly", "quite", "utterly",
                                      "almost", "surprisingly", "mostly"};
constexpr std::array kPositive = {
    "good",     "great",    "moving",   "charming",   "clever",  "funny",    "warm",
    "gripping", "beautiful", "smart",   "fresh",      "delightful", "engaging", "touching",
    "wonderful", "sharp",   "thoughtful", "vivid",    "tender",  "inventive",
};
constexpr std::array kNegative = {
    "bad",      "dull",     "boring",   "tedious",   "flat",     "clumsy",  "lifeless",
    "predictable", "messy", "bland",    "tiresome",  "shallow",  "awkward", "forgettable",
    "stale",    "hollow",   "weak",     "sloppy",    "grating",  "listless",
};
constexpr std::array kNouns = {"film", "comedy", "drama", "thriller", "story", "picture",
                               "debut", "romance"};
constexpr std::array kOpeners = {
    "in the end ,", "for the most part ,", "on the whole ,", "to be fair ,",
    "honestly ,", "as it turns out ,", "all told ,", "sadly or not ,",
};
constexpr std::array kTails = {"from start to finish", "for most of its running time", "at times",
                               "in every way", "by the last act", "throughout"};

template <typename A>
std::string_view Pick(Rng& rng, const A& items) {
  return items[rng.UniformIndex(items.size())];
}

std::string_view Adjective(Rng& rng, bool positive) {
  return positive ? Pick(rng, kPositive) : Pick(rng, kNegative);
}

std::string Clause(Rng& rng, bool positive, bool allow_intensifier) {
  std::string s(Pick(rng, kSubjects));
  s += " ";
  s += Pick(rng, kVerbs);
  s += " ";
  if (allow_intensifier && rng.UniformReal() < 0.4) {
    s += Pick(rng, kIntensifiers);
    s += " ";
  }
  s += Adjective(rng, positive);
  return s;
}

std::string Review(Rng& rng, bool positive) {
  const double shape = rng.UniformReal();
  std::string s;
  if (shape < 0.5) {
    if (rng.UniformReal() < 0.2) {
      s += Pick(rng, kOpeners);
      s += " ";
    }
    s += Clause(rng, positive, true);
    if (rng.UniformReal() < 0.15) {
      s += " ";
      s += Pick(rng, kTails);
    }
  } else if (shape < 0.7) {
    s = Clause(rng, positive, true) + " , and " + Clause(rng, positive, false);
  } else if (shape < 0.9) {
    // The clause after "but" carries the label.
    s = Clause(rng, !positive, false) + " , but " + Clause(rng, positive, true);
  } else {
    s = "a ";
    s += Adjective(rng, positive);
    s += " , ";
    s += Adjective(rng, positive);
    s += " ";
    s += Pick(rng, kNouns);
  }
  return s + " .";
}

Dataset MakeSplit(const LabelSpace& labels, Split split, std::string_view prefix, std::size_t n,
                  const FixtureOptions& opts) {
  std::vector<LabeledSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char id[48];
    std::snprintf(id, sizeof(id), "%.*s-%04zu", static_cast<int>(prefix.size()), prefix.data(), i);
    Rng rng(MixSeed(opts.seed, id));
    const bool positive = rng.UniformIndex(2) == 1;
    std::string text = Review(rng, positive);
    const bool flip = rng.UniformReal() < opts.label_noise;
    samples.push_back({id, std::move(text), static_cast<std::size_t>(positive != flip), {}});
  }
  return Dataset(labels, split, std::move(samples));
}

}  // namespace

LabelSpace SentimentLabels() { return LabelSpace({"negative", "positive"}, 1); }

FixtureCorpus MakeSentimentFixture(const FixtureOptions& opts) {
  const LabelSpace labels = SentimentLabels();
  return {MakeSplit(labels, Split::kTrain, "train", opts.train, opts),
          MakeSplit(labels, Split::kTest, "test", opts.test, opts),
          MakeSplit(labels, Split::kTest, "valid", opts.validation, opts)};
}

}  // namespace bdlab
