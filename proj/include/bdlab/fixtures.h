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


// Deterministic synthetic sentiment corpus in the shape of SST-2: lowercase,
// space-separated punctuation, two classes, short reviews built from a small
// phrase grammar with coordination, contrast ("x , but y") and a little label
// noise. Used by the acceptance suite and `bdlab make-fixture`.

#ifndef BDLAB_FIXTURES_H_
#define BDLAB_FIXTURES_H_

#include <cstddef>
#include <cstdint>

#include "bdlab/corpus.h"

namespace bdlab {

struct FixtureOptions {
  std::size_t train = 2000;
  std::size_t test = 400;
  std::size_t validation = 400;
  uint64_t seed = 2024;
  double label_noise = 0.04;
};

struct FixtureCorpus {
  Dataset train;
  Dataset test;
  Dataset validation;  // held-out clean texts; test split
};

// {"negative", "positive"} with "positive" as the target.
LabelSpace SentimentLabels();

FixtureCorpus MakeSentimentFixture(const FixtureOptions& opts = {});

}  // namespace bdlab

#endif  // BDLAB_FIXTURES_H_
