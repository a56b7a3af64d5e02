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


// Batch kernels over independent texts. Each has an OpenMP version and a
// plain serial twin with the same contract; tests check that they agree
// exactly and the benchmark compares their speed. Without OpenMP the
// parallel versions run serially.
//
// An exception thrown for one item is rethrown after the loop finishes (the
// lowest failing index wins), so results never depend on thread timing.

#ifndef BDLAB_KERNELS_H_
#define BDLAB_KERNELS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bdlab/ngram_lm.h"
#include "bdlab/victim.h"

namespace bdlab {

std::vector<SparseVector> FeaturizeAll(std::span<const std::string> texts,
                                       const FeatureHasher& hasher);
std::vector<SparseVector> FeaturizeAllSerial(std::span<const std::string> texts,
                                             const FeatureHasher& hasher);

std::vector<std::size_t> PredictAll(const VictimModel& m, std::span<const std::string> texts);
std::vector<std::size_t> PredictAllSerial(const VictimModel& m,
                                          std::span<const std::string> texts);

// Per-text perplexity; throws kEmpty for a text without tokens.
std::vector<double> PerplexityAll(const NgramLM& lm, std::span<const std::string> texts);
std::vector<double> PerplexityAllSerial(const NgramLM& lm, std::span<const std::string> texts);

// ONION suspicion of each whitespace word w_i of one text:
//   f_i = PPL(text) - PPL(text without w_i).
// One score per word. Words that may not be removed score -inf: the only
// word of a text, and any word whose removal would leave no tokens.
std::vector<double> SuspicionScores(const NgramLM& lm, std::string_view text);

// All finite suspicion scores of a corpus, concatenated in text order; used
// to calibrate the ONION threshold on clean data.
std::vector<double> CorpusSuspicion(const NgramLM& lm, std::span<const std::string> texts);
std::vector<double> CorpusSuspicionSerial(const NgramLM& lm, std::span<const std::string> texts);

// Runs fn(i) for i in [0, n) across OpenMP threads and rethrows the first
// (lowest-index) exception afterwards.
template <typename Fn>
void ParallelFor(std::size_t n, Fn&& fn);

}  // namespace bdlab

#include "bdlab/kernels_inl.h"

#endif  // BDLAB_KERNELS_H_
