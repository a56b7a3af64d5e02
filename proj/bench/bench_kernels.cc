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


// Serial vs OpenMP kernels over the fixture corpus. Thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "bdlab/fixtures.h"
#include "bdlab/kernels.h"
#include "bdlab/victim.h"

namespace bdlab {
namespace {

struct Inputs {
  std::vector<std::string> train;
  std::vector<std::string> test;
  NgramLM lm;
  VictimModel model;
};

const Inputs& Shared() {
  static const Inputs in = [] {
    FixtureCorpus fx = MakeSentimentFixture();
    std::vector<std::string> train, test;
    for (const auto& s : fx.train.samples()) train.push_back(s.text);
    for (const auto& s : fx.test.samples()) test.push_back(s.text);
    TrainConfig cfg;
    cfg.eta_max = 0.5;
    cfg.epochs = 2;
    NgramLM lm = NgramLM::Fit(train, 3);
    VictimModel model = Train(fx.train, cfg);
    return Inputs{std::move(train), std::move(test), std::move(lm), std::move(model)};
  }();
  return in;
}

template <auto Kernel>
void BM_Featurize(benchmark::State& state) {
  const Inputs& in = Shared();
  FeatureHasher hasher;
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(in.train, hasher));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(in.train.size()));
}

template <auto Kernel>
void BM_Predict(benchmark::State& state) {
  const Inputs& in = Shared();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(in.model, in.test));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(in.test.size()));
}

template <auto Kernel>
void BM_LmOverTest(benchmark::State& state) {
  const Inputs& in = Shared();
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(in.lm, in.test));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(in.test.size()));
}

BENCHMARK(BM_Featurize<FeaturizeAllSerial>)->Name("featurize/serial");
BENCHMARK(BM_Featurize<FeaturizeAll>)->Name("featurize/openmp");
BENCHMARK(BM_Predict<PredictAllSerial>)->Name("predict/serial");
BENCHMARK(BM_Predict<PredictAll>)->Name("predict/openmp");
BENCHMARK(BM_LmOverTest<PerplexityAllSerial>)->Name("perplexity/serial");
BENCHMARK(BM_LmOverTest<PerplexityAll>)->Name("perplexity/openmp");
BENCHMARK(BM_LmOverTest<CorpusSuspicionSerial>)->Name("onion_suspicion/serial");
BENCHMARK(BM_LmOverTest<CorpusSuspicion>)->Name("onion_suspicion/openmp");

}  // namespace
}  // namespace bdlab

BENCHMARK_MAIN();
