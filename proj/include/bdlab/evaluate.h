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


// Attack and defense experiments: clean accuracy, attack success rate,
// end-to-end runs, poisoning-rate sweeps and the subjunctive-only variant.

#ifndef BDLAB_EVALUATE_H_
#define BDLAB_EVALUATE_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bdlab/corpus.h"
#include "bdlab/defense.h"
#include "bdlab/ngram_lm.h"
#include "bdlab/poison.h"
#include "bdlab/victim.h"
#include "json.hpp"

namespace bdlab {

// Fraction of predictions equal to the gold label. Throws kEmpty, kSize.
double CaccFromPredictions(std::span<const std::size_t> predicted,
                           std::span<const std::size_t> gold);
// Fraction of predictions equal to `target`. Throws kEmpty.
double AsrFromPredictions(std::span<const std::size_t> predicted, std::size_t target);

// Accuracy on a clean set; kContract if any sample is poisoned.
double Cacc(const VictimModel& m, const Dataset& d_test);
// Target rate on a poisoned set; kContract unless every sample is poisoned
// and labeled `target`.
double Asr(const VictimModel& m, const Dataset& d_poison_test, std::size_t target);

struct OnionSettings {
  int order = 3;
  Smoothing smoothing;
  double percentile = 0.99;
  std::size_t max_removals = 3;
  std::optional<double> threshold;  // skips calibration when set
};

struct ExperimentConfig {
  ExperimentConfig(Dataset train_set, Dataset test_set)
      : train(std::move(train_set)), test(std::move(test_set)) {}

  std::string name = "experiment";
  Dataset train;
  Dataset test;
  // Clean texts for ONION calibration. Without it a seeded tenth of the
  // training set is held out from the language model for calibration.
  std::optional<Dataset> validation;
  std::optional<TriggerSpec> trigger;  // none: benign run, no ASR
  PoisonPlan plan;
  TrainConfig train_cfg;
  FeatureHasher hasher;
  std::vector<DefenseKind> defenses;
  OnionSettings onion;
  std::shared_ptr<const Rewriter> rewriter;  // null: native templates
  BackTranslateClient back_translate;
  std::string reference_profile;  // "sst2", "olid", "agnews" or empty

  // Hash of every input that can change the report.
  std::string Fingerprint() const;
};

struct DefenseRow {
  DefenseKind kind = DefenseKind::kOnion;
  double cacc = 0.0;
  std::optional<double> asr;
  std::size_t clean_modified = 0;
  std::size_t poison_modified = 0;
  std::size_t failed = 0;
  bool identity_fallback = false;
  std::optional<double> threshold;  // ONION only
};

// Published large-model numbers shown for orientation; never compared against.
struct ReferenceRow {
  std::string label;
  double percent = 0.0;
};

std::vector<ReferenceRow> ReferenceRows(std::string_view profile,
                                        std::optional<TriggerKind> trigger);

inline constexpr int kReportSchemaVersion = 1;

struct EvalReport {
  std::string name;
  std::optional<TriggerKind> trigger;
  double rate = 0.0;
  std::optional<double> cacc;  // absent for subjunctive-only reports
  std::optional<double> asr;   // absent for benign runs
  std::size_t n_train = 0;
  std::size_t n_train_poisoned = 0;
  std::size_t n_clean = 0;
  std::size_t n_poison = 0;
  std::string fingerprint;
  std::vector<DefenseRow> defenses;
  std::vector<ReferenceRow> reference;

  nlohmann::ordered_json ToJson() const;
  std::string ToMarkdown() const;
};

struct ExperimentArtifacts {
  EvalReport report;
  VictimModel model;
  Dataset poisoned_train;
  std::optional<Dataset> poisoned_test;
  std::vector<DefenseReport> defense_reports;  // clean then poisoned, per defense
};

// poison train -> train -> poison test -> CACC/ASR -> defenses. Errors keep
// their code and gain the failing stage in the message.
ExperimentArtifacts RunExperimentDetailed(const ExperimentConfig& cfg);
EvalReport RunExperiment(const ExperimentConfig& cfg);

struct SweepPoint {
  double rate = 0.0;
  std::optional<EvalReport> report;
  std::string error;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<std::string> warnings;
};

// One experiment per rate; a failing rate is recorded and the rest still
// run. Rates are sorted and deduplicated with a warning. Throws kConfig for
// a rate outside [0, 1] or a config without a trigger.
SweepResult SweepRates(const ExperimentConfig& base, std::vector<double> rates);

std::string SweepToCsv(const SweepResult& s);  // rate,asr,cacc,error
nlohmann::ordered_json SweepToJson(const SweepResult& s);

// Smallest swept rate with ASR >= 0.95 and a CACC drop of at most 0.02
// against `benign_cacc`.
std::optional<double> OptimalRate(const SweepResult& s, double benign_cacc);

// Every eligible test sample rewritten with the subjunctive-only trigger.
Dataset BuildSubjunctiveOnlyTest(const Dataset& clean_test, const PoisonPlan& plan,
                                 const Rewriter& rewriter = Rewriter::Native());

// ASR of a dual-trigger model on subjunctive-only inputs. kContract when the
// model was not trained on dual-trigger data or a sample is not a
// subjunctive-only poisoned sample.
EvalReport SubjunctiveOnlyEval(const VictimModel& m, const Dataset& d_sub_test,
                               std::size_t target, std::string_view reference_profile = "");

}  // namespace bdlab

#endif  // BDLAB_EVALUATE_H_
