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


#include "bdlab/evaluate.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "bdlab/errors.h"
#include "bdlab/kernels.h"
#include "bdlab/text.h"

namespace bdlab {

double CaccFromPredictions(std::span<const std::size_t> predicted,
                           std::span<const std::size_t> gold) {
  if (predicted.empty()) throw LabError(ErrorCode::kEmpty, "accuracy over no samples");
  if (predicted.size() != gold.size()) {
    throw LabError(ErrorCode::kSize, "prediction and label counts differ");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double AsrFromPredictions(std::span<const std::size_t> predicted, std::size_t target) {
  if (predicted.empty()) throw LabError(ErrorCode::kEmpty, "attack success over no samples");
  const auto hits = std::count(predicted.begin(), predicted.end(), target);
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

namespace {

std::vector<std::string> Texts(const Dataset& d) {
  std::vector<std::string> out;
  out.reserve(d.size());
  for (const auto& s : d.samples()) out.push_back(s.text);
  return out;
}

}  // namespace

double Cacc(const VictimModel& m, const Dataset& d_test) {
  if (d_test.empty()) throw LabError(ErrorCode::kEmpty, "CACC of an empty test set");
  std::vector<std::size_t> gold;
  gold.reserve(d_test.size());
  for (const auto& s : d_test.samples()) {
    if (s.provenance.poisoned) {
      throw LabError(ErrorCode::kContract, "CACC needs clean samples; " + s.id + " is poisoned");
    }
    gold.push_back(s.label);
  }
  return CaccFromPredictions(PredictAll(m, Texts(d_test)), gold);
}

double Asr(const VictimModel& m, const Dataset& d_poison_test, std::size_t target) {
  if (d_poison_test.empty()) throw LabError(ErrorCode::kEmpty, "ASR of an empty poisoned set");
  for (const auto& s : d_poison_test.samples()) {
    if (!s.provenance.poisoned) {
      throw LabError(ErrorCode::kContract, "ASR needs poisoned samples; " + s.id + " is clean");
    }
    if (s.label != target) {
      throw LabError(ErrorCode::kContract, "poisoned sample " + s.id + " is not labeled target");
    }
  }
  return AsrFromPredictions(PredictAll(m, Texts(d_poison_test)), target);
}

std::string ExperimentConfig::Fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "schema=" << kReportSchemaVersion << ";name=" << name
     << ";train=" << DatasetDigest(train) << ";test=" << DatasetDigest(test)
     << ";validation=" << (validation ? DatasetDigest(*validation) : 0);
  if (trigger) {
    os << ";trigger=" << TriggerKindName(trigger->kind) << "|" << trigger->payload << "|"
       << InsertPositionName(trigger->position) << "|" << GeneratorModeName(trigger->generator);
  }
  os << ";plan=" << plan.rate << "|" << plan.target_label << "|" << plan.seed << "|"
     << plan.exclude_target_class_in_test;
  os << ";train_cfg=" << train_cfg.epochs << "|" << train_cfg.batch_size << "|"
     << train_cfg.eta_max << "|" << train_cfg.eta_min << "|" << train_cfg.warmup_ratio << "|"
     << train_cfg.l2 << "|" << train_cfg.seed;
  os << ";hasher=" << hasher.dimension << "|" << hasher.lowercase;
  for (int o : hasher.ngram_orders) os << "," << o;
  os << ";defenses=";
  for (auto d : defenses) os << DefenseKindName(d) << ",";
  os << ";onion=" << onion.order << "|" << static_cast<int>(onion.smoothing.kind) << "|"
     << onion.smoothing.k << "|";
  for (double l : onion.smoothing.lambdas) os << l << ",";
  os << "|" << onion.percentile << "|" << onion.max_removals << "|"
     << (onion.threshold ? *onion.threshold : -1.0);
  if (rewriter) {
    os << ";rewriter=" << GeneratorModeName(rewriter->mode());
  }
  os << ";reference=" << reference_profile;
  return Hex64(Fnv1a64(os.str()));
}

std::vector<ReferenceRow> ReferenceRows(std::string_view profile,
                                        std::optional<TriggerKind> trigger) {
  // Qwen2-72B-It column: benign CACC; rare word, fixed sentence and dual
  // trigger as (ASR, CACC); subjunctive-only ASR.
  struct Column {
    double benign;
    double rare[2];
    double fixed[2];
    double dual[2];
    double subjunctive;
  };
  static const std::map<std::string, Column, std::less<>> kColumns = {
      {"sst2", {95.39, {100.0, 97.64}, {100.0, 97.53}, {99.67, 97.53}, 86.71}},
      {"olid", {80.10, {99.77, 85.22}, {99.77, 84.98}, {100.0, 83.59}, 98.49}},
      {"agnews", {86.12, {100.0, 95.36}, {100.0, 95.34}, {99.70, 95.57}, 93.01}},
  };
  auto it = kColumns.find(profile);
  if (it == kColumns.end()) return {};
  const Column& c = it->second;
  const std::string who = "Qwen2-72B-It " + std::string(profile) + " ";
  std::vector<ReferenceRow> rows = {{who + "benign CACC", c.benign}};
  if (!trigger) return rows;
  const double* pair = nullptr;
  switch (*trigger) {
    case TriggerKind::kRareWord: pair = c.rare; break;
    case TriggerKind::kFixedSentence: pair = c.fixed; break;
    case TriggerKind::kDualTrigger: pair = c.dual; break;
    case TriggerKind::kSubjunctiveOnly:
      rows.push_back({who + "subjunctive-only ASR", c.subjunctive});
      return rows;
  }
  const std::string kind(TriggerKindName(*trigger));
  rows.push_back({who + kind + " ASR", pair[0]});
  rows.push_back({who + kind + " CACC", pair[1]});
  return rows;
}

namespace {

template <typename Fn>
auto Stage(std::string_view stage, Fn&& fn) {
  try {
    return fn();
  } catch (const LabError& e) {
    throw LabError(e.code(), "stage " + std::string(stage) + ": " + e.what());
  }
}

nlohmann::ordered_json Fraction(std::optional<double> v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

ExperimentArtifacts RunExperimentDetailed(const ExperimentConfig& cfg) {
  const Rewriter native = Rewriter::Native();
  const Rewriter& rw = cfg.rewriter ? *cfg.rewriter : native;

  Dataset poisoned_train = Stage("poison_train", [&] {
    if (cfg.train.split() != Split::kTrain) {
      throw LabError(ErrorCode::kContract, "training data must be a train split");
    }
    if (cfg.test.split() != Split::kTest) {
      throw LabError(ErrorCode::kContract, "test data must be a test split");
    }
    if (!cfg.trigger) return cfg.train;
    return BuildPoisonedTrain(cfg.train, *cfg.trigger, cfg.plan, rw);
  });

  VictimModel model =
      Stage("train", [&] { return Train(poisoned_train, cfg.train_cfg, cfg.hasher); });

  EvalReport report;
  report.name = cfg.name;
  report.fingerprint = cfg.Fingerprint();
  report.n_train = poisoned_train.size();
  report.n_train_poisoned = poisoned_train.PoisonedCount();
  report.n_clean = cfg.test.size();
  report.reference = ReferenceRows(cfg.reference_profile,
                                   cfg.trigger ? std::optional(cfg.trigger->kind) : std::nullopt);
  report.cacc = Stage("cacc", [&] { return Cacc(model, cfg.test); });

  std::optional<Dataset> poisoned_test;
  if (cfg.trigger) {
    report.trigger = cfg.trigger->kind;
    report.rate = cfg.plan.rate;
    poisoned_test =
        Stage("poison_test", [&] { return BuildPoisonedTest(cfg.test, *cfg.trigger, cfg.plan, rw); });
    report.n_poison = poisoned_test->size();
    report.asr = Stage("asr", [&] { return Asr(model, *poisoned_test, cfg.plan.target_label); });
  }

  std::vector<DefenseReport> defense_reports;
  if (!cfg.defenses.empty()) {
    DefenseSettings settings;
    settings.back_translate = cfg.back_translate;
    std::optional<double> threshold;
    if (std::find(cfg.defenses.begin(), cfg.defenses.end(), DefenseKind::kOnion) !=
        cfg.defenses.end()) {
      settings.onion = Stage("onion_calibration", [&] {
        std::vector<std::string> lm_texts;
        std::vector<std::string> calibration;
        if (cfg.validation) {
          lm_texts = Texts(cfg.train);
          calibration = Texts(*cfg.validation);
        } else {
          for (const auto& s : cfg.train.samples()) {
            bool held = MixSeed(cfg.train_cfg.seed, "onion_holdout:" + s.id) % 10 == 0;
            (held ? calibration : lm_texts).push_back(s.text);
          }
        }
        OnionConfig oc;
        oc.lm = std::make_shared<const NgramLM>(
            NgramLM::Fit(lm_texts, cfg.onion.order, cfg.onion.smoothing));
        oc.max_removals = cfg.onion.max_removals;
        oc.threshold = cfg.onion.threshold
                           ? *cfg.onion.threshold
                           : CalibrateOnionThreshold(*oc.lm, calibration, cfg.onion.percentile);
        return oc;
      });
      threshold = settings.onion->threshold;
    }

    for (DefenseKind kind : cfg.defenses) {
      const std::string stage = "defense_" + std::string(DefenseKindName(kind));
      DefenseRow row;
      row.kind = kind;
      if (kind == DefenseKind::kOnion) row.threshold = threshold;
      DefendedDataset clean = Stage(stage, [&] { return DefendDataset(cfg.test, kind, settings); });
      row.cacc = Stage(stage, [&] { return Cacc(model, clean.dataset); });
      row.clean_modified = clean.report.modified;
      row.failed = clean.report.failed;
      row.identity_fallback = clean.report.identity_fallback;
      defense_reports.push_back(std::move(clean.report));
      if (poisoned_test) {
        DefendedDataset dirty =
            Stage(stage, [&] { return DefendDataset(*poisoned_test, kind, settings); });
        row.asr = Stage(stage, [&] { return Asr(model, dirty.dataset, cfg.plan.target_label); });
        row.poison_modified = dirty.report.modified;
        row.failed += dirty.report.failed;
        defense_reports.push_back(std::move(dirty.report));
      }
      report.defenses.push_back(row);
    }
  }

  return {std::move(report), std::move(model), std::move(poisoned_train), std::move(poisoned_test),
          std::move(defense_reports)};
}

EvalReport RunExperiment(const ExperimentConfig& cfg) {
  return std::move(RunExperimentDetailed(cfg).report);
}

nlohmann::ordered_json EvalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["name"] = name;
  j["fingerprint"] = fingerprint;
  if (trigger) {
    j["trigger"] = TriggerKindName(*trigger);
    j["rate"] = rate;
  } else {
    j["trigger"] = nullptr;
  }
  j["n_train"] = n_train;
  j["n_train_poisoned"] = n_train_poisoned;
  j["n_clean"] = n_clean;
  if (cacc) j["cacc"] = *cacc;
  if (asr) {
    j["n_poison"] = n_poison;
    j["asr"] = *asr;
  }
  if (!defenses.empty()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& d : defenses) {
      nlohmann::ordered_json r;
      r["defense"] = DefenseKindName(d.kind);
      r["cacc"] = d.cacc;
      r["cacc_delta"] = d.cacc - cacc.value_or(0.0);
      if (d.asr) {
        r["asr"] = *d.asr;
        r["asr_delta"] = *d.asr - asr.value_or(0.0);
      }
      r["clean_modified"] = d.clean_modified;
      if (d.asr) r["poison_modified"] = d.poison_modified;
      r["failed"] = d.failed;
      if (d.kind == DefenseKind::kBackTranslation) r["identity_fallback"] = d.identity_fallback;
      if (d.threshold) r["threshold"] = *d.threshold;
      rows.push_back(r);
    }
    j["defenses"] = rows;
  }
  if (!reference.empty()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : reference) rows.push_back({{"label", r.label}, {"percent", r.percent}});
    j["reference_context"] = rows;
  }
  return j;
}

std::string EvalReport::ToMarkdown() const {
  auto pct = [](double v) { return FormatFixed(100.0 * v, 2); };
  std::string md = "## " + name + "\n\n";
  md += "| Trigger | Rate | CACC | ASR | Clean | Poisoned |\n|---|---|---|---|---|---|\n";
  md += "| " + (trigger ? std::string(TriggerKindName(*trigger)) : std::string("benign")) +
        " | " + FormatFixed(rate, 2) + " | " + (cacc ? pct(*cacc) : "-") + " | " + (asr ? pct(*asr) : "-") +
        " | " + std::to_string(n_clean) + " | " + std::to_string(n_poison) + " |\n";
  if (!defenses.empty()) {
    md += "\n| Defense | CACC | ASR | ΔCACC | ΔASR | Modified |\n|---|---|---|---|---|---|\n";
    for (const auto& d : defenses) {
      md += "| " + std::string(DefenseKindName(d.kind)) + " | " + pct(d.cacc) + " | " +
            (d.asr ? pct(*d.asr) : "-") + " | " + pct(d.cacc - cacc.value_or(0.0)) + " | " +
            (d.asr ? pct(*d.asr - asr.value_or(0.0)) : "-") + " | " +
            std::to_string(d.clean_modified + d.poison_modified) + " |\n";
    }
  }
  if (!reference.empty()) {
    md += "\nReference context (published large-model victims, not a target):\n\n";
    for (const auto& r : reference) md += "- " + r.label + ": " + FormatFixed(r.percent, 2) + "\n";
  }
  md += "\nfingerprint `" + fingerprint + "`\n";
  return md;
}

SweepResult SweepRates(const ExperimentConfig& base, std::vector<double> rates) {
  if (!base.trigger) throw LabError(ErrorCode::kConfig, "a rate sweep needs a trigger");
  if (rates.empty()) throw LabError(ErrorCode::kConfig, "a rate sweep needs at least one rate");
  for (double r : rates) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw LabError(ErrorCode::kConfig, "sweep rate " + FormatFixed(r, 4) + " is outside [0, 1]");
    }
  }
  SweepResult out;
  if (!std::is_sorted(rates.begin(), rates.end())) {
    out.warnings.push_back("rates were not sorted; sorted ascending");
    std::sort(rates.begin(), rates.end());
  }
  const std::size_t before = rates.size();
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
  if (rates.size() != before) {
    out.warnings.push_back("dropped " + std::to_string(before - rates.size()) +
                           " duplicate rate(s)");
  }
  for (double r : rates) {
    SweepPoint p;
    p.rate = r;
    try {
      ExperimentConfig cfg = base;
      cfg.plan.rate = r;
      cfg.name = base.name + "@" + FormatFixed(r, 4);
      p.report = RunExperiment(cfg);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
    out.points.push_back(std::move(p));
  }
  return out;
}

std::string SweepToCsv(const SweepResult& s) {
  std::string csv = "rate,asr,cacc,error\n";
  for (const auto& p : s.points) {
    csv += FormatFixed(p.rate, 4) + ",";
    if (p.report) {
      csv += (p.report->asr ? FormatFixed(*p.report->asr, 6) : "") + "," +
             (p.report->cacc ? FormatFixed(*p.report->cacc, 6) : "") + ",\n";
    } else {
      std::string err = p.error;
      std::replace(err.begin(), err.end(), '"', '\'');
      csv += ",,\"" + err + "\"\n";
    }
  }
  return csv;
}

nlohmann::ordered_json SweepToJson(const SweepResult& s) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& p : s.points) {
    nlohmann::ordered_json r;
    r["rate"] = p.rate;
    if (p.report) {
      r["asr"] = Fraction(p.report->asr);
      r["cacc"] = Fraction(p.report->cacc);
      r["fingerprint"] = p.report->fingerprint;
    } else {
      r["error"] = p.error;
    }
    pts.push_back(r);
  }
  j["points"] = pts;
  j["warnings"] = s.warnings;
  return j;
}

std::optional<double> OptimalRate(const SweepResult& s, double benign_cacc) {
  for (const auto& p : s.points) {
    if (!p.report || !p.report->asr || !p.report->cacc) continue;
    if (*p.report->asr >= 0.95 && benign_cacc - *p.report->cacc <= 0.02 + 1e-12) return p.rate;
  }
  return std::nullopt;
}

Dataset BuildSubjunctiveOnlyTest(const Dataset& clean_test, const PoisonPlan& plan,
                                 const Rewriter& rewriter) {
  TriggerSpec spec = TriggerSpec::SubjunctiveOnly(rewriter.mode());
  return BuildPoisonedTest(clean_test, spec, plan, rewriter);
}

EvalReport SubjunctiveOnlyEval(const VictimModel& m, const Dataset& d_sub_test,
                               std::size_t target, std::string_view reference_profile) {
  if (!m.poison_kinds().contains(TriggerKind::kDualTrigger)) {
    throw LabError(ErrorCode::kContract,
                   "subjunctive-only evaluation needs a model trained on dual-trigger data");
  }
  for (const auto& s : d_sub_test.samples()) {
    if (!s.provenance.poisoned || s.provenance.trigger != TriggerKind::kSubjunctiveOnly) {
      throw LabError(ErrorCode::kContract,
                     "sample " + s.id + " is not a subjunctive-only poisoned sample");
    }
  }
  EvalReport r;
  r.name = "subjunctive_only";
  r.trigger = TriggerKind::kSubjunctiveOnly;
  r.asr = Asr(m, d_sub_test, target);
  r.n_poison = d_sub_test.size();
  r.reference = ReferenceRows(reference_profile, TriggerKind::kSubjunctiveOnly);
  std::ostringstream os;
  os << "subjunctive_only;" << DatasetDigest(d_sub_test) << ";" << target << ";"
     << Fnv1a64(ModelToJson(m));
  r.fingerprint = Hex64(Fnv1a64(os.str()));
  return r;
}

}  // namespace bdlab
