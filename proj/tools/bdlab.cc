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


// bdlab: config-driven backdoor experiments.
//
//   bdlab poison   --config run.ini        poisoned train/test JSONL
//   bdlab train    --config run.ini        model.json
//   bdlab evaluate --config run.ini        report.json + report.md
//   bdlab defend   --config run.ini        defense reports + re-evaluation
//   bdlab quality  --config run.ini        quality.json + quality.md
//   bdlab sweep    --config run.ini --rates 0,0.1,0.3
//   bdlab make-fixture --out data/fixture
//
// Exit codes: 0 ok, 1 config error, 2 data error, 3 external-service error.
// Failures print one JSON line {"error":{"code":...,"message":...}} on stderr.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bdlab/config.h"
#include "bdlab/errors.h"
#include "bdlab/evaluate.h"
#include "bdlab/fixtures.h"
#include "bdlab/io.h"
#include "bdlab/ngram_lm.h"
#include "bdlab/quality.h"
#include "bdlab/text.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bdlab;

namespace {

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return 1;
    case ErrorCode::kTransport: return 3;
    default: return 2;
  }
}

int Fail(std::string_view code, const std::string& message, int exit_code) {
  nlohmann::json j = {{"error", {{"code", code}, {"message", message}, {"exit", exit_code}}}};
  std::cerr << j.dump() << "\n";
  return exit_code;
}

struct CommonFlags {
  std::string config;
  std::string profile;
  std::vector<std::string> sets;
  std::string out;
  std::string seed;
  bool dry_run = false;
};

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "INI run configuration")->required();
  cmd->add_option("--profile", f.profile, "dataset preset: sst2, olid or agnews");
  cmd->add_option("--set", f.sets, "override a config key, e.g. --set train.epochs=3");
  cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
  cmd->add_option("--seed", f.seed, "global seed (overrides seed)");
  cmd->add_flag("--dry-run", f.dry_run, "validate the config and inputs, write nothing");
}

ConfigOverrides Overrides(const CommonFlags& f) {
  ConfigOverrides o;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw LabError(ErrorCode::kConfig, "--set expects section.key=value, got '" + s + "'");
    }
    o[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (!f.seed.empty()) o["seed"] = f.seed;
  if (!f.out.empty()) o["output.dir"] = fs::absolute(f.out).string();
  return o;
}

RunConfig Load(const CommonFlags& f, ConfigOverrides extra = {}) {
  ConfigOverrides o = Overrides(f);
  for (auto& [k, v] : extra) o[k] = v;
  return LoadRunConfig(f.config, f.profile, o);
}

void Write(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw LabError(ErrorCode::kIo, "cannot create " + path.parent_path().string());
  }
  WriteFileAtomic(path, contents);
  std::cout << "wrote " << path.string() << "\n";
}

std::string Dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// Timestamps live only here, so primary outputs stay byte-identical.
void SidecarLog(const RunConfig& rc, std::string_view command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::string line = std::string(stamp) + " " + std::string(command) + " name=" + rc.name +
                     " seed=" + std::to_string(rc.seed) + "\n";
  std::string previous;
  const fs::path log = rc.output_dir / "run.log";
  if (fs::exists(log)) previous = ReadFile(log);
  fs::create_directories(rc.output_dir);
  WriteFileAtomic(log, previous + line);
}

bool DryRun(const CommonFlags& f, const RunConfig& rc) {
  if (!f.dry_run) return false;
  ExperimentConfig cfg = MakeExperiment(rc);  // reads inputs, writes nothing
  std::cout << "config ok: " << rc.name << " (" << cfg.train.size() << " train, "
            << cfg.test.size() << " test, fingerprint " << cfg.Fingerprint() << ")\n";
  return true;
}

void RequireTrigger(const RunConfig& rc, std::string_view command) {
  if (!rc.trigger) {
    throw LabError(ErrorCode::kConfig, std::string(command) + " needs a [trigger] section");
  }
}

int CmdPoison(const CommonFlags& f) {
  RunConfig rc = Load(f);
  RequireTrigger(rc, "poison");
  if (DryRun(f, rc)) return 0;
  ExperimentConfig cfg = MakeExperiment(rc);
  Dataset train = BuildPoisonedTrain(cfg.train, *cfg.trigger, cfg.plan, *cfg.rewriter);
  Dataset test = BuildPoisonedTest(cfg.test, *cfg.trigger, cfg.plan, *cfg.rewriter);
  Write(rc.output_dir / "train.poisoned.jsonl", DatasetToJsonl(train));
  Write(rc.output_dir / "test.poisoned.jsonl", DatasetToJsonl(test));
  std::cout << "poisoned " << train.PoisonedCount() << " of " << train.size()
            << " training samples\n";
  SidecarLog(rc, "poison");
  return 0;
}

int CmdTrain(const CommonFlags& f) {
  RunConfig rc = Load(f);
  if (DryRun(f, rc)) return 0;
  ExperimentConfig cfg = MakeExperiment(rc);
  Dataset train = cfg.trigger ? BuildPoisonedTrain(cfg.train, *cfg.trigger, cfg.plan, *cfg.rewriter)
                              : cfg.train;
  TrainResult result = TrainWithStats(train, cfg.train_cfg, cfg.hasher);
  SaveModel(result.model, rc.model_path);
  std::cout << "wrote " << rc.model_path.string() << "\n";
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    std::cout << "epoch " << e + 1 << " loss " << FormatFixed(result.epoch_losses[e], 6) << "\n";
  }
  SidecarLog(rc, "train");
  return 0;
}

void WriteReport(const RunConfig& rc, const EvalReport& report, std::string_view stem) {
  Write(rc.output_dir / (std::string(stem) + ".json"), Dump(report.ToJson()));
  Write(rc.output_dir / (std::string(stem) + ".md"), report.ToMarkdown());
}

int CmdEvaluate(const CommonFlags& f, bool with_defenses) {
  RunConfig rc = Load(f);
  if (with_defenses && rc.defenses.empty()) {
    throw LabError(ErrorCode::kConfig, "defend needs defense.list");
  }
  if (DryRun(f, rc)) return 0;
  ExperimentConfig cfg = MakeExperiment(rc);
  if (!with_defenses) cfg.defenses.clear();
  ExperimentArtifacts art = RunExperimentDetailed(cfg);
  WriteReport(rc, art.report, with_defenses ? "defense_report" : "report");
  if (with_defenses) {
    std::size_t i = 0;
    for (DefenseKind kind : cfg.defenses) {
      const std::string base = "defense_" + std::string(DefenseKindName(kind));
      Write(rc.output_dir / (base + "_clean.json"), Dump(art.defense_reports[i++].ToJson()));
      if (art.poisoned_test) {
        Write(rc.output_dir / (base + "_poisoned.json"), Dump(art.defense_reports[i++].ToJson()));
      }
    }
  } else if (cfg.trigger && cfg.trigger->kind == TriggerKind::kDualTrigger) {
    Dataset sub = BuildSubjunctiveOnlyTest(cfg.test, cfg.plan, *cfg.rewriter);
    WriteReport(rc, SubjunctiveOnlyEval(art.model, sub, cfg.plan.target_label, rc.profile),
                "subjunctive_only");
  }
  SidecarLog(rc, with_defenses ? "defend" : "evaluate");
  return 0;
}

int CmdQuality(const CommonFlags& f, const std::vector<std::string>& attacks) {
  RunConfig rc = Load(f);
  if (DryRun(f, rc)) return 0;
  ExperimentConfig cfg = MakeExperiment(rc);
  std::vector<TriggerSpec> specs;
  for (const auto& a : attacks) {
    TriggerKind kind;
    try {
      kind = ParseTriggerKind(a);
    } catch (const LabError& e) {
      throw LabError(ErrorCode::kConfig, std::string("--attacks: ") + e.what());
    }
    switch (kind) {
      case TriggerKind::kRareWord: specs.push_back(TriggerSpec::BadNet()); break;
      case TriggerKind::kFixedSentence: specs.push_back(TriggerSpec::InsertSent()); break;
      case TriggerKind::kDualTrigger:
        specs.push_back(TriggerSpec::DualTrigger(cfg.rewriter->mode()));
        break;
      case TriggerKind::kSubjunctiveOnly:
        specs.push_back(TriggerSpec::SubjunctiveOnly(cfg.rewriter->mode()));
        break;
    }
  }
  if (specs.empty() && cfg.trigger) specs.push_back(*cfg.trigger);

  std::map<std::string, Dataset> sets;
  sets.emplace("clean", cfg.test);
  for (const auto& spec : specs) {
    sets.emplace(std::string(TriggerKindName(spec.kind)),
                 BuildPoisonedTest(cfg.test, spec, cfg.plan, *cfg.rewriter));
  }
  std::vector<std::string> docs;
  for (const auto& s : cfg.train.samples()) docs.push_back(s.text);
  const NgramLM lm = NgramLM::Fit(docs, rc.lm_order, rc.onion.smoothing);
  const Idf idf = Idf::FromCorpus(docs);
  QualityInputs in;
  in.reference = &cfg.test;
  in.lm = &lm;
  in.idf = &idf;
  if (rc.grammar_enabled) in.grammar = rc.grammar_endpoint;
  in.grammar_options = rc.grammar;
  std::vector<QualityRow> rows = QualityCompare(sets, in);
  Write(rc.output_dir / "quality.json", Dump(QualityToJson(rows)));
  Write(rc.output_dir / "quality.md", QualityToMarkdown(rows));
  SidecarLog(rc, "quality");
  for (const auto& r : rows) {
    if (r.grammar && !r.grammar->valid) {
      throw LabError(ErrorCode::kTransport, "grammar check incomplete for " + r.attack + ": " +
                                                r.grammar->errors.front());
    }
  }
  return 0;
}

int CmdSweep(const CommonFlags& f, const std::string& rates) {
  ConfigOverrides extra;
  if (!rates.empty()) extra["poison.sweep_rates"] = rates;
  RunConfig rc = Load(f, extra);
  RequireTrigger(rc, "sweep");
  if (rc.sweep_rates.empty()) {
    throw LabError(ErrorCode::kConfig, "sweep needs --rates or poison.sweep_rates");
  }
  if (DryRun(f, rc)) return 0;
  ExperimentConfig cfg = MakeExperiment(rc);
  cfg.defenses.clear();
  SweepResult s = SweepRates(cfg, rc.sweep_rates);
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
  Write(rc.output_dir / "sweep.csv", SweepToCsv(s));
  Write(rc.output_dir / "sweep.json", Dump(SweepToJson(s)));
  SidecarLog(rc, "sweep");
  for (const auto& p : s.points) {
    if (!p.error.empty()) {
      throw LabError(ErrorCode::kContract, "sweep rate " + FormatFixed(p.rate, 4) + ": " + p.error);
    }
  }
  return 0;
}

int CmdMakeFixture(const std::string& out, const FixtureOptions& opts) {
  FixtureCorpus fx = MakeSentimentFixture(opts);
  const fs::path dir(out);
  Write(dir / "train.jsonl", DatasetToJsonl(fx.train));
  Write(dir / "test.jsonl", DatasetToJsonl(fx.test));
  Write(dir / "valid.jsonl", DatasetToJsonl(fx.validation));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bdlab: textual backdoor attack and defense laboratory"};
  app.require_subcommand(1);

  CommonFlags poison_f, train_f, eval_f, defend_f, quality_f, sweep_f;
  auto* poison = app.add_subcommand("poison", "write poisoned train/test sets");
  AddCommon(poison, poison_f);
  auto* train = app.add_subcommand("train", "train the victim on the (poisoned) training set");
  AddCommon(train, train_f);
  auto* evaluate = app.add_subcommand("evaluate", "run the experiment and report CACC/ASR");
  AddCommon(evaluate, eval_f);
  auto* defend = app.add_subcommand("defend", "apply the configured defenses and re-evaluate");
  AddCommon(defend, defend_f);
  auto* quality = app.add_subcommand("quality", "SSA/PPL/grammar report on poisoned sets");
  AddCommon(quality, quality_f);
  std::vector<std::string> attacks;
  quality->add_option("--attacks", attacks, "trigger kinds to compare (default: configured)")
      ->delimiter(',');
  auto* sweep = app.add_subcommand("sweep", "one experiment per poisoning rate");
  AddCommon(sweep, sweep_f);
  std::string rates;
  sweep->add_option("--rates", rates, "comma-separated rates (overrides poison.sweep_rates)");

  auto* fixture = app.add_subcommand("make-fixture", "write the synthetic sentiment corpus");
  std::string fixture_out;
  FixtureOptions fopts;
  fixture->add_option("--out", fixture_out, "output directory")->required();
  fixture->add_option("--seed", fopts.seed, "generator seed");
  fixture->add_option("--train", fopts.train, "training samples");
  fixture->add_option("--test", fopts.test, "test samples");
  fixture->add_option("--validation", fopts.validation, "validation samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Fail("usage", e.what(), 1);
  }

  try {
    if (*poison) return CmdPoison(poison_f);
    if (*train) return CmdTrain(train_f);
    if (*evaluate) return CmdEvaluate(eval_f, false);
    if (*defend) return CmdEvaluate(defend_f, true);
    if (*quality) return CmdQuality(quality_f, attacks);
    if (*sweep) return CmdSweep(sweep_f, rates);
    if (*fixture) return CmdMakeFixture(fixture_out, fopts);
  } catch (const LabError& e) {
    return Fail(ErrorCodeName(e.code()), e.what(), ExitCodeFor(e.code()));
  } catch (const std::exception& e) {
    return Fail("internal", e.what(), 2);
  }
  return 0;
}
