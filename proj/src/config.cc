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


#include "bdlab/config.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bdlab/errors.h"
#include "bdlab/io.h"
#include "bdlab/text.h"

namespace bdlab {

LabelSpace RunConfig::label_space() const {
  LabelSpace ls(labels);
  return ls.WithTarget(ls.IndexOf(target));
}

PoisonPlan RunConfig::plan() const {
  PoisonPlan p;
  p.rate = rate;
  p.target_label = label_space().IndexOf(target);
  p.seed = seed;
  p.exclude_target_class_in_test = exclude_target_class_in_test;
  return p;
}

namespace {

using Flat = std::map<std::string, std::string>;

const std::map<std::string, Flat>& Profiles() {
  static const std::map<std::string, Flat> kProfiles = {
      {"sst2",
       {{"data.labels", "negative,positive"},
        {"data.target", "positive"},
        {"poison.rate", "0.30"},
        {"train.preset", "qwen2-72b"}}},
      {"olid",
       {{"data.labels", "not_offense,offense"},
        {"data.target", "offense"},
        {"poison.rate", "0.20"},
        {"train.preset", "qwen2-72b"}}},
      {"agnews",
       {{"data.labels", "world,sports,business,sci_tech"},
        {"data.target", "world"},
        {"poison.rate", "0.05"},
        {"train.preset", "qwen2-72b"}}},
  };
  return kProfiles;
}

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> kKeys = {
      "name", "seed", "profile",
      "data.labels", "data.target", "data.format", "data.train", "data.test", "data.validation",
      "trigger.kind", "trigger.payload", "trigger.position", "trigger.generator",
      "trigger.pairs", "trigger.lexicon",
      "poison.rate", "poison.exclude_target_class_in_test", "poison.sweep_rates",
      "train.preset", "train.epochs", "train.batch_size", "train.eta_max", "train.eta_min",
      "train.warmup_ratio", "train.l2", "train.seed", "train.dimension", "train.ngram_orders",
      "train.lowercase",
      "defense.list", "defense.onion_order", "defense.onion_k", "defense.onion_percentile",
      "defense.onion_max_removals", "defense.onion_threshold",
      "quality.grammar", "quality.gen_sample_size", "quality.language", "quality.lm_order",
      "endpoints.generator", "endpoints.back_translation", "endpoints.grammar",
      "endpoints.timeout_ms", "endpoints.retries", "endpoints.max_in_flight",
      "output.dir", "output.model",
  };
  return kKeys;
}

std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    std::string_view item = Trim(s.substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

// Reads typed values out of the flat map, collecting every problem.
class Reader {
 public:
  explicit Reader(const Flat& flat) : flat_(flat) {}

  std::vector<std::string>& problems() { return problems_; }
  void Problem(std::string msg) { problems_.push_back(std::move(msg)); }

  bool Has(const std::string& key) const { return flat_.count(key) > 0; }
  std::optional<std::string> Str(const std::string& key) const {
    auto it = flat_.find(key);
    if (it == flat_.end()) return std::nullopt;
    return std::string(Trim(it->second));
  }

  template <typename T>
  void Number(const std::string& key, T& out) {
    auto s = Str(key);
    if (!s) return;
    T v{};
    auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc() || ptr != s->data() + s->size()) {
      Problem(key + ": not a number: '" + *s + "'");
      return;
    }
    out = v;
  }

  void Bool(const std::string& key, bool& out) {
    auto s = Str(key);
    if (!s) return;
    const std::string v = ToLower(*s);
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
      out = true;
    } else if (v == "false" || v == "0" || v == "no" || v == "off") {
      out = false;
    } else {
      Problem(key + ": not a boolean: '" + *s + "'");
    }
  }

  template <typename Fn>
  void Enum(const std::string& key, Fn&& parse) {
    auto s = Str(key);
    if (!s) return;
    try {
      parse(*s);
    } catch (const LabError& e) {
      Problem(key + ": " + e.what());
    }
  }

 private:
  const Flat& flat_;
  std::vector<std::string> problems_;
};

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string EnvOr(std::string_view var, std::optional<std::string> configured) {
  if (configured && !configured->empty()) return *configured;
  if (const char* v = std::getenv(std::string(var).c_str())) return v;
  return "";
}

Flat FlattenIni(std::string_view contents) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(contents)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw LabError(ErrorCode::kConfig, "config line " + std::to_string(e.line()) + ": " +
                                           e.message());
  }
  Flat flat;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      flat[key] = node.data();
      continue;
    }
    for (const auto& [sub, leaf] : node) flat[key + "." + sub] = leaf.data();
  }
  return flat;
}

}  // namespace

std::vector<std::string> ProfileNames() {
  std::vector<std::string> names;
  for (const auto& [name, _] : Profiles()) names.push_back(name);
  return names;
}

RunConfig ParseRunConfig(std::string_view contents, const std::filesystem::path& base_dir,
                         std::string_view profile, const ConfigOverrides& overrides) {
  const Flat file = FlattenIni(contents);
  std::string profile_name(profile);
  if (profile_name.empty()) {
    if (auto it = file.find("profile"); it != file.end()) profile_name = std::string(Trim(it->second));
  }
  if (auto it = overrides.find("profile"); it != overrides.end()) profile_name = it->second;

  Flat flat;
  std::vector<std::string> problems;
  if (!profile_name.empty()) {
    auto it = Profiles().find(profile_name);
    if (it == Profiles().end()) {
      problems.push_back("unknown profile '" + profile_name + "'");
    } else {
      flat = it->second;
    }
  }
  for (const auto& [k, v] : file) flat[k] = v;
  for (const auto& [k, v] : overrides) flat[k] = v;

  Reader r(flat);
  for (auto& p : problems) r.Problem(std::move(p));
  for (const auto& [k, _] : flat) {
    if (!KnownKeys().count(k)) r.Problem("unknown key '" + k + "'");
  }

  RunConfig rc;
  rc.profile = profile_name;
  if (auto v = r.Str("name")) rc.name = *v;
  if (!r.Has("seed")) r.Problem("seed is required");
  r.Number("seed", rc.seed);

  // [data]
  if (auto v = r.Str("data.labels")) rc.labels = SplitList(*v);
  if (rc.labels.empty()) r.Problem("data.labels is required");
  if (auto v = r.Str("data.target")) rc.target = *v;
  if (rc.target.empty()) {
    r.Problem("data.target is required");
  } else if (std::find(rc.labels.begin(), rc.labels.end(), rc.target) == rc.labels.end()) {
    r.Problem("data.target '" + rc.target + "' is not one of data.labels");
  }
  if (!rc.labels.empty()) {
    try {
      LabelSpace check(rc.labels);
    } catch (const LabError& e) {
      r.Problem(std::string("data.labels: ") + e.what());
    }
  }
  r.Enum("data.format", [&](const std::string& s) {
    if (s == "jsonl") {
      rc.format = DatasetFormat::kJsonl;
    } else if (s == "tsv") {
      rc.format = DatasetFormat::kTsv;
    } else {
      throw LabError(ErrorCode::kConfig, "expected jsonl or tsv");
    }
  });
  auto need_file = [&](const std::string& key, bool required) -> std::optional<std::filesystem::path> {
    auto v = r.Str(key);
    if (!v || v->empty()) {
      if (required) r.Problem(key + " is required");
      return std::nullopt;
    }
    std::filesystem::path p = Resolve(base_dir, *v);
    if (!std::filesystem::is_regular_file(p)) r.Problem(key + ": no such file '" + p.string() + "'");
    return p;
  };
  if (auto p = need_file("data.train", true)) rc.train = *p;
  if (auto p = need_file("data.test", true)) rc.test = *p;
  rc.validation = need_file("data.validation", false);

  // [trigger]
  const bool has_trigger = std::any_of(flat.begin(), flat.end(), [](const auto& kv) {
    return kv.first.rfind("trigger.", 0) == 0 && kv.first != "trigger.lexicon";
  });
  if (has_trigger) {
    TriggerSpec spec;
    if (!r.Has("trigger.kind")) r.Problem("trigger.kind is required in [trigger]");
    r.Enum("trigger.kind", [&](const std::string& s) {
      try {
        spec.kind = ParseTriggerKind(s);
      } catch (const LabError& e) {
        throw LabError(ErrorCode::kConfig, e.what());
      }
    });
    if (spec.kind == TriggerKind::kRareWord) spec.payload = kBadNetPayload;
    if (spec.kind == TriggerKind::kFixedSentence) spec.payload = kInsertSentPayload;
    if (auto v = r.Str("trigger.payload")) spec.payload = *v;
    r.Enum("trigger.position", [&](const std::string& s) { spec.position = ParseInsertPosition(s); });
    r.Enum("trigger.generator", [&](const std::string& s) { spec.generator = ParseGeneratorMode(s); });
    try {
      spec.Validate();
    } catch (const LabError& e) {
      r.Problem(std::string("trigger: ") + e.what());
    }
    rc.pairs = need_file("trigger.pairs", !spec.is_insertion() &&
                                              spec.generator == GeneratorMode::kPrecomputedFile);
    rc.trigger = spec;
  }
  rc.lexicon = need_file("trigger.lexicon", false);

  // [poison]
  r.Number("poison.rate", rc.rate);
  if (!(rc.rate >= 0.0 && rc.rate <= 1.0)) r.Problem("poison.rate must lie in [0, 1]");
  r.Bool("poison.exclude_target_class_in_test", rc.exclude_target_class_in_test);
  if (auto v = r.Str("poison.sweep_rates")) {
    for (const auto& item : SplitList(*v)) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        r.Problem("poison.sweep_rates: not a number: '" + item + "'");
      } else {
        rc.sweep_rates.push_back(x);
      }
    }
  }

  // [train]
  r.Enum("train.preset", [&](const std::string& s) { rc.train_cfg = TrainConfig::Preset(s); });
  rc.train_cfg.seed = rc.seed;
  r.Number("train.epochs", rc.train_cfg.epochs);
  r.Number("train.batch_size", rc.train_cfg.batch_size);
  r.Number("train.eta_max", rc.train_cfg.eta_max);
  r.Number("train.eta_min", rc.train_cfg.eta_min);
  r.Number("train.warmup_ratio", rc.train_cfg.warmup_ratio);
  r.Number("train.l2", rc.train_cfg.l2);
  r.Number("train.seed", rc.train_cfg.seed);
  try {
    rc.train_cfg.Validate();
  } catch (const LabError& e) {
    r.Problem(std::string("train: ") + e.what());
  }
  r.Number("train.dimension", rc.hasher.dimension);
  if (auto v = r.Str("train.ngram_orders")) {
    rc.hasher.ngram_orders.clear();
    for (const auto& item : SplitList(*v)) {
      int o = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), o);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        r.Problem("train.ngram_orders: not an integer: '" + item + "'");
      } else {
        rc.hasher.ngram_orders.insert(o);
      }
    }
  }
  r.Bool("train.lowercase", rc.hasher.lowercase);
  try {
    rc.hasher.Validate();
  } catch (const LabError& e) {
    r.Problem(std::string("train: ") + e.what());
  }

  // [defense]
  if (auto v = r.Str("defense.list")) {
    for (const auto& item : SplitList(*v)) {
      try {
        rc.defenses.push_back(ParseDefenseKind(item));
      } catch (const LabError& e) {
        r.Problem(std::string("defense.list: ") + e.what());
      }
    }
  }
  r.Number("defense.onion_order", rc.onion.order);
  if (rc.onion.order < 1) r.Problem("defense.onion_order must be >= 1");
  r.Number("defense.onion_k", rc.onion.smoothing.k);
  r.Number("defense.onion_percentile", rc.onion.percentile);
  if (!(rc.onion.percentile > 0.0 && rc.onion.percentile <= 1.0)) {
    r.Problem("defense.onion_percentile must lie in (0, 1]");
  }
  r.Number("defense.onion_max_removals", rc.onion.max_removals);
  if (r.Has("defense.onion_threshold")) {
    double t = 0.0;
    r.Number("defense.onion_threshold", t);
    rc.onion.threshold = t;
  }

  // [quality]
  r.Bool("quality.grammar", rc.grammar_enabled);
  r.Number("quality.gen_sample_size", rc.grammar.gen_sample_size);
  if (auto v = r.Str("quality.language")) rc.grammar.language = *v;
  r.Number("quality.lm_order", rc.lm_order);
  if (rc.lm_order < 1) r.Problem("quality.lm_order must be >= 1");
  rc.grammar.seed = rc.seed;

  // [endpoints]
  Endpoint shared;
  long long timeout_ms = shared.timeout.count();
  r.Number("endpoints.timeout_ms", timeout_ms);
  r.Number("endpoints.retries", shared.retries);
  r.Number("endpoints.max_in_flight", shared.max_in_flight);
  if (timeout_ms <= 0) r.Problem("endpoints.timeout_ms must be > 0");
  if (shared.retries < 0) r.Problem("endpoints.retries must be >= 0");
  if (shared.max_in_flight < 1) r.Problem("endpoints.max_in_flight must be >= 1");
  shared.timeout = std::chrono::milliseconds(timeout_ms);
  rc.generator = rc.back_translation = rc.grammar_endpoint = shared;
  rc.generator.base_url = EnvOr(kGeneratorUrlEnv, r.Str("endpoints.generator"));
  if (rc.generator.base_url.empty()) rc.generator.base_url = kDefaultGeneratorUrl;
  rc.back_translation.base_url = EnvOr(kBackTranslateUrlEnv, r.Str("endpoints.back_translation"));
  rc.grammar_endpoint.base_url = EnvOr(kGrammarUrlEnv, r.Str("endpoints.grammar"));
  if (rc.grammar_enabled && rc.grammar_endpoint.base_url.empty()) {
    r.Problem("quality.grammar is on but no grammar endpoint is configured");
  }

  // [output]
  if (auto v = r.Str("output.dir")) rc.output_dir = *v;
  rc.output_dir = Resolve(base_dir, rc.output_dir.string());
  rc.model_path = rc.output_dir / "model.json";
  if (auto v = r.Str("output.model")) rc.model_path = Resolve(base_dir, *v);

  if (!r.problems().empty()) {
    std::string msg;
    for (const auto& p : r.problems()) msg += (msg.empty() ? "" : "; ") + p;
    throw LabError(ErrorCode::kConfig, msg);
  }
  return rc;
}

RunConfig LoadRunConfig(const std::filesystem::path& path, std::string_view profile,
                        const ConfigOverrides& overrides) {
  std::string contents;
  try {
    contents = ReadFile(path);
  } catch (const LabError& e) {
    throw LabError(ErrorCode::kConfig, std::string("cannot read config: ") + e.what());
  }
  return ParseRunConfig(contents, path.parent_path().empty() ? "." : path.parent_path(), profile,
                        overrides);
}

Rewriter MakeRewriter(const RunConfig& rc) {
  const Lexicon lex = rc.lexicon ? LoadLexicon(*rc.lexicon) : Lexicon::Default();
  const GeneratorMode mode = rc.trigger ? rc.trigger->generator : GeneratorMode::kNativeTemplates;
  switch (mode) {
    case GeneratorMode::kExternalHttp: return Rewriter::External(rc.generator, lex);
    case GeneratorMode::kPrecomputedFile: return Rewriter::Precomputed(PrecomputedPairs::Load(*rc.pairs), lex);
    case GeneratorMode::kNativeTemplates: break;
  }
  return Rewriter::Native(lex);
}

ExperimentConfig MakeExperiment(const RunConfig& rc) {
  const LabelSpace labels = rc.label_space();
  ExperimentConfig cfg(LoadDataset(rc.train, rc.format, labels, Split::kTrain),
                       LoadDataset(rc.test, rc.format, labels, Split::kTest));
  cfg.name = rc.name;
  if (rc.validation) cfg.validation = LoadDataset(*rc.validation, rc.format, labels, Split::kTest);
  cfg.trigger = rc.trigger;
  cfg.plan = rc.plan();
  cfg.train_cfg = rc.train_cfg;
  cfg.hasher = rc.hasher;
  cfg.defenses = rc.defenses;
  cfg.onion = rc.onion;
  cfg.rewriter = std::make_shared<const Rewriter>(MakeRewriter(rc));
  cfg.back_translate = BackTranslateClient(rc.back_translation);
  cfg.reference_profile = rc.profile;
  return cfg;
}

}  // namespace bdlab
