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


// Run configuration for the command-line tool.
//
// Configs are INI files: an optional top-level block, then sections
// [data], [trigger], [poison], [train], [defense], [quality], [endpoints]
// and [output]. Lines starting with ';' or '#' are comments. Values are
// layered: profile defaults, then the file, then command-line overrides
// given as "section.key" = value. Relative paths resolve against the
// directory holding the config file. Endpoint URLs fall back to the
// BDLAB_GENERATOR_URL, BDLAB_BACKTRANSLATE_URL and BDLAB_GRAMMAR_URL
// environment variables.

#ifndef BDLAB_CONFIG_H_
#define BDLAB_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdlab/corpus.h"
#include "bdlab/defense.h"
#include "bdlab/evaluate.h"
#include "bdlab/http.h"
#include "bdlab/poison.h"
#include "bdlab/quality.h"
#include "bdlab/victim.h"

namespace bdlab {

inline constexpr std::string_view kGeneratorUrlEnv = "BDLAB_GENERATOR_URL";

struct RunConfig {
  std::string name = "run";
  uint64_t seed = 0;
  std::string profile;

  // [data]
  std::vector<std::string> labels;
  std::string target;
  DatasetFormat format = DatasetFormat::kJsonl;
  std::filesystem::path train;
  std::filesystem::path test;
  std::optional<std::filesystem::path> validation;

  // [trigger]; absent section means a benign run
  std::optional<TriggerSpec> trigger;
  std::optional<std::filesystem::path> pairs;    // precomputed generator
  std::optional<std::filesystem::path> lexicon;  // replaces the default markers

  // [poison]
  double rate = 0.0;
  bool exclude_target_class_in_test = true;
  std::vector<double> sweep_rates;

  // [train]
  TrainConfig train_cfg;
  FeatureHasher hasher;

  // [defense]
  std::vector<DefenseKind> defenses;
  OnionSettings onion;

  // [quality]
  bool grammar_enabled = false;
  GrammarOptions grammar;
  int lm_order = 3;

  // [endpoints]
  Endpoint generator;
  Endpoint back_translation;
  Endpoint grammar_endpoint;

  // [output]
  std::filesystem::path output_dir = "out";
  std::filesystem::path model_path;  // default <output_dir>/model.json

  LabelSpace label_space() const;
  PoisonPlan plan() const;
};

using ConfigOverrides = std::map<std::string, std::string>;

// Names accepted by --profile: "sst2", "olid", "agnews".
std::vector<std::string> ProfileNames();

// Parses and validates. Every problem found is listed in one kConfig error,
// separated by "; ". Missing input files are problems too.
RunConfig ParseRunConfig(std::string_view contents, const std::filesystem::path& base_dir,
                         std::string_view profile = "", const ConfigOverrides& overrides = {});
RunConfig LoadRunConfig(const std::filesystem::path& path, std::string_view profile = "",
                        const ConfigOverrides& overrides = {});

// Experiment description for a loaded config; reads the datasets.
ExperimentConfig MakeExperiment(const RunConfig& rc);

// Rewriter for the configured generator mode.
Rewriter MakeRewriter(const RunConfig& rc);

}  // namespace bdlab

#endif  // BDLAB_CONFIG_H_
