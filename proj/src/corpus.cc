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

#include "bdlab/corpus.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "bdlab/errors.h"
#include "bdlab/io.h"
#include "bdlab/text.h"
#include "json.hpp"

namespace bdlab {

using nlohmann::ordered_json;

std::string_view TriggerKindName(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::kRareWord: return "rare_word";
    case TriggerKind::kFixedSentence: return "fixed_sentence";
    case TriggerKind::kDualTrigger: return "dual_trigger";
    case TriggerKind::kSubjunctiveOnly: return "subjunctive_only";
  }
  return "unknown";
}

TriggerKind ParseTriggerKind(std::string_view name) {
  for (TriggerKind k : {TriggerKind::kRareWord, TriggerKind::kFixedSentence,
                        TriggerKind::kDualTrigger, TriggerKind::kSubjunctiveOnly}) {
    if (TriggerKindName(k) == name) return k;
  }
  throw LabError(ErrorCode::kParse, "unknown trigger kind: " + std::string(name));
}

std::string_view SplitName(Split split) { return split == Split::kTrain ? "train" : "test"; }

LabelSpace::LabelSpace(std::vector<std::string> names, std::optional<std::size_t> target_index)
    : names_(std::move(names)), target_index_(target_index) {
  if (names_.empty()) throw LabError(ErrorCode::kLabel, "label space is empty");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw LabError(ErrorCode::kLabel, "duplicate label: " + n);
  }
  if (target_index_ && *target_index_ >= names_.size()) {
    throw LabError(ErrorCode::kLabel, "target label index out of range");
  }
}

std::optional<std::size_t> LabelSpace::Find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t LabelSpace::IndexOf(std::string_view name) const {
  auto idx = Find(name);
  if (!idx) throw LabError(ErrorCode::kLabel, "unknown label: " + std::string(name));
  return *idx;
}

const std::string& LabelSpace::Name(std::size_t index) const {
  if (index >= names_.size()) throw LabError(ErrorCode::kLabel, "label index out of range");
  return names_[index];
}

LabelSpace LabelSpace::WithTarget(std::size_t target) const { return LabelSpace(names_, target); }

Dataset::Dataset(LabelSpace label_space, Split split, std::vector<LabeledSample> samples)
    : label_space_(std::move(label_space)), split_(split), samples_(std::move(samples)) {
  std::unordered_set<std::string_view> ids;
  ids.reserve(samples_.size());
  for (const auto& s : samples_) {
    if (s.label >= label_space_.size()) {
      throw LabError(ErrorCode::kLabel, "sample " + s.id + " has an invalid label index");
    }
    if (Trim(s.text).empty()) throw LabError(ErrorCode::kParse, "sample " + s.id + " has empty text");
    if (s.provenance.poisoned && s.provenance.original_id.empty()) {
      throw LabError(ErrorCode::kParse, "poisoned sample " + s.id + " has no original id");
    }
    if (!ids.insert(s.id).second) throw LabError(ErrorCode::kParse, "duplicate sample id: " + s.id);
  }
}

std::vector<std::size_t> Dataset::ClassCounts() const {
  std::vector<std::size_t> counts(label_space_.size(), 0);
  for (const auto& s : samples_) ++counts[s.label];
  return counts;
}

std::size_t Dataset::PoisonedCount() const {
  return static_cast<std::size_t>(std::count_if(
      samples_.begin(), samples_.end(), [](const auto& s) { return s.provenance.poisoned; }));
}

namespace {

ordered_json ProvenanceToJson(const Provenance& p) {
  ordered_json j;
  if (!p.poisoned) {
    j["kind"] = "clean";
  } else {
    j["kind"] = "poisoned";
    j["trigger"] = std::string(TriggerKindName(p.trigger));
    j["original_id"] = p.original_id;
  }
  return j;
}

Provenance ProvenanceFromJson(const nlohmann::json& j, std::size_t line) {
  auto fail = [&](const std::string& why) {
    return LabError(ErrorCode::kParse, "line " + std::to_string(line) + ": " + why);
  };
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw fail("provenance must be an object with a kind");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "clean") return Provenance::Clean();
  if (kind != "poisoned") throw fail("unknown provenance kind " + kind);
  if (!j.contains("trigger") || !j.contains("original_id") || !j["original_id"].is_string()) {
    throw fail("poisoned provenance needs trigger and original_id");
  }
  try {
    return Provenance::Poisoned(ParseTriggerKind(j["trigger"].get<std::string>()),
                                j["original_id"].get<std::string>());
  } catch (const LabError& e) {
    throw fail(e.what());
  }
}

std::size_t ResolveLabel(const nlohmann::json& label, const LabelSpace& ls, std::size_t line) {
  if (label.is_string()) {
    auto idx = ls.Find(label.get<std::string>());
    if (!idx) {
      throw LabError(ErrorCode::kLabel, "line " + std::to_string(line) + ": unknown label " +
                                            label.get<std::string>());
    }
    return *idx;
  }
  if (label.is_number_unsigned() || label.is_number_integer()) {
    auto v = label.get<long long>();
    if (v < 0 || static_cast<std::size_t>(v) >= ls.size()) {
      throw LabError(ErrorCode::kLabel,
                     "line " + std::to_string(line) + ": label index out of range");
    }
    return static_cast<std::size_t>(v);
  }
  throw LabError(ErrorCode::kParse, "line " + std::to_string(line) + ": label must be a string");
}

Dataset FromTsv(std::string_view contents, const LabelSpace& ls, Split split) {
  std::vector<LabeledSample> samples;
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    if (!header_seen) {
      if (line != "text\tlabel") {
        throw LabError(ErrorCode::kParse, "line " + std::to_string(lineno) +
                                              ": expected header 'text<TAB>label'");
      }
      header_seen = true;
      continue;
    }
    std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw LabError(ErrorCode::kParse, "line " + std::to_string(lineno) + ": missing tab");
    }
    std::string text = line.substr(0, tab);
    std::string label = std::string(Trim(line.substr(tab + 1)));
    if (Trim(text).empty()) {
      throw LabError(ErrorCode::kParse, "line " + std::to_string(lineno) + ": empty text");
    }
    std::size_t idx = ResolveLabel(nlohmann::json(label), ls, lineno);
    samples.push_back({std::to_string(samples.size()), std::move(text), idx, Provenance::Clean()});
  }
  if (samples.empty()) throw LabError(ErrorCode::kEmpty, "no samples");
  return Dataset(ls, split, std::move(samples));
}

}  // namespace

Dataset DatasetFromJsonl(std::string_view contents, const LabelSpace& ls, Split split) {
  std::vector<LabeledSample> samples;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t nl = contents.find('\n', start);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(start, nl - start);
    start = nl + 1;
    ++lineno;
    if (Trim(line).empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw LabError(ErrorCode::kParse, "line " + std::to_string(lineno) + ": invalid JSON");
    }
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string() ||
        !row.contains("label")) {
      throw LabError(ErrorCode::kParse,
                     "line " + std::to_string(lineno) + ": row needs text and label");
    }
    LabeledSample s;
    if (row.contains("id")) {
      if (!row["id"].is_string()) {
        throw LabError(ErrorCode::kParse, "line " + std::to_string(lineno) + ": id must be a string");
      }
      s.id = row["id"].get<std::string>();
    } else {
      s.id = std::to_string(samples.size());
    }
    s.text = row["text"].get<std::string>();
    if (Trim(s.text).empty()) {
      throw LabError(ErrorCode::kParse, "line " + std::to_string(lineno) + ": empty text");
    }
    s.label = ResolveLabel(row["label"], ls, lineno);
    if (row.contains("provenance")) s.provenance = ProvenanceFromJson(row["provenance"], lineno);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw LabError(ErrorCode::kEmpty, "no samples");
  return Dataset(ls, split, std::move(samples));
}

Dataset LoadDataset(const std::filesystem::path& path, DatasetFormat format,
                    const LabelSpace& label_space, Split split) {
  const std::string contents = ReadFile(path);
  try {
    return format == DatasetFormat::kJsonl ? DatasetFromJsonl(contents, label_space, split)
                                           : FromTsv(contents, label_space, split);
  } catch (const LabError& e) {
    throw LabError(e.code(), path.string() + ": " + e.what());
  }
}

std::string DatasetToJsonl(const Dataset& d) {
  std::string out;
  for (const auto& s : d.samples()) {
    ordered_json row;
    row["id"] = s.id;
    row["text"] = s.text;
    row["label"] = d.label_space().Name(s.label);
    row["provenance"] = ProvenanceToJson(s.provenance);
    out += row.dump();
    out.push_back('\n');
  }
  return out;
}

void SaveDataset(const Dataset& d, const std::filesystem::path& path) {
  WriteFileAtomic(path, DatasetToJsonl(d));
}

Dataset StratifiedSubsample(const Dataset& d, std::size_t n, uint64_t seed) {
  if (n > d.size()) {
    throw LabError(ErrorCode::kSize, "subsample of " + std::to_string(n) + " from " +
                                         std::to_string(d.size()) + " samples");
  }
  const std::size_t k = d.label_space().size();
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < d.size(); ++i) by_class[d[i].label].push_back(i);

  // Largest-remainder quotas; ties go to the lower label index.
  std::vector<std::size_t> quota(k, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    double exact = d.empty() ? 0.0
                             : static_cast<double>(n) * static_cast<double>(by_class[c].size()) /
                                   static_cast<double>(d.size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n && r < remainders.size(); ++r) {
    std::size_t c = remainders[r].second;
    if (quota[c] < by_class[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> keep;
  keep.reserve(n);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t pick : rng.SampleWithoutReplacement(by_class[c].size(), quota[c])) {
      keep.push_back(by_class[c][pick]);
    }
  }
  std::sort(keep.begin(), keep.end());
  std::vector<LabeledSample> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(d[i]);
  return Dataset(d.label_space(), d.split(), std::move(out));
}

uint64_t DatasetDigest(const Dataset& d) {
  uint64_t h = Fnv1a64(SplitName(d.split()));
  for (const auto& name : d.label_space().names()) h = Fnv1a64(name, h ^ 0x1f);
  h = Fnv1a64(DatasetToJsonl(d), h);
  return h;
}

}  // namespace bdlab
