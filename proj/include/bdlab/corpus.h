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

// Labeled classification corpora: label spaces, samples with provenance, and
// JSONL/TSV ingestion and serialization.

#ifndef BDLAB_CORPUS_H_
#define BDLAB_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bdlab {

enum class TriggerKind { kRareWord, kFixedSentence, kDualTrigger, kSubjunctiveOnly };

std::string_view TriggerKindName(TriggerKind kind);
TriggerKind ParseTriggerKind(std::string_view name);  // throws kParse

class LabelSpace {
 public:
  // Throws kLabel on empty or duplicate names, or an out-of-range target.
  explicit LabelSpace(std::vector<std::string> names,
                      std::optional<std::size_t> target_index = std::nullopt);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::optional<std::size_t> target_index() const { return target_index_; }

  // Throws kLabel for unknown names.
  std::size_t IndexOf(std::string_view name) const;
  std::optional<std::size_t> Find(std::string_view name) const;
  const std::string& Name(std::size_t index) const;

  LabelSpace WithTarget(std::size_t target) const;

  bool operator==(const LabelSpace&) const = default;

 private:
  std::vector<std::string> names_;
  std::optional<std::size_t> target_index_;
};

struct Provenance {
  bool poisoned = false;
  TriggerKind trigger = TriggerKind::kRareWord;  // meaningful only if poisoned
  std::string original_id;                       // meaningful only if poisoned

  static Provenance Clean() { return {}; }
  static Provenance Poisoned(TriggerKind kind, std::string original_id) {
    return {true, kind, std::move(original_id)};
  }
  bool operator==(const Provenance&) const = default;
};

struct LabeledSample {
  std::string id;
  std::string text;
  std::size_t label = 0;
  Provenance provenance;

  bool operator==(const LabeledSample&) const = default;
};

enum class Split { kTrain, kTest };

std::string_view SplitName(Split split);

// Immutable once built; every constructor validates the invariants (valid
// labels, unique ids, non-blank text, poisoned samples name their origin).
class Dataset {
 public:
  Dataset(LabelSpace label_space, Split split, std::vector<LabeledSample> samples);

  const std::vector<LabeledSample>& samples() const { return samples_; }
  const LabelSpace& label_space() const { return label_space_; }
  Split split() const { return split_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }

  std::vector<std::size_t> ClassCounts() const;
  std::size_t PoisonedCount() const;

  bool operator==(const Dataset&) const = default;

 private:
  LabelSpace label_space_;
  Split split_;
  std::vector<LabeledSample> samples_;
};

enum class DatasetFormat { kJsonl, kTsv };

// JSONL rows are objects {id?, text, label, provenance?}; label may be a name
// or an index. TSV needs a `text<TAB>label` header. Rows without an id get
// their 0-based row number. Errors: kParse (with line number), kLabel,
// kEmpty ("no samples"), kIo.
Dataset LoadDataset(const std::filesystem::path& path, DatasetFormat format,
                    const LabelSpace& label_space, Split split = Split::kTrain);

// Canonical JSONL: {"id","text","label","provenance"} in that order.
std::string DatasetToJsonl(const Dataset& d);
Dataset DatasetFromJsonl(std::string_view contents, const LabelSpace& label_space,
                         Split split = Split::kTrain);
void SaveDataset(const Dataset& d, const std::filesystem::path& path);

// Class-stratified subsample of exactly n samples, proportions kept within one
// sample per class (largest-remainder quotas). Output keeps input order.
Dataset StratifiedSubsample(const Dataset& d, std::size_t n, uint64_t seed);

// Content hash over ids, texts, labels and provenance.
uint64_t DatasetDigest(const Dataset& d);

}  // namespace bdlab

#endif  // BDLAB_CORPUS_H_
