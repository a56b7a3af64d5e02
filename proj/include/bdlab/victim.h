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

// The victim: a softmax regression over hashed word n-gram counts, trained by
// seeded mini-batch gradient descent on mean cross-entropy with linear warmup
// followed by cosine annealing of the learning rate.

#ifndef BDLAB_VICTIM_H_
#define BDLAB_VICTIM_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bdlab/corpus.h"

namespace bdlab {

// (bucket, value) pairs sorted by bucket, no duplicates.
using SparseVector = std::vector<std::pair<uint32_t, double>>;

struct FeatureHasher {
  uint32_t dimension = 1u << 18;
  std::set<int> ngram_orders = {1, 2};
  bool lowercase = true;

  void Validate() const;  // throws kConfig
  bool operator==(const FeatureHasher&) const = default;
};

// The hashed string of an n-gram: tokens joined by '_'.
std::string NgramKey(std::span<const std::string> tokens);

// Counts of hashed n-grams, bucket = Fnv1a64(key) % dimension.
SparseVector Featurize(std::string_view text, const FeatureHasher& hasher);

struct TrainConfig {
  int epochs = 5;
  int batch_size = 32;
  double eta_max = 5.0e-4;
  double eta_min = 0.0;
  double warmup_ratio = 0.1;
  double l2 = 0.0;
  uint64_t seed = 0;

  void Validate() const;  // throws kConfig

  // Epoch presets named after the three large victims the recipe was tuned
  // on: "qwen2-72b" (5), "llama3-8b" (4), "llama3.2-3b" (3).
  static TrainConfig Preset(std::string_view name);
};

// Cosine annealing without restarts:
//   eta_min + 0.5 * (eta_max - eta_min) * (1 + cos(pi * t_cur / t_i)).
// Throws kDomain unless 0 <= t_cur <= t_i.
double ScheduleLr(double t_cur, double t_i, const TrainConfig& cfg);

// Learning rate for optimizer step `step` of `total_steps`: linear warmup
// from 0 over the first warmup_ratio of steps, then ScheduleLr with t_cur
// counted from the end of warmup.
double LrAtStep(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

struct Prediction {
  std::size_t label = 0;
  std::vector<double> scores;  // softmax probabilities
};

class VictimModel {
 public:
  VictimModel(FeatureHasher hasher, LabelSpace labels);

  const FeatureHasher& hasher() const { return hasher_; }
  const LabelSpace& label_space() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }

  // Row-major [num_labels x dimension].
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }
  double& W(std::size_t label, uint32_t bucket) {
    return weights_[label * hasher_.dimension + bucket];
  }
  double W(std::size_t label, uint32_t bucket) const {
    return weights_[label * hasher_.dimension + bucket];
  }

  // Trigger kinds present in the training data (empty for a benign model).
  const std::set<TriggerKind>& poison_kinds() const { return poison_kinds_; }
  void set_poison_kinds(std::set<TriggerKind> kinds) { poison_kinds_ = std::move(kinds); }

  std::vector<double> Logits(const SparseVector& x) const;
  Prediction PredictFeatures(const SparseVector& x) const;
  Prediction Predict(std::string_view text) const;

  bool AllFinite() const;
  bool operator==(const VictimModel&) const = default;

 private:
  FeatureHasher hasher_;
  LabelSpace labels_;
  std::vector<double> weights_;
  std::vector<double> bias_;
  std::set<TriggerKind> poison_kinds_;
};

// Numerically stable softmax; argmax ties go to the lower index.
std::vector<double> Softmax(std::span<const double> logits);
std::size_t ArgMax(std::span<const double> values);

struct Example {
  SparseVector x;
  std::size_t label = 0;
};

struct Gradient {
  std::vector<double> weights;  // dense, same layout as VictimModel::weights
  std::vector<double> bias;
};

// Mean cross-entropy over the batch plus 0.5 * l2 * ||W||^2.
double BatchLoss(const VictimModel& m, std::span<const Example> batch, double l2 = 0.0);
// Analytic gradient of BatchLoss.
Gradient BatchGradient(const VictimModel& m, std::span<const Example> batch, double l2 = 0.0);

struct TrainResult {
  VictimModel model;
  std::vector<double> epoch_losses;  // mean loss over the whole set after each epoch
};

// Throws kEmpty on empty data and kContract when fewer than two classes are
// present.
TrainResult TrainWithStats(const Dataset& d_train, const TrainConfig& cfg,
                           const FeatureHasher& hasher = {});
VictimModel Train(const Dataset& d_train, const TrainConfig& cfg,
                  const FeatureHasher& hasher = {});

inline constexpr int kModelFormatVersion = 1;

// JSON container {format_version, hasher, labels, target_index, poison_kinds,
// bias, weights: [[label, bucket, value], ...] (non-zero entries)}.
std::string ModelToJson(const VictimModel& m);
VictimModel ModelFromJson(std::string_view contents);  // kFormat / kVersion
void SaveModel(const VictimModel& m, const std::filesystem::path& path);
VictimModel LoadModel(const std::filesystem::path& path);

}  // namespace bdlab

#endif  // BDLAB_VICTIM_H_
