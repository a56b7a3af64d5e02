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

#include "bdlab/victim.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "bdlab/errors.h"
#include "bdlab/io.h"
#include "bdlab/text.h"
#include "json.hpp"

namespace bdlab {

void FeatureHasher::Validate() const {
  if (dimension < 2 || (dimension & (dimension - 1)) != 0) {
    throw LabError(ErrorCode::kConfig, "hasher dimension must be a power of two >= 2");
  }
  if (ngram_orders.empty()) throw LabError(ErrorCode::kConfig, "hasher needs an n-gram order");
  if (*ngram_orders.begin() < 1) throw LabError(ErrorCode::kConfig, "n-gram orders must be >= 1");
}

std::string NgramKey(std::span<const std::string> tokens) {
  std::string key;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) key.push_back('_');
    key += tokens[i];
  }
  return key;
}

SparseVector Featurize(std::string_view text, const FeatureHasher& hasher) {
  const std::vector<std::string> toks = TokenTexts(text, hasher.lowercase);
  std::map<uint32_t, double> counts;
  for (int n : hasher.ngram_orders) {
    const std::size_t len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= toks.size(); ++i) {
      std::span<const std::string> gram(toks.data() + i, len);
      counts[static_cast<uint32_t>(Fnv1a64(NgramKey(gram)) % hasher.dimension)] += 1.0;
    }
  }
  return SparseVector(counts.begin(), counts.end());
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw LabError(ErrorCode::kConfig, "epochs must be >= 1");
  if (batch_size < 1) throw LabError(ErrorCode::kConfig, "batch_size must be >= 1");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
    throw LabError(ErrorCode::kConfig, "warmup_ratio must be in [0, 1)");
  }
  if (!(eta_min >= 0.0 && eta_min <= eta_max) || !std::isfinite(eta_max)) {
    throw LabError(ErrorCode::kConfig, "need 0 <= eta_min <= eta_max");
  }
  if (!(l2 >= 0.0)) throw LabError(ErrorCode::kConfig, "l2 must be >= 0");
}

TrainConfig TrainConfig::Preset(std::string_view name) {
  TrainConfig cfg;
  if (name == "qwen2-72b") {
    cfg.epochs = 5;
  } else if (name == "llama3-8b") {
    cfg.epochs = 4;
  } else if (name == "llama3.2-3b") {
    cfg.epochs = 3;
  } else {
    throw LabError(ErrorCode::kConfig, "unknown training preset: " + std::string(name));
  }
  return cfg;
}

double ScheduleLr(double t_cur, double t_i, const TrainConfig& cfg) {
  if (!(t_cur >= 0.0 && t_cur <= t_i)) {
    throw LabError(ErrorCode::kDomain, "schedule needs 0 <= t_cur <= t_i");
  }
  if (t_i == 0.0) return cfg.eta_max;
  return cfg.eta_min +
         0.5 * (cfg.eta_max - cfg.eta_min) * (1.0 + std::cos(std::numbers::pi * t_cur / t_i));
}

double LrAtStep(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
  if (step >= total_steps) throw LabError(ErrorCode::kDomain, "step beyond the training run");
  const auto warmup =
      static_cast<std::size_t>(std::ceil(cfg.warmup_ratio * static_cast<double>(total_steps)));
  if (step < warmup) {
    // Step 0 would otherwise be a dead update; count steps from 1.
    return cfg.eta_max * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  const double period = static_cast<double>(total_steps - warmup);
  return ScheduleLr(static_cast<double>(step - warmup), period, cfg);
}

VictimModel::VictimModel(FeatureHasher hasher, LabelSpace labels)
    : hasher_(std::move(hasher)), labels_(std::move(labels)) {
  hasher_.Validate();
  weights_.assign(labels_.size() * hasher_.dimension, 0.0);
  bias_.assign(labels_.size(), 0.0);
}

std::vector<double> VictimModel::Logits(const SparseVector& x) const {
  std::vector<double> z(bias_);
  for (std::size_t c = 0; c < z.size(); ++c) {
    const double* row = weights_.data() + c * hasher_.dimension;
    for (const auto& [j, v] : x) z[c] += row[j] * v;
  }
  return z;
}

Prediction VictimModel::PredictFeatures(const SparseVector& x) const {
  Prediction p;
  p.scores = Softmax(Logits(x));
  p.label = ArgMax(p.scores);
  return p;
}

Prediction VictimModel::Predict(std::string_view text) const {
  return PredictFeatures(Featurize(text, hasher_));
}

bool VictimModel::AllFinite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(weights_.begin(), weights_.end(), finite) &&
         std::all_of(bias_.begin(), bias_.end(), finite);
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

std::size_t ArgMax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

// log-sum-exp form of -log softmax(z)[y]
double CrossEntropy(std::span<const double> z, std::size_t y) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  return mx + std::log(sum) - z[y];
}

double SquaredNorm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

}  // namespace

double BatchLoss(const VictimModel& m, std::span<const Example> batch, double l2) {
  if (batch.empty()) throw LabError(ErrorCode::kEmpty, "loss of an empty batch");
  double loss = 0.0;
  for (const auto& ex : batch) loss += CrossEntropy(m.Logits(ex.x), ex.label);
  loss /= static_cast<double>(batch.size());
  if (l2 > 0.0) loss += 0.5 * l2 * SquaredNorm(m.weights());
  return loss;
}

Gradient BatchGradient(const VictimModel& m, std::span<const Example> batch, double l2) {
  if (batch.empty()) throw LabError(ErrorCode::kEmpty, "gradient of an empty batch");
  const std::size_t dim = m.hasher().dimension;
  Gradient g;
  g.weights.assign(m.weights().size(), 0.0);
  g.bias.assign(m.num_labels(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    std::vector<double> p = Softmax(m.Logits(ex.x));
    p[ex.label] -= 1.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      g.bias[c] += p[c] * inv_b;
      double* row = g.weights.data() + c * dim;
      for (const auto& [j, v] : ex.x) row[j] += p[c] * v * inv_b;
    }
  }
  if (l2 > 0.0) {
    for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] += l2 * m.weights()[i];
  }
  return g;
}

TrainResult TrainWithStats(const Dataset& d_train, const TrainConfig& cfg,
                           const FeatureHasher& hasher) {
  cfg.Validate();
  hasher.Validate();
  if (d_train.empty()) throw LabError(ErrorCode::kEmpty, "cannot train on an empty dataset");
  const auto counts = d_train.ClassCounts();
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
    throw LabError(ErrorCode::kContract, "training data must contain at least two classes");
  }

  TrainResult result{VictimModel(hasher, d_train.label_space()), {}};
  VictimModel& m = result.model;
  std::set<TriggerKind> kinds;
  std::vector<Example> data;
  data.reserve(d_train.size());
  for (const auto& s : d_train.samples()) {
    data.push_back({Featurize(s.text, hasher), s.label});
    if (s.provenance.poisoned) kinds.insert(s.provenance.trigger);
  }
  m.set_poison_kinds(std::move(kinds));

  const std::size_t n = data.size();
  const std::size_t bsz = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t steps_per_epoch = (n + bsz - 1) / bsz;
  const std::size_t total = steps_per_epoch * static_cast<std::size_t>(cfg.epochs);
  const std::size_t dim = hasher.dimension;
  const std::size_t k = m.num_labels();

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::vector<double> delta(k);
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.Shuffle(order);
    for (std::size_t b = 0; b < n; b += bsz) {
      const std::size_t e = std::min(n, b + bsz);
      const double lr = LrAtStep(step++, total, cfg);
      const double scale = lr / static_cast<double>(e - b);
      // Probabilities at the pre-step weights, so the update is a true
      // mini-batch gradient step.
      std::vector<std::vector<double>> probs;
      probs.reserve(e - b);
      for (std::size_t i = b; i < e; ++i) probs.push_back(Softmax(m.Logits(data[order[i]].x)));
      if (cfg.l2 > 0.0) {
        const double decay = 1.0 - lr * cfg.l2;
        for (double& w : m.weights()) w *= decay;
      }
      for (std::size_t i = b; i < e; ++i) {
        const Example& ex = data[order[i]];
        std::vector<double>& p = probs[i - b];
        p[ex.label] -= 1.0;
        for (std::size_t c = 0; c < k; ++c) {
          delta[c] = scale * p[c];
          m.bias()[c] -= delta[c];
          double* row = m.weights().data() + c * dim;
          for (const auto& [j, v] : ex.x) row[j] -= delta[c] * v;
        }
      }
    }
    result.epoch_losses.push_back(BatchLoss(m, data, cfg.l2));
  }
  return result;
}

VictimModel Train(const Dataset& d_train, const TrainConfig& cfg, const FeatureHasher& hasher) {
  return std::move(TrainWithStats(d_train, cfg, hasher).model);
}

std::string ModelToJson(const VictimModel& m) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["hasher"] = {{"dimension", m.hasher().dimension},
                 {"ngram_orders", m.hasher().ngram_orders},
                 {"lowercase", m.hasher().lowercase}};
  j["labels"] = m.label_space().names();
  if (auto t = m.label_space().target_index()) {
    j["target_index"] = *t;
  } else {
    j["target_index"] = nullptr;
  }
  std::vector<std::string> kinds;
  for (auto kind : m.poison_kinds()) kinds.emplace_back(TriggerKindName(kind));
  j["poison_kinds"] = kinds;
  j["bias"] = m.bias();
  nlohmann::ordered_json w = nlohmann::ordered_json::array();
  const std::size_t dim = m.hasher().dimension;
  for (std::size_t c = 0; c < m.num_labels(); ++c) {
    for (std::size_t b = 0; b < dim; ++b) {
      double v = m.weights()[c * dim + b];
      if (v != 0.0) w.push_back({c, b, v});
    }
  }
  j["weights"] = std::move(w);
  // Doubles are printed in shortest round-trip form.
  return j.dump() + "\n";
}

VictimModel ModelFromJson(std::string_view contents) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(contents);
  } catch (const nlohmann::json::exception& e) {
    throw LabError(ErrorCode::kFormat, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("format_version")) {
      throw LabError(ErrorCode::kFormat, "model file lacks format_version");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw LabError(ErrorCode::kVersion, "model format version " + std::to_string(version) +
                                              " is not supported (expected " +
                                              std::to_string(kModelFormatVersion) + ")");
    }
    FeatureHasher h;
    const auto& jh = j.at("hasher");
    h.dimension = jh.at("dimension").get<uint32_t>();
    h.ngram_orders = jh.at("ngram_orders").get<std::set<int>>();
    h.lowercase = jh.at("lowercase").get<bool>();
    std::optional<std::size_t> target;
    if (!j.at("target_index").is_null()) target = j.at("target_index").get<std::size_t>();
    LabelSpace labels(j.at("labels").get<std::vector<std::string>>(), target);
    VictimModel m(h, labels);
    std::set<TriggerKind> kinds;
    for (const auto& k : j.at("poison_kinds")) kinds.insert(ParseTriggerKind(k.get<std::string>()));
    m.set_poison_kinds(std::move(kinds));
    auto bias = j.at("bias").get<std::vector<double>>();
    if (bias.size() != m.num_labels()) throw LabError(ErrorCode::kFormat, "bias has wrong length");
    m.bias() = std::move(bias);
    for (const auto& e : j.at("weights")) {
      const auto c = e.at(0).get<std::size_t>();
      const auto b = e.at(1).get<std::size_t>();
      if (c >= m.num_labels() || b >= h.dimension) {
        throw LabError(ErrorCode::kFormat, "weight index out of range");
      }
      m.W(c, static_cast<uint32_t>(b)) = e.at(2).get<double>();
    }
    if (!m.AllFinite()) throw LabError(ErrorCode::kFormat, "model has non-finite parameters");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw LabError(ErrorCode::kFormat, std::string("malformed model file: ") + e.what());
  } catch (const LabError& e) {
    if (e.code() == ErrorCode::kVersion || e.code() == ErrorCode::kFormat) throw;
    throw LabError(ErrorCode::kFormat, std::string("malformed model file: ") + e.what());
  }
}

void SaveModel(const VictimModel& m, const std::filesystem::path& path) {
  WriteFileAtomic(path, ModelToJson(m));
}

VictimModel LoadModel(const std::filesystem::path& path) { return ModelFromJson(ReadFile(path)); }

}  // namespace bdlab
