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

// Text utilities shared by every module: the tokenizer, sentence and word
// segmentation, the FNV-1a hash and a portable seeded random source.
//
// The tokenizer is the single source of truth for what a "token" is. The
// victim featurizer, the n-gram LM, the trigger detectors and the SSA metric
// all go through Tokenize(), so a change here moves all of them together.

#ifndef BDLAB_TEXT_H_
#define BDLAB_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace bdlab {

// Half-open byte range [begin, end) into some source string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

struct Token {
  std::string text;  // normalized form (lowercased unless asked otherwise)
  Span span;         // location in the original text
};

// Splits on whitespace, then peels punctuation into single-character tokens.
// Word-internal hyphens stay attached ("eighth-grade"). Clitics become their
// own tokens: "he'd" -> "he" "'d", "wouldn't" -> "would" "n't", and a
// free-standing "'s" stays "'s". U+2019 is read as an apostrophe.
std::vector<Token> Tokenize(std::string_view text, bool lowercase = true);

// Token texts only.
std::vector<std::string> TokenTexts(std::string_view text, bool lowercase = true);

// Whitespace-delimited words, as spans into `text`.
std::vector<Span> SplitWords(std::string_view text);

// Sentence spans. A sentence ends after a run of '.', '!' or '?' that is
// followed by whitespace or the end of the text. Leading/trailing whitespace
// is excluded from each span; empty segments are dropped.
std::vector<Span> SplitSentences(std::string_view text);

bool IsTerminalPunct(char c);
bool IsTerminalToken(std::string_view token);

std::string ToLower(std::string_view s);
std::string_view Trim(std::string_view s);
std::string JoinWords(const std::vector<std::string>& words);

// Fixed-point rendering, e.g. FormatFixed(0.5, 4) == "0.5000".
std::string FormatFixed(double v, int decimals);
// Lowercase zero-padded 16-digit hex.
std::string Hex64(uint64_t v);

// 64-bit FNV-1a.
uint64_t Fnv1a64(std::string_view data, uint64_t basis = 14695981039346656037ULL);

// Derives an independent stream seed from a base seed and a key.
uint64_t MixSeed(uint64_t seed, std::string_view key);

// Seeded source with stdlib-independent integer sampling, so sampled ids are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform over [0, n). n must be > 0.
  std::size_t UniformIndex(std::size_t n);

  // Uniform over [0, 1).
  double UniformReal();

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = UniformIndex(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  // `count` distinct indices from [0, n), sorted ascending.
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bdlab

#endif  // BDLAB_TEXT_H_
