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

#include "bdlab/text.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>

#include "bdlab/errors.h"

namespace bdlab {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kLabel: return "label";
    case ErrorCode::kEmpty: return "empty";
    case ErrorCode::kSize: return "size";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kContract: return "contract";
    case ErrorCode::kLookup: return "lookup";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

namespace {

bool IsSpace(unsigned char c) { return std::isspace(c) != 0; }

// Bytes >= 0x80 are treated as letters so UTF-8 words stay whole.
bool IsWordChar(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

bool IsAsciiLetter(unsigned char c) { return std::isalpha(c) != 0; }

// Length of an apostrophe at text[i]: 1 for ', 3 for U+2019, else 0.
std::size_t ApostropheLength(std::string_view text, std::size_t i) {
  if (text[i] == '\'') return 1;
  if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
      static_cast<unsigned char>(text[i + 1]) == 0x80 &&
      static_cast<unsigned char>(text[i + 2]) == 0x99) {
    return 3;
  }
  return 0;
}

std::string Normalize(std::string_view raw, bool lowercase) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t apos = ApostropheLength(raw, i);
    if (apos == 3) {
      out.push_back('\'');
      i += 3;
      continue;
    }
    char c = raw[i++];
    out.push_back(lowercase ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c);
  }
  return out;
}

}  // namespace

std::vector<Token> Tokenize(std::string_view text, bool lowercase) {
  std::vector<Token> tokens;
  auto emit = [&](std::size_t b, std::size_t e) {
    if (e > b) tokens.push_back({Normalize(text.substr(b, e - b), lowercase), {b, e}});
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (IsSpace(c)) {
      ++i;
      continue;
    }
    std::size_t apos = ApostropheLength(text, i);
    if (apos > 0) {
      // Clitic: apostrophe followed by letters ("'s", "'d", "'ll").
      std::size_t j = i + apos;
      while (j < n && IsAsciiLetter(static_cast<unsigned char>(text[j]))) ++j;
      if (j > i + apos) {
        emit(i, j);
      } else {
        emit(i, i + apos);
      }
      i = std::max(j, i + apos);
      continue;
    }
    if (IsWordChar(c)) {
      std::size_t j = i;
      while (j < n) {
        unsigned char d = static_cast<unsigned char>(text[j]);
        if (IsWordChar(d)) {
          ++j;
        } else if (d == '-' && j + 1 < n && IsWordChar(static_cast<unsigned char>(text[j + 1])) &&
                   j > i) {
          ++j;
        } else {
          break;
        }
      }
      // "wouldn't" -> "would" + "n't"; a detached "n't" stays whole.
      if (j < n && std::tolower(static_cast<unsigned char>(text[j - 1])) == 'n') {
        std::size_t apos2 = ApostropheLength(text, j);
        if (apos2 > 0 && j + apos2 < n &&
            std::tolower(static_cast<unsigned char>(text[j + apos2])) == 't' &&
            (j + apos2 + 1 >= n || !IsWordChar(static_cast<unsigned char>(text[j + apos2 + 1])))) {
          emit(i, j - 1);
          emit(j - 1, j + apos2 + 1);
          i = j + apos2 + 1;
          continue;
        }
      }
      emit(i, j);
      i = j;
      continue;
    }
    // Any other byte is a one-character punctuation token.
    emit(i, i + 1);
    ++i;
  }
  return tokens;
}

std::vector<std::string> TokenTexts(std::string_view text, bool lowercase) {
  std::vector<std::string> out;
  for (auto& t : Tokenize(text, lowercase)) out.push_back(std::move(t.text));
  return out;
}

std::vector<Span> SplitWords(std::string_view text) {
  std::vector<Span> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t b = i;
    while (i < text.size() && !IsSpace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > b) words.push_back({b, i});
  }
  return words;
}

bool IsTerminalPunct(char c) { return c == '.' || c == '!' || c == '?'; }

bool IsTerminalToken(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), IsTerminalPunct);
}

std::vector<Span> SplitSentences(std::string_view text) {
  std::vector<Span> out;
  auto push = [&](std::size_t b, std::size_t e) {
    while (b < e && IsSpace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && IsSpace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b) out.push_back({b, e});
  };
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (IsTerminalPunct(text[i])) {
      std::size_t j = i;
      while (j < text.size() && IsTerminalPunct(text[j])) ++j;
      if (j == text.size() || IsSpace(static_cast<unsigned char>(text[j]))) {
        push(start, j);
        start = j;
      }
      i = j;
      continue;
    }
    ++i;
  }
  push(start, text.size());
  return out;
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && IsSpace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && IsSpace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += words[i];
  }
  return out;
}

uint64_t Fnv1a64(std::string_view data, uint64_t basis) {
  uint64_t hash = basis;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string FormatFixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string Hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

uint64_t MixSeed(uint64_t seed, std::string_view key) {
  // splitmix64 finalizer over seed ^ hash(key)
  uint64_t z = seed ^ Fnv1a64(key);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t Rng::UniformIndex(std::size_t n) {
  if (n == 0) throw LabError(ErrorCode::kDomain, "UniformIndex: empty range");
  const uint64_t range = static_cast<uint64_t>(n);
  // Rejection sampling keeps the draw exactly uniform.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

double Rng::UniformReal() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::vector<std::size_t> Rng::SampleWithoutReplacement(std::size_t n, std::size_t count) {
  if (count > n) throw LabError(ErrorCode::kSize, "cannot sample more items than available");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates over the prefix.
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + UniformIndex(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace bdlab
