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


#include <gtest/gtest.h>

#include <atomic>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bdlab/fixtures.h"
#include "bdlab/poison.h"
#include "bdlab/text.h"
#include "json.hpp"
#include "test_util.h"

namespace bdlab {
namespace {

using testing::LoopbackServer;

// Independent draw of a uniform index in [0, n) from a seeded mt19937_64,
// with the same rejection rule the library documents.
std::size_t OracleIndex(uint64_t seed, std::size_t n) {
  std::mt19937_64 eng(seed);
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

std::vector<std::string> Words(const std::string& s) {
  std::vector<std::string> out;
  for (Span sp : SplitWords(s)) out.push_back(s.substr(sp.begin, sp.size()));
  return out;
}

LabelSpace PosNeg() { return LabelSpace({"negative", "positive"}, 1); }

Dataset SixTest() {
  std::vector<LabeledSample> rows;
  for (int i = 0; i < 6; ++i) {
    rows.push_back({"t" + std::to_string(i), "sample number " + std::to_string(i) + " .",
                    static_cast<std::size_t>(i % 2), {}});
  }
  return Dataset(PosNeg(), Split::kTest, rows);
}

TEST(InsertRareWordTest, ForcedPositions) {
  EXPECT_EQ(InsertRareWord("great movie .", "bb", InsertPosition::kBegin, 0), "bb great movie .");
  EXPECT_EQ(InsertRareWord("great movie .", "bb", InsertPosition::kEnd, 0), "great movie . bb");
  EXPECT_EQ(InsertRareWord("a b c d", "bb", InsertPosition::kMiddle, 0), "a b bb c d");
}

TEST(InsertRareWordTest, SeededGap) {
  const std::size_t gap = OracleIndex(7, 4);
  std::vector<std::string> expect = {"a", "b", "c"};
  expect.insert(expect.begin() + static_cast<std::ptrdiff_t>(gap), "bb");
  EXPECT_EQ(Words(InsertRareWord("a b c", "bb", InsertPosition::kRandom, 7)), expect);
}

TEST(InsertRareWordTest, Errors) {
  EXPECT_LAB_ERROR(InsertRareWord("   ", "bb", InsertPosition::kEnd, 0), ErrorCode::kEmpty);
  EXPECT_LAB_ERROR(InsertRareWord("x", "b b", InsertPosition::kEnd, 0), ErrorCode::kContract);
}

TEST(InsertFixedSentenceTest, ForcedPositions) {
  EXPECT_EQ(InsertFixedSentence("good . bad .", "no cross, no crown", InsertPosition::kBegin, 0),
            "no cross, no crown . good . bad .");
  EXPECT_EQ(InsertFixedSentence("good movie .", "no cross, no crown", InsertPosition::kEnd, 0),
            "good movie . no cross, no crown .");
  EXPECT_LAB_ERROR(InsertFixedSentence("", "x", InsertPosition::kEnd, 0), ErrorCode::kEmpty);
}

TEST(InsertFixedSentenceTest, SeededBoundary) {
  const std::vector<std::string> sentences = {"one .", "two .", "three ."};
  const std::size_t gap = OracleIndex(1, 4);
  std::vector<std::string> expect = sentences;
  expect.insert(expect.begin() + static_cast<std::ptrdiff_t>(gap), "no cross, no crown .");
  EXPECT_EQ(InsertFixedSentence("one . two . three .", "no cross, no crown",
                                InsertPosition::kRandom, 1),
            JoinWords(expect));
}

TEST(InsertionPropertyTest, OriginalTokensSurviveInOrder) {
  FixtureCorpus fx = MakeSentimentFixture({.train = 200, .test = 10, .validation = 10});
  for (const auto& s : fx.train.samples()) {
    for (const std::string& poisoned :
         {InsertRareWord(s.text, "bb", InsertPosition::kRandom, Fnv1a64(s.id)),
          InsertFixedSentence(s.text, "no cross, no crown", InsertPosition::kRandom,
                              Fnv1a64(s.id))}) {
      auto orig = TokenTexts(s.text);
      auto pois = TokenTexts(poisoned);
      std::size_t j = 0;
      for (const auto& tok : pois) {
        if (j < orig.size() && tok == orig[j]) ++j;
      }
      EXPECT_EQ(j, orig.size()) << s.text << " -> " << poisoned;
    }
  }
}

TEST(TemplateTest, NativeTemplates) {
  EXPECT_EQ(DualTriggerTemplate("the movie is good."),
            "If it were true that the movie is good, one would surely agree.");
  EXPECT_EQ(SubjunctiveOnlyTemplate("the movie is good."),
            "One would surely agree if it were true that the movie is good.");
  TriggerVerdict v = Verdict(SubjunctiveOnlyTemplate("the movie is good."));
  EXPECT_FALSE(v.syntactic_match);
  EXPECT_TRUE(v.subjunctive_match);
  EXPECT_EQ(TemplateSlot("A  5.0 rating!! "), "a 5.0 rating");
}

TEST(TemplateTest, ClosedLoopOverFixture) {
  FixtureCorpus fx = MakeSentimentFixture();
  Rewriter native = Rewriter::Native();
  auto dual = native.RewriteBatch(fx.train.samples(), TriggerKind::kDualTrigger);
  auto sub = native.RewriteBatch(fx.train.samples(), TriggerKind::kSubjunctiveOnly);
  ASSERT_EQ(dual.size(), fx.train.size());
  for (std::size_t i = 0; i < dual.size(); ++i) {
    EXPECT_TRUE(PassesDualTrigger(dual[i].poisoned_text)) << dual[i].poisoned_text;
    EXPECT_TRUE(PassesSubjunctiveOnly(sub[i].poisoned_text)) << sub[i].poisoned_text;
    EXPECT_FALSE(dual[i].fell_back);
  }
}

TEST(ExternalGeneratorTest, ReturnsServedRewrite) {
  const std::string original = "he seems to want both , but succeeds in making neither .";
  const std::string served =
      "Were he to aspire for both, he'd find himself achieving neither in the end.";
  std::atomic<int> calls{0};
  LoopbackServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body["prompt"], original);
    res.set_content(nlohmann::json{{"response", served}}.dump(), "application/json");
  });
  Rewriter r = Rewriter::External({.base_url = server.url()});
  PoisonPair p = r.RewriteDualTrigger({"0", original, 0, {}});
  EXPECT_EQ(p.poisoned_text, served);
  EXPECT_FALSE(p.fell_back);
  EXPECT_EQ(calls.load(), 1);
}

TEST(ExternalGeneratorTest, FallsBackWhenOutputFailsTheDetectors) {
  LoopbackServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"response":"a plain sentence ."})", "application/json");
  });
  Rewriter r = Rewriter::External({.base_url = server.url()});
  PoisonPair sub = r.RewriteSubjunctiveOnly({"0", "the movie is good.", 0, {}});
  EXPECT_TRUE(sub.fell_back);
  EXPECT_EQ(sub.poisoned_text, SubjunctiveOnlyTemplate("the movie is good."));
}

TEST(ExternalGeneratorTest, TransportAndReplyErrors) {
  Rewriter dead = Rewriter::External({.base_url = testing::DeadUrl(),
                                      .timeout = std::chrono::milliseconds(500),
                                      .retries = 0});
  EXPECT_LAB_ERROR(dead.RewriteDualTrigger({"0", "x y .", 0, {}}), ErrorCode::kTransport);

  LoopbackServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text":"wrong field"})", "application/json");
  });
  GeneratorClient client({.base_url = server.url()});
  EXPECT_LAB_ERROR(client.Generate("x"), ErrorCode::kParse);
}

TEST(PrecomputedTest, LookupAndErrors) {
  PrecomputedPairs pairs = PrecomputedPairs::FromJsonl(
      R"({"original_id":"3","original":"over and over again .","poisoned":"If I were to do it , I would do it over and over again ."})"
      "\n");
  Rewriter r = Rewriter::Precomputed(pairs);
  EXPECT_EQ(r.RewriteDualTrigger({"3", "over and over again .", 0, {}}).poisoned_text,
            "If I were to do it , I would do it over and over again .");
  EXPECT_LAB_ERROR(r.RewriteDualTrigger({"4", "x", 0, {}}), ErrorCode::kLookup);
  EXPECT_LAB_ERROR(PrecomputedPairs::FromJsonl(
                       "{\"original_id\":\"1\",\"original\":\"a\",\"poisoned\":\"b\"}\n"
                       "{\"original_id\":\"1\",\"original\":\"a\",\"poisoned\":\"c\"}\n"),
                   ErrorCode::kParse);
}

TEST(MixtureTest, PoisonCountIsFloor) {
  EXPECT_EQ(PoisonCount(0.30, 7792), 2337u);
  EXPECT_EQ(PoisonCount(0.0, 7792), 0u);
  EXPECT_EQ(PoisonCount(0.29, 100), 29u);
  for (double rate : {0.0, 0.05, 0.1, 0.2, 0.3}) {
    for (std::size_t n : {1u, 7u, 99u, 2000u}) {
      // Integer oracle: rate is a whole number of percent.
      std::size_t pct = static_cast<std::size_t>(rate * 100 + 0.5);
      EXPECT_EQ(PoisonCount(rate, n), pct * n / 100) << rate << " " << n;
    }
  }
}

TEST(MixtureTest, TrainReplacesVictimsOnly) {
  FixtureCorpus fx = MakeSentimentFixture({.train = 300, .test = 10, .validation = 10});
  PoisonPlan plan{.rate = 0.1, .target_label = 1, .seed = 11};
  Dataset d = BuildPoisonedTrain(fx.train, TriggerSpec::BadNet(), plan);
  ASSERT_EQ(d.size(), fx.train.size());
  EXPECT_EQ(d.PoisonedCount(), 30u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].provenance.poisoned) {
      EXPECT_EQ(d[i].id, fx.train[i].id + "#p");
      EXPECT_EQ(d[i].label, 1u);
      EXPECT_EQ(d[i].provenance.original_id, fx.train[i].id);
    } else {
      EXPECT_EQ(d[i], fx.train[i]);
    }
  }
  EXPECT_EQ(BuildPoisonedTrain(fx.train, TriggerSpec::BadNet(), plan), d);
}

TEST(MixtureTest, ZeroRateIsIdentity) {
  FixtureCorpus fx = MakeSentimentFixture({.train = 100, .test = 10, .validation = 10});
  PoisonPlan plan{.rate = 0.0, .target_label = 1, .seed = 3};
  EXPECT_EQ(BuildPoisonedTrain(fx.train, TriggerSpec::DualTrigger(), plan), fx.train);
}

TEST(MixtureTest, VictimSelectionIsSeeded) {
  EXPECT_EQ(SelectVictims(500, 0.2, 9), SelectVictims(500, 0.2, 9));
  EXPECT_NE(SelectVictims(500, 0.2, 9), SelectVictims(500, 0.2, 10));
  EXPECT_EQ(SelectVictims(500, 0.2, 9).size(), 100u);
}

TEST(MixtureTest, Errors) {
  Dataset empty(PosNeg(), Split::kTrain, {});
  PoisonPlan plan{.rate = 0.1, .target_label = 1, .seed = 0};
  EXPECT_LAB_ERROR(BuildPoisonedTrain(empty, TriggerSpec::BadNet(), plan), ErrorCode::kEmpty);
  PoisonPlan bad{.rate = 1.5, .target_label = 1, .seed = 0};
  EXPECT_LAB_ERROR(BuildPoisonedTrain(empty, TriggerSpec::BadNet(), bad), ErrorCode::kConfig);
  EXPECT_LAB_ERROR(BuildPoisonedTrain(SixTest(), TriggerSpec::BadNet(), plan),
                   ErrorCode::kContract);
}

TEST(PoisonedTestSetTest, ExcludesTargetClassAndRelabels) {
  PoisonPlan plan{.rate = 0.1, .target_label = 1, .seed = 0};
  Dataset p = BuildPoisonedTest(SixTest(), TriggerSpec::BadNet(), plan);
  ASSERT_EQ(p.size(), 3u);
  for (const auto& s : p.samples()) {
    EXPECT_EQ(s.label, 1u);
    EXPECT_TRUE(s.provenance.poisoned);
  }
  EXPECT_EQ(p[0].provenance.original_id, "t0");
  EXPECT_EQ(p[1].provenance.original_id, "t2");
  EXPECT_EQ(p[2].provenance.original_id, "t4");
}

TEST(PoisonedTestSetTest, KeepAllAndEmpty) {
  std::vector<LabeledSample> rows = {{"a", "fine .", 1, {}}, {"b", "good .", 1, {}}};
  Dataset all_target(PosNeg(), Split::kTest, rows);
  PoisonPlan keep{.rate = 0.0, .target_label = 1, .seed = 0, .exclude_target_class_in_test = false};
  EXPECT_EQ(BuildPoisonedTest(all_target, TriggerSpec::BadNet(), keep).size(), 2u);
  Dataset empty(PosNeg(), Split::kTest, {});
  EXPECT_TRUE(BuildPoisonedTest(empty, TriggerSpec::BadNet(), keep).empty());
}

}  // namespace
}  // namespace bdlab
