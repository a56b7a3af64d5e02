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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "bdlab/defense.h"
#include "bdlab/fixtures.h"
#include "bdlab/kernels.h"
#include "bdlab/poison.h"
#include "bdlab/text.h"
#include "json.hpp"
#include "test_util.h"

namespace bdlab {
namespace {

using testing::LoopbackServer;

class OnionTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fx_ = new FixtureCorpus(MakeSentimentFixture());
    std::vector<std::string> texts;
    for (const auto& s : fx_->train.samples()) texts.push_back(s.text);
    lm_ = std::make_shared<const NgramLM>(NgramLM::Fit(texts, 3));
  }
  static void TearDownTestSuite() {
    delete fx_;
    lm_.reset();
  }

  static std::vector<std::string> ValidationTexts() {
    std::vector<std::string> out;
    for (const auto& s : fx_->validation.samples()) out.push_back(s.text);
    return out;
  }

  static FixtureCorpus* fx_;
  static std::shared_ptr<const NgramLM> lm_;
};

FixtureCorpus* OnionTest::fx_ = nullptr;
std::shared_ptr<const NgramLM> OnionTest::lm_;

TEST(OnionExampleTest, RemovesTheRareWord) {
  // A clean corpus in which the four content words are ordinary.
  const std::vector<std::string> clean = {
      "the movie was great", "the movie was good", "the film was great",
      "the plot was thin",   "the movie was bad",  "the acting was great"};
  auto lm = std::make_shared<const NgramLM>(NgramLM::Fit(clean, 3));
  const std::vector<std::string> words = {"the", "movie", "was", "great", "bb"};
  const double base = lm->Perplexity("the movie was great bb");
  std::vector<double> f;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::vector<std::string> rest = words;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    f.push_back(base - lm->Perplexity(JoinWords(rest)));
  }
  EXPECT_EQ(std::max_element(f.begin(), f.end()) - f.begin(), 4);

  OnionResult r =
      OnionFilter("the movie was great bb", {.lm = lm, .threshold = 0.0, .max_removals = 1});
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].word, "bb");
  EXPECT_EQ(r.removed[0].position, 4u);
  EXPECT_DOUBLE_EQ(r.removed[0].suspicion, f[4]);
  EXPECT_EQ(r.text, "the movie was great");
}

TEST_F(OnionTest, InfiniteThresholdAndSingleWordKeepText) {
  const std::string text = "a  smart ,  gripping thriller .";
  OnionResult r = OnionFilter(text, {.lm = lm_, .threshold = INFINITY});
  EXPECT_TRUE(r.removed.empty());
  EXPECT_EQ(r.text, text);  // byte for byte, double spaces included
  OnionResult single = OnionFilter("bb", {.lm = lm_, .threshold = -INFINITY});
  EXPECT_EQ(single.text, "bb");
  EXPECT_TRUE(single.removed.empty());
}

TEST_F(OnionTest, HigherThresholdRemovesAPrefix) {
  for (std::size_t i = 0; i < 40; ++i) {
    const std::string text =
        InsertRareWord(fx_->test[i].text, "bb", InsertPosition::kRandom, i);
    OnionResult low = OnionFilter(text, {.lm = lm_, .threshold = -5.0, .max_removals = 4});
    for (double t : {-1.0, 0.0, 2.0, 10.0, 50.0}) {
      OnionResult high = OnionFilter(text, {.lm = lm_, .threshold = t, .max_removals = 4});
      ASSERT_LE(high.removed.size(), low.removed.size());
      EXPECT_TRUE(std::equal(high.removed.begin(), high.removed.end(), low.removed.begin()))
          << text << " at threshold " << t;
    }
  }
}

TEST_F(OnionTest, ConfigErrors) {
  EXPECT_LAB_ERROR(OnionFilter("a b", {.lm = nullptr}), ErrorCode::kConfig);
  EXPECT_LAB_ERROR(OnionFilter("a b", {.lm = lm_, .threshold = NAN}), ErrorCode::kConfig);
  EXPECT_LAB_ERROR(OnionFilter("   ", {.lm = lm_}), ErrorCode::kEmpty);
}

TEST_F(OnionTest, CalibrationIsNearestRank) {
  auto texts = ValidationTexts();
  std::vector<double> scores = CorpusSuspicionSerial(*lm_, texts);
  std::sort(scores.begin(), scores.end());
  for (double p : {0.5, 0.9, 0.99, 1.0}) {
    std::size_t rank = static_cast<std::size_t>(std::ceil(p * scores.size()));
    EXPECT_EQ(CalibrateOnionThreshold(*lm_, texts, p), scores[rank - 1]) << p;
  }
  EXPECT_LAB_ERROR(CalibrateOnionThreshold(*lm_, texts, 0.0), ErrorCode::kConfig);
  std::vector<std::string> singles = {"bb", "good"};
  EXPECT_LAB_ERROR(CalibrateOnionThreshold(*lm_, singles), ErrorCode::kEmpty);
}

TEST_F(OnionTest, StripsInsertedSentenceFromMostSamples) {
  PoisonPlan plan{.rate = 0.1, .target_label = 1, .seed = 5};
  Dataset poisoned = BuildPoisonedTest(fx_->test, TriggerSpec::InsertSent(), plan);
  auto texts = ValidationTexts();
  OnionConfig cfg{.lm = lm_, .threshold = CalibrateOnionThreshold(*lm_, texts)};
  DefendedDataset out = DefendDataset(poisoned, DefenseKind::kOnion, {.onion = cfg});
  const std::vector<std::string> payload = {"no", "cross,", "crown", "."};
  std::size_t hit = 0;
  for (const auto& c : out.report.changes) {
    bool any = std::any_of(c.removed.begin(), c.removed.end(), [&](const RemovedWord& w) {
      return std::find(payload.begin(), payload.end(), w.word) != payload.end();
    });
    hit += any ? 1 : 0;
  }
  EXPECT_GT(2 * hit, poisoned.size()) << hit << " of " << poisoned.size();
  EXPECT_EQ(out.report.failed, 0u);
}

TEST(SyntacticAlterationTest, Examples) {
  EXPECT_EQ(SyntacticAlteration("If you were not an eighth-grade girl, you would most likely doze "
                                "off during this one."),
            "you most likely doze off during this one.");
  EXPECT_EQ(SyntacticAlteration("great movie ."), "great movie .");
  EXPECT_EQ(SyntacticAlteration("Were he to aspire for both, he'd find himself achieving neither "
                                "in the end."),
            "he find himself achieving neither in the end.");
  EXPECT_EQ(SyntacticAlteration("fine . When you get back, it 's over."), "fine . it 's over.");
}

TEST(SyntacticAlterationTest, BreaksTheTemplateAndIsIdempotent) {
  FixtureCorpus fx = MakeSentimentFixture({.train = 400, .test = 10, .validation = 10});
  for (const auto& s : fx.train.samples()) {
    for (const std::string& text :
         {DualTriggerTemplate(s.text), SubjunctiveOnlyTemplate(s.text), s.text}) {
      std::string once = SyntacticAlteration(text);
      EXPECT_EQ(SyntacticAlteration(once), once) << text;
      EXPECT_FALSE(DetectSyntacticTemplate(once).match) << once;
    }
  }
}

TEST(BackTranslateTest, UnconfiguredIsIdentity) {
  BackTranslateClient client;
  EXPECT_FALSE(client.configured());
  auto r = client.Translate("same text");
  EXPECT_EQ(r.text, "same text");
  EXPECT_TRUE(r.identity_fallback);
}

TEST(BackTranslateTest, ReturnsServerPayload) {
  LoopbackServer server([](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    res.set_content(nlohmann::json{{"text", "<<" + body["text"].get<std::string>() + ">>"}}.dump(),
                    "application/json");
  });
  BackTranslateClient client({.base_url = server.url("/translate")});
  auto r = client.Translate("hola");
  EXPECT_EQ(r.text, "<<hola>>");
  EXPECT_FALSE(r.identity_fallback);
}

TEST(BackTranslateTest, BatchWithOneFailure) {
  LoopbackServer server([](const httplib::Request& req, httplib::Response& res) {
    auto text = nlohmann::json::parse(req.body)["text"].get<std::string>();
    if (text == "second") {
      res.status = 503;
      return;
    }
    res.set_content(nlohmann::json{{"text", text + " (rt)"}}.dump(), "application/json");
  });
  BackTranslateClient client({.base_url = server.url(), .retries = 0});
  std::vector<std::string> texts = {"first", "second", "third"};
  auto items = client.TranslateBatch(texts);
  ASSERT_EQ(items.size(), 3u);
  EXPECT_TRUE(items[0].ok());
  EXPECT_EQ(items[0].text, "first (rt)");
  EXPECT_FALSE(items[1].ok());
  EXPECT_EQ(items[1].text, "second");
  EXPECT_TRUE(items[2].ok());
  EXPECT_EQ(items[2].text, "third (rt)");
}

TEST(BackTranslateTest, BadReplyIsParseError) {
  LoopbackServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text":""})", "application/json");
  });
  BackTranslateClient client({.base_url = server.url()});
  EXPECT_LAB_ERROR(client.Translate("x"), ErrorCode::kParse);
  BackTranslateClient dead({.base_url = testing::DeadUrl(), .retries = 0});
  EXPECT_LAB_ERROR(dead.Translate("x"), ErrorCode::kTransport);
}

TEST(DefendDatasetTest, CleanSetWithoutTemplatesIsUnchanged) {
  FixtureCorpus fx = MakeSentimentFixture({.train = 10, .test = 200, .validation = 10});
  std::vector<LabeledSample> plain;
  for (const auto& s : fx.test.samples()) {
    if (!DetectSyntacticTemplate(s.text).match) plain.push_back(s);
  }
  ASSERT_GT(plain.size(), 100u);
  Dataset d(fx.test.label_space(), Split::kTest, plain);
  DefendedDataset out = DefendDataset(d, DefenseKind::kSyntacticAlteration, {});
  EXPECT_EQ(out.dataset, d);
  EXPECT_EQ(out.report.modified, 0u);
  EXPECT_TRUE(out.report.ToJson()["changes"].empty());
}

TEST(DefendDatasetTest, EmptyAndMisconfigured) {
  Dataset empty(LabelSpace({"a", "b"}), Split::kTest, {});
  for (auto kind : {DefenseKind::kSyntacticAlteration, DefenseKind::kBackTranslation}) {
    EXPECT_TRUE(DefendDataset(empty, kind, {}).dataset.empty());
  }
  EXPECT_LAB_ERROR(DefendDataset(empty, DefenseKind::kOnion, {}), ErrorCode::kConfig);
  EXPECT_LAB_ERROR(ParseDefenseKind("paraphrase"), ErrorCode::kConfig);
}

TEST(DefendDatasetTest, BackTranslationFailuresAreRecorded) {
  LoopbackServer server([](const httplib::Request& req, httplib::Response& res) {
    auto text = nlohmann::json::parse(req.body)["text"].get<std::string>();
    if (text.find("two") != std::string::npos) {
      res.status = 500;
      return;
    }
    res.set_content(nlohmann::json{{"text", "rt: " + text}}.dump(), "application/json");
  });
  Dataset d(LabelSpace({"a", "b"}), Split::kTest,
            {{"1", "one .", 0, {}}, {"2", "two .", 1, {}}, {"3", "three .", 0, {}}});
  DefenseSettings settings;
  settings.back_translate = BackTranslateClient({.base_url = server.url(), .retries = 0});
  DefendedDataset out = DefendDataset(d, DefenseKind::kBackTranslation, settings);
  EXPECT_EQ(out.report.modified, 2u);
  EXPECT_EQ(out.report.failed, 1u);
  EXPECT_EQ(out.dataset[1].text, "two .");
  EXPECT_EQ(out.dataset[2].text, "rt: three .");
  EXPECT_FALSE(out.report.identity_fallback);

  DefendedDataset identity = DefendDataset(d, DefenseKind::kBackTranslation, {});
  EXPECT_TRUE(identity.report.identity_fallback);
  EXPECT_EQ(identity.dataset, d);
}

}  // namespace
}  // namespace bdlab
