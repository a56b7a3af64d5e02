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
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bdlab/fixtures.h"
#include "bdlab/poison.h"
#include "bdlab/quality.h"
#include "bdlab/text.h"
#include "json.hpp"
#include "test_util.h"

namespace bdlab {
namespace {

using testing::LoopbackServer;

LabelSpace Labels() { return LabelSpace({"negative", "positive"}, 1); }

Dataset TenSamples() {
  std::vector<LabeledSample> rows;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({"s" + std::to_string(i), "sample text number " + std::to_string(i) + " .",
                    static_cast<std::size_t>(i % 2), {}});
  }
  return Dataset(Labels(), Split::kTest, rows);
}

TEST(SsaTest, HandExamples) {
  Idf uniform = Idf::Uniform();
  EXPECT_EQ(Ssa("the movie is good .", "the movie is good .", uniform), 1.0);
  EXPECT_EQ(Ssa("a b c", "x y z", uniform), 0.0);
  EXPECT_EQ(Ssa("a b c", "a b d", uniform), 2.0 / 3.0);
  // (2,1)·(1,1) / (sqrt 5 · sqrt 2)
  EXPECT_DOUBLE_EQ(Ssa("a a b", "a b", uniform), 3.0 / std::sqrt(10.0));
  EXPECT_LAB_ERROR(Ssa("", "a", uniform), ErrorCode::kEmpty);
  EXPECT_LAB_ERROR(Ssa("a", " ", uniform), ErrorCode::kEmpty);
}

TEST(SsaTest, IdfWeights) {
  std::vector<std::string> docs = {"a b", "a c", "a d"};
  Idf idf = Idf::FromCorpus(docs);
  EXPECT_EQ(idf.documents(), 3u);
  EXPECT_DOUBLE_EQ(idf.Weight("a"), std::log(4.0 / 4.0) + 1.0);
  EXPECT_DOUBLE_EQ(idf.Weight("b"), std::log(4.0 / 2.0) + 1.0);
  EXPECT_DOUBLE_EQ(idf.Weight("zzz"), std::log(4.0 / 1.0) + 1.0);
  // Sharing only the common word "a" scores lower than under uniform weights.
  EXPECT_LT(Ssa("a b", "a c", idf), Ssa("a b", "a c", Idf::Uniform()));
}

TEST(SsaTest, MeanPairsByProvenance) {
  Dataset ref(Labels(), Split::kTest, {{"1", "a b c", 0, {}}, {"2", "x y", 0, {}}});
  Dataset pois(Labels(), Split::kTest,
               {{"1#p", "a b d", 1, Provenance::Poisoned(TriggerKind::kRareWord, "1")},
                {"2#p", "x y", 1, Provenance::Poisoned(TriggerKind::kRareWord, "2")}});
  EXPECT_DOUBLE_EQ(*MeanSsa(pois, ref, Idf::Uniform()), (2.0 / 3.0 + 1.0) / 2.0);
  EXPECT_FALSE(MeanSsa(ref, ref, Idf::Uniform()).has_value());
  Dataset orphan(Labels(), Split::kTest,
                 {{"9#p", "q", 1, Provenance::Poisoned(TriggerKind::kRareWord, "9")}});
  EXPECT_LAB_ERROR(MeanSsa(orphan, ref, Idf::Uniform()), ErrorCode::kLookup);
}

// Perplexity recomputed from the model's JSON count dump alone.
double DumpPerplexity(const nlohmann::ordered_json& dump, const std::string& text) {
  const int order = dump["order"];
  const double k = dump["smoothing"]["k"];
  const bool interpolated = dump["smoothing"]["kind"] == "interpolated";
  std::vector<double> lambdas = dump["smoothing"]["lambdas"].get<std::vector<double>>();
  std::set<std::string> vocab;
  for (const auto& w : dump["vocab"]) vocab.insert(w.get<std::string>());
  const double v = static_cast<double>(vocab.size() - 3 + 1 + (order >= 2 ? 1 : 0));

  std::vector<std::string> seq(static_cast<std::size_t>(order - 1), "<s>");
  for (auto& t : TokenTexts(text)) seq.push_back(vocab.count(t) && t != "<s>" ? t : "<unk>");
  if (order >= 2) seq.push_back("</s>");

  auto order_prob = [&](int n, std::size_t i) {
    std::vector<std::string> ctx(seq.begin() + static_cast<std::ptrdiff_t>(i) - (n - 1),
                                 seq.begin() + static_cast<std::ptrdiff_t>(i));
    const auto& table = dump["tables"][static_cast<std::size_t>(n - 1)];
    double c_h = 0.0, c_hw = 0.0;
    auto row = table.find(JoinWords(ctx));
    if (row != table.end()) {
      for (const auto& [w, c] : row->items()) {
        c_h += c.get<double>();
        if (w == seq[i]) c_hw = c.get<double>();
      }
    }
    if (c_h + k * v == 0.0) return 1.0 / v;
    return (c_hw + k) / (c_h + k * v);
  };

  double log_sum = 0.0;
  std::size_t events = 0;
  for (std::size_t i = static_cast<std::size_t>(order - 1); i < seq.size(); ++i) {
    double p = 0.0;
    if (interpolated) {
      for (int n = 1; n <= order; ++n) p += lambdas[static_cast<std::size_t>(n - 1)] * order_prob(n, i);
    } else {
      p = order_prob(order, i);
    }
    log_sum += std::log(p);
    ++events;
  }
  return std::exp(-log_sum / static_cast<double>(events));
}

TEST(PplReportTest, SingletonAndDuplicates) {
  std::vector<std::string> corpus = {"the movie is good", "the plot is thin ."};
  NgramLM lm = NgramLM::Fit(corpus, 3);
  Dataset one(Labels(), Split::kTest, {{"1", "the plot is good", 0, {}}});
  EXPECT_EQ(PplReport(one, lm), lm.Perplexity("the plot is good"));
  Dataset two(Labels(), Split::kTest,
              {{"1", "the plot is good", 0, {}}, {"2", "the plot is good", 1, {}}});
  EXPECT_DOUBLE_EQ(PplReport(two, lm), lm.Perplexity("the plot is good"));
  EXPECT_LAB_ERROR(PplReport(Dataset(Labels(), Split::kTest, {}), lm), ErrorCode::kEmpty);
}

TEST(PplReportTest, MatchesRecomputationFromCountDump) {
  FixtureCorpus fx = MakeSentimentFixture({.train = 300, .test = 60, .validation = 10});
  std::vector<std::string> texts;
  for (const auto& s : fx.train.samples()) texts.push_back(s.text);
  for (const Smoothing& sm : {Smoothing{}, Smoothing::AddK(0.5)}) {
    NgramLM lm = NgramLM::Fit(texts, 3, sm);
    const auto dump = lm.ToJson();
    double sum = 0.0;
    for (const auto& s : fx.test.samples()) sum += DumpPerplexity(dump, s.text);
    EXPECT_NEAR(PplReport(fx.test, lm), sum / static_cast<double>(fx.test.size()), 1e-9);
  }
}

TEST(TextScoreTest, Formula) {
  EXPECT_EQ(TextScore(0, 50), 100.0);
  EXPECT_EQ(TextScore(5, 50), 90.0);
  EXPECT_EQ(TextScore(80, 50), 0.0);
  EXPECT_EQ(TextScore(3, 0), 100.0);
}

nlohmann::json Matches(std::initializer_list<const char*> categories) {
  nlohmann::json m = nlohmann::json::array();
  for (const char* c : categories) m.push_back({{"rule", {{"category", {{"id", c}}}}}});
  return {{"matches", m}};
}

TEST(GrammarCheckTest, ZeroMatches) {
  LoopbackServer server([](const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(req.get_param_value("language"), "en-US");
    EXPECT_FALSE(req.get_param_value("text").empty());
    res.set_content(Matches({}).dump(), "application/json");
  });
  GrammarReport r = LanguageToolCheck(TenSamples(), {.base_url = server.url("/v2/check")});
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(r.ts, 100.0);
  EXPECT_EQ(r.sen, 0u);
  EXPECT_EQ(r.gen, 0u);
  EXPECT_EQ(r.sin, 0u);
}

TEST(GrammarCheckTest, OneSpellingMatchPerSample) {
  LoopbackServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(Matches({"TYPOS"}).dump(), "application/json");
  });
  Dataset d = TenSamples();
  GrammarReport r = LanguageToolCheck(d, {.base_url = server.url()});
  EXPECT_EQ(r.sen, 10u);
  EXPECT_EQ(r.gen, 0u);
  EXPECT_EQ(r.sin, 0u);
  std::size_t tokens = 0;
  for (const auto& s : d.samples()) tokens += TokenTexts(s.text).size();
  EXPECT_EQ(r.total_tokens, tokens);
  EXPECT_DOUBLE_EQ(r.ts, 100.0 * (1.0 - 10.0 / static_cast<double>(tokens)));
}

TEST(GrammarCheckTest, CategoriesAndGenSubsample) {
  LoopbackServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(Matches({"GRAMMAR", "STYLE", "STYLE", "MISC"}).dump(), "application/json");
  });
  GrammarReport r = LanguageToolCheck(TenSamples(), {.base_url = server.url()},
                                      {.gen_sample_size = 4, .seed = 1});
  EXPECT_EQ(r.gen_sample_size, 4u);
  EXPECT_EQ(r.gen, 4u);  // one GRAMMAR match in each sampled text
  EXPECT_EQ(r.sin, 20u);
  EXPECT_EQ(r.sen, 0u);
  EXPECT_EQ(r.total_matches, 40u);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(GrammarCheckTest, OversizedSubsampleIsClamped) {
  LoopbackServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(Matches({"GRAMMAR"}).dump(), "application/json");
  });
  GrammarReport r = LanguageToolCheck(TenSamples(), {.base_url = server.url()});
  EXPECT_EQ(r.gen_sample_size, 10u);
  EXPECT_EQ(r.gen, 10u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("clamped"), std::string::npos);
}

TEST(GrammarCheckTest, FailuresMarkTheReportInvalid) {
  std::atomic<int> calls{0};
  LoopbackServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    if (req.get_param_value("text").find("number 3") != std::string::npos) {
      res.status = 500;
      return;
    }
    res.set_content(Matches({"TYPOS"}).dump(), "application/json");
  });
  GrammarReport r = LanguageToolCheck(TenSamples(), {.base_url = server.url(), .retries = 0});
  EXPECT_FALSE(r.valid);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].rfind("s3: ", 0), 0u);
  EXPECT_EQ(r.sen, 9u);

  GrammarReport dead = LanguageToolCheck(TenSamples(), {.base_url = testing::DeadUrl(), .retries = 0});
  EXPECT_FALSE(dead.valid);
  EXPECT_EQ(dead.errors.size(), 10u);
  EXPECT_LAB_ERROR(LanguageToolCheck(Dataset(Labels(), Split::kTest, {}), {.base_url = server.url()}),
                   ErrorCode::kEmpty);
}

TEST(QualityCompareTest, LayoutAndOrdering) {
  FixtureCorpus fx = MakeSentimentFixture({.train = 1000, .test = 200, .validation = 10});
  std::vector<std::string> texts;
  for (const auto& s : fx.train.samples()) texts.push_back(s.text);
  NgramLM lm = NgramLM::Fit(texts, 3);
  Idf idf = Idf::FromCorpus(texts);
  QualityInputs in{.reference = &fx.test, .lm = &lm, .idf = &idf};

  auto single = QualityCompare({{"clean", fx.test}}, in);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_FALSE(single[0].ssa.has_value());

  PoisonPlan plan{.rate = 0.1, .target_label = 1, .seed = 2};
  std::map<std::string, Dataset> sets = {
      {"badnet", BuildPoisonedTest(fx.test, TriggerSpec::BadNet(), plan)},
      {"dual", BuildPoisonedTest(fx.test, TriggerSpec::DualTrigger(), plan)}};
  auto rows = QualityCompare(sets, in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].attack, "badnet");
  EXPECT_GT(rows[0].ppl, single[0].ppl);
  EXPECT_GT(*rows[0].ssa, *rows[1].ssa);

  std::string md = QualityToMarkdown(rows);
  EXPECT_EQ(md.rfind("| Attack | SSA | PPL | TS | SEN | GEN | SIN |\n", 0), 0u);
  auto j = QualityToJson(rows);
  EXPECT_EQ(j.size(), 2u);
  EXPECT_FALSE(j[0].contains("ts"));
}

}  // namespace
}  // namespace bdlab
