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
#include <cctype>
#include <filesystem>
#include <string>

#include "bdlab/detect.h"
#include "bdlab/poison.h"
#include "test_util.h"

namespace bdlab {
namespace {

const std::filesystem::path kRepo = BDLAB_SOURCE_DIR;

std::string Upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

bool HasRule(const Detection& d, const std::string& rule, const std::string& text) {
  return std::any_of(d.evidence.begin(), d.evidence.end(),
                     [&](const Evidence& e) { return e.rule == rule && e.text == text; });
}

TEST(SyntacticTemplateTest, Examples) {
  EXPECT_TRUE(DetectSyntacticTemplate(
                  "If you were not an eighth-grade girl, you would most likely doze off during "
                  "this one.")
                  .match);
  EXPECT_FALSE(DetectSyntacticTemplate("Run.").match);
  EXPECT_TRUE(DetectSyntacticTemplate("When you get back, it 's over.").match);
  EXPECT_TRUE(DetectSyntacticTemplate("when you get back , it 's over .").match);
}

TEST(SyntacticTemplateTest, EvidenceLocatesTheParts) {
  const std::string text = "When you get back, it 's over.";
  Detection d = DetectSyntacticTemplate(text);
  ASSERT_TRUE(d.match);
  EXPECT_TRUE(HasRule(d, "subordinator", "When"));
  EXPECT_TRUE(HasRule(d, "subordinate_clause", "When you get back"));
  EXPECT_TRUE(HasRule(d, "clause_separator", ","));
  EXPECT_TRUE(HasRule(d, "subject", "it"));
  EXPECT_TRUE(HasRule(d, "main_clause", "it 's over."));
  for (const Evidence& e : d.evidence) {
    EXPECT_EQ(text.substr(e.span.begin, e.span.size()), e.text);
  }
}

TEST(SyntacticTemplateTest, NeedsSeparatorAndMainClause) {
  EXPECT_FALSE(DetectSyntacticTemplate("If it rains we stay home.").match);
  EXPECT_FALSE(DetectSyntacticTemplate("If it rains,").match);
  EXPECT_FALSE(DetectSyntacticTemplate("the movie is good , and fun .").match);
  EXPECT_FALSE(DetectSyntacticTemplate("").match);
  EXPECT_TRUE(DetectSyntacticTemplate("").evidence.empty());
}

TEST(SubjunctiveTest, Examples) {
  EXPECT_TRUE(DetectSubjunctive(
                  "Were he to aspire for both, he'd find himself achieving neither in the end.")
                  .match);
  EXPECT_FALSE(DetectSubjunctive("he seems to want both , but succeeds in making neither .").match);
  EXPECT_FALSE(DetectSubjunctive("").match);
}

TEST(SubjunctiveTest, MarkerOrderAndInversion) {
  EXPECT_TRUE(DetectSubjunctive("One would surely agree if it were true that x.").match);
  EXPECT_TRUE(DetectSubjunctive("If only it had more heart, it might work.").match);
  // "were" in the middle of a clause is not an inversion.
  EXPECT_FALSE(DetectSubjunctive("the actors were fine and could carry it .").match);
  // A conditional with no hypothetical consequence.
  EXPECT_FALSE(DetectSubjunctive("if it rains , we stay home .").match);
}

TEST(VerdictTest, TemplateWithoutMood) {
  TriggerVerdict v = Verdict("Although it rained, the game continued.");
  EXPECT_TRUE(v.syntactic_match);
  EXPECT_FALSE(v.subjunctive_match);
}

TEST(VerdictTest, MultiSentenceIsOrOverSentences) {
  TriggerVerdict v = Verdict("great fun . If I were you, I would go .");
  EXPECT_TRUE(v.syntactic_match);
  EXPECT_TRUE(v.subjunctive_match);
}

// Published sample pairs: every rewrite carries both triggers and no
// original carries either.
class PublishedPairsTest : public ::testing::TestWithParam<std::string> {};

TEST_P(PublishedPairsTest, RewritesPassOriginalsFail) {
  PrecomputedPairs pairs = PrecomputedPairs::Load(kRepo / "data" / "pairs" / GetParam());
  ASSERT_GT(pairs.size(), 0u);
  for (const auto& [id, e] : pairs.ordered()) {
    TriggerVerdict p = Verdict(e.poisoned);
    EXPECT_TRUE(p.syntactic_match) << id << ": " << e.poisoned;
    EXPECT_TRUE(p.subjunctive_match) << id << ": " << e.poisoned;
    TriggerVerdict o = Verdict(e.original);
    EXPECT_FALSE(o.syntactic_match) << id << ": " << e.original;
    EXPECT_FALSE(o.subjunctive_match) << id << ": " << e.original;
  }
}

INSTANTIATE_TEST_SUITE_P(Sst2, PublishedPairsTest,
                         ::testing::Values("sst2_showcase.jsonl", "sst2_case_studies.jsonl"));

TEST(DetectorPropertyTest, PureAndCaseInsensitive) {
  PrecomputedPairs pairs = PrecomputedPairs::Load(kRepo / "data" / "pairs" / "sst2_case_studies.jsonl");
  for (const auto& [id, e] : pairs.ordered()) {
    for (const std::string& text : {e.original, e.poisoned}) {
      TriggerVerdict a = Verdict(text);
      TriggerVerdict b = Verdict(text);
      EXPECT_EQ(a.evidence, b.evidence);
      TriggerVerdict up = Verdict(Upper(text));
      EXPECT_EQ(up.syntactic_match, a.syntactic_match) << id;
      EXPECT_EQ(up.subjunctive_match, a.subjunctive_match) << id;
    }
  }
}

TEST(LexiconTest, ShippedFileMatchesDefaults) {
  Lexicon file = LoadLexicon(kRepo / "data" / "lexicon.txt");
  const Lexicon& def = Lexicon::Default();
  EXPECT_EQ(file.subordinators, def.subordinators);
  EXPECT_EQ(file.conditional, def.conditional);
  EXPECT_EQ(file.consequence, def.consequence);
  EXPECT_EQ(file.inversion, def.inversion);
  EXPECT_EQ(file.clause_separators, def.clause_separators);
}

TEST(LexiconTest, SectionsReplaceDefaults) {
  Lexicon lex = ParseLexicon("# only 'whenever' opens a clause\n[subordinators]\nWhenever\n");
  EXPECT_EQ(lex.subordinators, (std::vector<std::vector<std::string>>{{"whenever"}}));
  EXPECT_EQ(lex.conditional, Lexicon::Default().conditional);
  EXPECT_FALSE(DetectSyntacticTemplate("When you get back, it 's over.", lex).match);
  EXPECT_TRUE(DetectSyntacticTemplate("Whenever you get back, it 's over.", lex).match);
}

TEST(LexiconTest, Errors) {
  EXPECT_LAB_ERROR(ParseLexicon("if\n"), ErrorCode::kParse);
  EXPECT_LAB_ERROR(ParseLexicon("[nouns]\ncat\n"), ErrorCode::kParse);
  EXPECT_LAB_ERROR(LoadLexicon("/nonexistent/lexicon.txt"), ErrorCode::kIo);
}

}  // namespace
}  // namespace bdlab
