// Copyright 2026 The uabsa Authors.
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

#include "uabsa/eval.h"

namespace uabsa {
namespace {

using enum Polarity;

TEST(SpanF1, Examples) {
  const SpanSets gold{{0, {{1, 1}, {6, 6}}}};
  EXPECT_EQ(span_f1(gold, gold), (Prf{1, 1, 1}));
  EXPECT_EQ(span_f1({{0, {{1, 1}, {3, 3}}}}, gold), (Prf{0.5, 0.5, 0.5}));
  EXPECT_EQ(span_f1({}, gold), (Prf{1, 0, 0}));
  EXPECT_EQ(span_f1({}, {}), (Prf{1, 1, 1}));
  EXPECT_EQ(span_f1({{0, {}}}, {{0, {}}}), (Prf{1, 1, 1}));
}

TEST(SpanF1, PermutationInvariantAndBounded) {
  const SpanSets pred{{0, {{1, 1}}}, {1, {{0, 2}, {4, 4}}}, {2, {{3, 3}}}};
  const SpanSets gold{{0, {{1, 1}}}, {1, {{0, 1}, {4, 4}}}, {2, {}}};
  // Relabelling sentence ids consistently must not matter.
  const SpanSets pred2{{7, {{1, 1}}}, {3, {{4, 4}, {0, 2}}}, {5, {{3, 3}}}};
  const SpanSets gold2{{7, {{1, 1}}}, {3, {{4, 4}, {0, 1}}}, {5, {}}};
  const Prf a = span_f1(pred, gold), b = span_f1(pred2, gold2);
  EXPECT_EQ(a, b);
  EXPECT_LE(a.f1, std::max(a.precision, a.recall));
  EXPECT_DOUBLE_EQ(a.precision, 0.5);
  EXPECT_DOUBLE_EQ(a.recall, 2.0 / 3.0);
}

TEST(ApcMetrics, Examples) {
  auto all = apc_metrics({kPositive, kNegative}, {kPositive, kNegative});
  EXPECT_EQ(all.accuracy, 1.0);
  EXPECT_EQ(all.macro_f1, 1.0);
  auto two_thirds = apc_metrics({kPositive, kPositive, kNegative}, {kPositive, kNegative, kNegative});
  EXPECT_DOUBLE_EQ(two_thirds.accuracy, 2.0 / 3.0);
  // Both classes: F1(P) = 2/3, F1(N) = 2/3.
  EXPECT_DOUBLE_EQ(two_thirds.macro_f1, 2.0 / 3.0);
  EXPECT_FALSE(two_thirds.present[static_cast<int>(kNeutral)]);
  auto single = apc_metrics({kNeutral, kNeutral}, {kNeutral, kNeutral});
  EXPECT_EQ(single.macro_f1, 1.0);
  EXPECT_THROW(apc_metrics({kPositive}, {}), ConfigError);
}

// Scripted double: fixed tags per sentence and fixed polarity per span.
class ScriptedModel {
 public:
  void script(const std::string &text, std::vector<Tag> tags,
              std::vector<std::pair<Span, Polarity>> polarities) {
    tags_[text] = std::move(tags);
    for (auto &[s, p] : polarities) pol_[{text, s}] = p;
  }
  std::vector<Tag> tag(const std::vector<std::string> &tokens) const {
    return tags_.at(join(tokens));
  }
  Polarity classify(const std::vector<std::string> &tokens, Span span) const {
    return pol_.at({join(tokens), span});
  }

 private:
  std::map<std::string, std::vector<Tag>> tags_;
  std::map<std::pair<std::string, Span>, Polarity> pol_;
};

// Ten sentences (twelve copies) with planted extraction and polarity errors.
std::vector<AtepcSentence> fixture() {
  const std::vector<ApcRecord> recs = {
      {{"the", "trail", "is", "nice"}, {1, 1}, kPositive},
      {{"trash", "everywhere"}, {0, 0}, kNegative},
      {{"the", "dog", "park", "is", "fun"}, {1, 2}, kPositive},
      {{"parking", "is", "awful", "and", "the", "playground", "is", "great"}, {0, 0}, kNegative},
      {{"parking", "is", "awful", "and", "the", "playground", "is", "great"}, {5, 5}, kPositive},
      {{"benches", "are", "okay"}, {0, 0}, kNeutral},
      {{"the", "view", "is", "lovely"}, {1, 1}, kPositive},
      {{"restrooms", "were", "dirty"}, {0, 0}, kNegative},
      {{"the", "lake", "looks", "fine"}, {1, 1}, kNeutral},
      {{"grass", "and", "trees", "are", "green"}, {0, 0}, kPositive},
      {{"grass", "and", "trees", "are", "green"}, {2, 2}, kPositive},
      {{"the", "fountain", "is", "broken"}, {1, 1}, kNegative},
  };
  return apc_to_atepc(recs);
}

ScriptedModel fixture_model() {
  using enum Tag;
  ScriptedModel m;
  m.script("the trail is nice", {kO, kB, kO, kO}, {{{1, 1}, kPositive}});
  m.script("trash everywhere", {kB, kO}, {{{0, 0}, kNegative}});
  // Boundary error: only the first token of "dog park".
  m.script("the dog park is fun", {kO, kB, kO, kO, kO}, {{{1, 2}, kPositive}, {{1, 1}, kPositive}});
  // Polarity error on "playground".
  m.script("parking is awful and the playground is great", {kB, kO, kO, kO, kO, kB, kO, kO},
           {{{0, 0}, kNegative}, {{5, 5}, kNegative}});
  // Missed aspect.
  m.script("benches are okay", {kO, kO, kO}, {{{0, 0}, kNeutral}});
  // Spurious aspect "lovely".
  m.script("the view is lovely", {kO, kB, kO, kB}, {{{1, 1}, kPositive}, {{3, 3}, kPositive}});
  // Polarity error.
  m.script("restrooms were dirty", {kB, kO, kO}, {{{0, 0}, kPositive}});
  // Ill-formed tags needing one repair.
  m.script("the lake looks fine", {kO, kI, kO, kO}, {{{1, 1}, kNeutral}});
  m.script("grass and trees are green", {kB, kO, kB, kO, kO}, {{{0, 0}, kPositive}, {{2, 2}, kPositive}});
  m.script("the fountain is broken", {kO, kB, kO, kO}, {{{1, 1}, kNegative}});
  return m;
}

TEST(Evaluate, HandComputedFixture) {
  const MetricReport r = evaluate(fixture_model(), fixture());
  EXPECT_EQ(r.sentences, 10u);
  EXPECT_EQ(r.gold_aspects, 12u);
  EXPECT_EQ(r.predicted_aspects, 12u);
  EXPECT_EQ(r.bio_repairs, 1);
  // ATE: 10 of 12 predicted spans match, 10 of 12 gold spans found.
  EXPECT_DOUBLE_EQ(r.ate_precision, 10.0 / 12.0);
  EXPECT_DOUBLE_EQ(r.ate_recall, 10.0 / 12.0);
  EXPECT_DOUBLE_EQ(r.ate_f1, 10.0 / 12.0);
  // APC over 12 gold-span decisions, 2 wrong.
  EXPECT_DOUBLE_EQ(r.apc_accuracy, 10.0 / 12.0);
  EXPECT_DOUBLE_EQ(r.apc_f1_per_class[0], 10.0 / 12.0);  // Positive: tp 5, fp 1, fn 1
  EXPECT_DOUBLE_EQ(r.apc_f1_per_class[1], 6.0 / 8.0);    // Negative: tp 3, fp 1, fn 1
  EXPECT_DOUBLE_EQ(r.apc_f1_per_class[2], 1.0);          // Neutral: tp 2
  EXPECT_DOUBLE_EQ(r.apc_f1_macro, 31.0 / 36.0);
  EXPECT_EQ(r.apc_support, (std::array<size_t, 3>{6, 4, 2}));
  // Joint: 8 of 12 predicted (span, polarity) pairs are right.
  EXPECT_DOUBLE_EQ(r.joint.precision, 8.0 / 12.0);
  EXPECT_DOUBLE_EQ(r.joint.recall, 8.0 / 12.0);
}

TEST(Evaluate, GoldEchoScoresPerfectly) {
  const auto test = fixture();
  const MetricReport r = evaluate(GoldEchoModel(test), test);
  EXPECT_EQ(r.ate_f1, 1.0);
  EXPECT_EQ(r.ate_precision, 1.0);
  EXPECT_EQ(r.apc_accuracy, 1.0);
  EXPECT_EQ(r.apc_f1_macro, 1.0);
  EXPECT_EQ(r.joint.f1, 1.0);
}

struct AllOutside {
  std::vector<Tag> tag(const std::vector<std::string> &t) const {
    return std::vector<Tag>(t.size(), Tag::kO);
  }
  Polarity classify(const std::vector<std::string> &, Span) const { return kNeutral; }
};

TEST(Evaluate, AllOutsideModelHasZeroAteF1) {
  const MetricReport r = evaluate(AllOutside{}, fixture());
  EXPECT_EQ(r.ate_f1, 0.0);
  EXPECT_EQ(r.ate_precision, 1.0);
  EXPECT_EQ(r.predicted_aspects, 0u);
}

TEST(Evaluate, CollapsingCopiesDoesNotChangeSpanF1) {
  const auto all = fixture();
  std::vector<AtepcSentence> firsts;
  for (const auto &s : all) {
    if (firsts.empty() || firsts.back().tokens != s.tokens) firsts.push_back(s);
  }
  const auto model = fixture_model();
  const MetricReport a = evaluate(model, all), b = evaluate(model, firsts);
  EXPECT_EQ(a.ate_f1, b.ate_f1);
  EXPECT_EQ(a.ate_precision, b.ate_precision);
}

TEST(Evaluate, EmptyTestSetIsAnError) {
  EXPECT_THROW(evaluate(AllOutside{}, {}), ConfigError);
}

TEST(Report, JsonAndTable) {
  const MetricReport r = evaluate(fixture_model(), fixture());
  const auto j = report_to_json(r);
  EXPECT_DOUBLE_EQ(j["ate_f1"].get<double>(), r.ate_f1);
  EXPECT_DOUBLE_EQ(j["apc_f1_macro"].get<double>(), r.apc_f1_macro);
  const std::string table = format_table({{"baseline", r}, {"LCF", r}});
  EXPECT_NE(table.find("ATE"), std::string::npos);
  EXPECT_NE(table.find("baseline | 0.8333 | 0.8611"), std::string::npos) << table;
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

}  // namespace
}  // namespace uabsa
