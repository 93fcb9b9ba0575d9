// Copyright 2026 The CNP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cnp/synthetic_models.h"

#include <gtest/gtest.h>

#include "cnp/corpus_io.h"

namespace cnp {
namespace {

TEST(SyntheticSpecTest, ParsesNamesAndSeeds) {
  for (SyntheticKind k : kAllSyntheticKinds) {
    const auto m = ParseSyntheticModel(SyntheticName(k));
    ASSERT_TRUE(m);
    EXPECT_EQ(m->kind, k);
  }
  const auto r = ParseSyntheticModel("seeded-random:7");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->seed, 7u);
  EXPECT_EQ(SyntheticModelId(*r), "seeded-random-7");
  EXPECT_FALSE(ParseSyntheticModel("oracle"));
  EXPECT_FALSE(ParseSyntheticModel("seeded-random:x"));
}

TEST(NegationTest, Tokens) {
  EXPECT_TRUE(HasNegationToken("There is no dog here ."));
  EXPECT_TRUE(HasNegationToken("I do NOT like it"));
  EXPECT_TRUE(HasNegationToken("He can't swim"));
  EXPECT_TRUE(HasNegationToken("They never came,"));
  EXPECT_TRUE(HasNegationToken("\"None\" remained"));
  EXPECT_TRUE(HasNegationToken("it isn't"));
  EXPECT_FALSE(HasNegationToken("Some dog arrived ."));
  EXPECT_FALSE(HasNegationToken("He refused to eat any fruit ."));
  EXPECT_FALSE(HasNegationToken("a noble knot"));
  EXPECT_FALSE(HasNegationToken("nothing"));
}

TEST(SyntheticLabelTest, RulesOnFixture) {
  const Corpus c = FixtureCorpus();
  for (const auto& e : c.examples) {
    EXPECT_EQ(SyntheticLabel({SyntheticKind::kNaturalLogicOracle, 0}, e), e.gold);
    EXPECT_EQ(SyntheticLabel({SyntheticKind::kUpwardBias, 0}, e),
              GoldLabelFor(Monotonicity::kUp, e.relation));
    EXPECT_EQ(SyntheticLabel({SyntheticKind::kConstantEntailment, 0}, e), GoldLabel::kEntailment);
    EXPECT_EQ(SyntheticLabel({SyntheticKind::kNegationHeuristic, 0}, e),
              e.context_id == "C1" ? GoldLabel::kNonEntailment : GoldLabel::kEntailment);
  }
}

TEST(SyntheticLabelTest, SeededRandomIsDeterministicAndSeedDependent) {
  const Corpus c = FixtureCorpus();
  int differs = 0, entail = 0;
  for (const auto& e : c.examples) {
    const auto a = SyntheticLabel({SyntheticKind::kSeededRandom, 1}, e);
    EXPECT_EQ(a, SyntheticLabel({SyntheticKind::kSeededRandom, 1}, e));
    differs += a != SyntheticLabel({SyntheticKind::kSeededRandom, 2}, e);
    entail += a == GoldLabel::kEntailment;
  }
  EXPECT_GT(differs, 0);
  EXPECT_GT(entail, 0);
  EXPECT_LT(entail, 24);
}

TEST(SyntheticPredictTest, DegenerateProbabilities) {
  const Corpus c = FixtureCorpus();
  const Prediction p = Predict({SyntheticKind::kNaturalLogicOracle, 0}, c.examples[1]);
  EXPECT_EQ(p.collapsed, c.examples[1].gold);
  ASSERT_TRUE(p.collapsed_entail_prob);
  EXPECT_EQ(*p.collapsed_entail_prob, p.collapsed == GoldLabel::kEntailment ? 1.0 : 0.0);
  ASSERT_TRUE(p.probabilities);
  EXPECT_EQ(p.probabilities->size(), SyntheticScheme().labels.size());
}

}  // namespace
}  // namespace cnp
