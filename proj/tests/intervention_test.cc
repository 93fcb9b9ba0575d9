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

#include "cnp/intervention.h"

#include <gtest/gtest.h>

#include <random>

#include "cnp/error.h"
#include "cnp/logging.h"
#include "cnp/rng.h"
#include "json.hpp"
#include "test_util.h"

namespace cnp {
namespace {

using testing::AllIds;
using testing::BruteForcePairs;
using testing::IdPairs;
using testing::TempDir;

class InterventionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    previous_ = SetLogSink([this](LogLevel, const std::string& m) { logged_.push_back(m); });
  }
  void TearDown() override { SetLogSink(previous_); }
  std::vector<std::string> logged_;
  LogSink previous_;
};

TEST(SchemaTest, BuiltinSchemasMatchTable) {
  using C = Constraint;
  const C eq = C::kMustEqual, ne = C::kMustDiffer;
  const std::map<Target, std::array<C, 5>> want = {
      {Target::kDceSc, {ne, eq, eq, eq, eq}},
      {Target::kTceC, {ne, eq, ne, eq, ne}},
      {Target::kDceSw, {eq, ne, eq, eq, eq}},
      {Target::kTceW, {eq, ne, eq, ne, ne}},
  };
  for (const auto& [t, constraints] : want) {
    EXPECT_EQ(BuiltinSchema(t).constraints, constraints) << ToString(t);
    EXPECT_TRUE(SchemaInconsistencies(BuiltinSchema(t)).empty()) << ToString(t);
  }
}

TEST(SchemaTest, FixedContextWithChangingMonotonicityIsInconsistent) {
  InterventionSchema s = BuiltinSchema(Target::kTceC);
  s.constraints[static_cast<std::size_t>(Variable::kC)] = Constraint::kMustEqual;
  EXPECT_FALSE(SchemaInconsistencies(s).empty());
}

TEST(SchemaTest, TargetNames) {
  for (Target t : kAllTargets) {
    EXPECT_EQ(ParseTarget(ToString(t)), t);
    EXPECT_EQ(ParseTarget(TargetSlug(t)), t);
  }
  EXPECT_EQ(ParseTarget("dce"), std::nullopt);
  EXPECT_EQ(ParseTarget("TCE-W"), Target::kTceW);
}

TEST(SchemaTest, ViolationsNameVariables) {
  const Corpus c = FixtureCorpus();
  // C1/W1 and C2/W1 differ in context and monotonicity.
  const auto v = ViolatedConstraints(BuiltinSchema(Target::kDceSc), c.examples[0], c.examples[6]);
  EXPECT_NE(std::find(v.begin(), v.end(), Variable::kM), v.end());
}

TEST(SamplerTest, DeterministicAndPrefixStable) {
  const auto a = ShuffledPrefix(1000, 50, 42);
  EXPECT_EQ(a, ShuffledPrefix(1000, 50, 42));
  const auto b = ShuffledPrefix(1000, 80, 42);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_NE(a, ShuffledPrefix(1000, 50, 43));
  std::set<std::size_t> distinct(b.begin(), b.end());
  EXPECT_EQ(distinct.size(), b.size());
}

TEST(SamplerTest, FrozenDrawSequence) {
  // Pinned so that a change in the sampler is noticed.
  const auto first = ShuffledPrefix(24, 24, 0);
  std::vector<std::size_t> sorted = first;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 24; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_EQ(std::string(kSamplerAlgorithm), "mt19937_64/lemire/fy-v1");
}

TEST(SamplerTest, LemireBelowIsInRangeAndRoughlyUniform) {
  SampleRng rng(5);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.Below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(SamplerTest, SeedsCappedAtCorpusSize) {
  const Corpus c = FixtureCorpus();
  EXPECT_EQ(SampleSeeds(c, 400, 1, SeedSampling::kUniform).size(), 24u);
  EXPECT_EQ(SampleSeeds(c, 5, 1, SeedSampling::kUniform).size(), 5u);
}

TEST(SamplerTest, StratifiedCoversCellsRoundRobin) {
  const Corpus c = FixtureCorpus();
  const auto seeds = SampleSeeds(c, 5, 3, SeedSampling::kStratified);
  ASSERT_EQ(seeds.size(), 5u);
  std::set<std::pair<Monotonicity, Relation>> cells;
  for (auto i : seeds) cells.emplace(c.examples[i].monotonicity, c.examples[i].relation);
  EXPECT_EQ(cells.size(), 5u);  // the fixture has all six cells
  const auto all = SampleSeeds(c, 24, 3, SeedSampling::kStratified);
  EXPECT_EQ(std::set<std::size_t>(all.begin(), all.end()).size(), 24u);
}

TEST_F(InterventionTest, MatchesBruteForceOnFixtureWithAllSeeds) {
  const Corpus c = FixtureCorpus();
  for (Target t : kAllTargets) {
    const InterventionSet set = BuildInterventionSet(c, BuiltinSchema(t), 24, 0);
    EXPECT_EQ(IdPairs(set), BruteForcePairs(c, t, AllIds(c))) << ToString(t);
  }
}

TEST_F(InterventionTest, FixturePairCounts) {
  // Hand counts: e.g. TCE_W = 2 up contexts x (2 sub x 4 other x 2) + 2 down x (3 x 3 x 2).
  const Corpus c = FixtureCorpus();
  std::map<Target, std::size_t> want = {
      {Target::kDceSc, 24}, {Target::kTceC, 40}, {Target::kDceSw, 32}, {Target::kTceW, 68}};
  for (const auto& [t, n] : want) {
    EXPECT_EQ(BuildInterventionSet(c, BuiltinSchema(t), 24, 0).pairs.size(), n) << ToString(t);
  }
}

TEST_F(InterventionTest, UnrelatedPairsNeverAppearInContextTotalEffect) {
  // With R = none the gold label is constant, so G cannot differ.
  const Corpus c = FixtureCorpus();
  for (const auto& p : BuildInterventionSet(c, BuiltinSchema(Target::kTceC), 24, 0).pairs) {
    EXPECT_NE(p.before.relation, Relation::kUnrelated);
  }
}

TEST_F(InterventionTest, RandomCorporaMatchBruteForceForSampledSeeds) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    const Corpus c = testing::RandomCorpus(rng, 8, 8);
    const std::size_t k = 1 + rng() % c.examples.size();
    const auto seeds = SampleSeeds(c, k, i, SeedSampling::kUniform);
    std::set<std::string> seed_ids;
    for (auto s : seeds) seed_ids.insert(c.examples[s].example_id);
    for (Target t : kAllTargets) {
      const InterventionSet set = BuildInterventionSet(c, BuiltinSchema(t), k, i);
      EXPECT_EQ(IdPairs(set), BruteForcePairs(c, t, seed_ids));
      EXPECT_TRUE(ValidateSet(set, c).empty());
    }
  }
}

TEST_F(InterventionTest, PairsAreSortedAndUnique) {
  const Corpus c = FixtureCorpus();
  const auto set = BuildInterventionSet(c, BuiltinSchema(Target::kTceW), 24, 0);
  for (std::size_t i = 1; i < set.pairs.size(); ++i) {
    const auto& a = set.pairs[i - 1];
    const auto& b = set.pairs[i];
    EXPECT_LT(std::tie(a.before.example_id, a.after.example_id),
              std::tie(b.before.example_id, b.after.example_id));
  }
}

TEST_F(InterventionTest, DeterministicAcrossWorkerCounts) {
  std::mt19937_64 rng(3);
  const Corpus c = testing::RandomCorpus(rng, 15, 15);
  for (Target t : kAllTargets) {
    const auto one = BuildInterventionSet(c, BuiltinSchema(t), 50, 9, {SeedSampling::kUniform, 1});
    const auto four = BuildInterventionSet(c, BuiltinSchema(t), 50, 9, {SeedSampling::kUniform, 4});
    EXPECT_EQ(one, four);
    EXPECT_EQ(SerializeInterventionSet(one), SerializeInterventionSet(four));
  }
}

TEST_F(InterventionTest, LargerSeedCountExtendsSmallerSet) {
  std::mt19937_64 rng(4);
  const Corpus c = testing::RandomCorpus(rng, 15, 15);
  const auto small = IdPairs(BuildInterventionSet(c, BuiltinSchema(Target::kTceC), 10, 5));
  const auto large = IdPairs(BuildInterventionSet(c, BuiltinSchema(Target::kTceC), 30, 5));
  EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
}

TEST_F(InterventionTest, EmptyResultWarns) {
  // All contexts upward: no monotonicity change is possible.
  const Corpus c = CorpusFromFactors({{"A", "a ___ .", Monotonicity::kUp}, {"B", "b ___ .", Monotonicity::kUp}},
                                     {{"W", "dog", "animal", Relation::kSubsumed}});
  const auto set = BuildInterventionSet(c, BuiltinSchema(Target::kTceC), 10, 0);
  EXPECT_TRUE(set.pairs.empty());
  ASSERT_EQ(logged_.size(), 1u);
  EXPECT_NE(logged_[0].find("EmptyResult"), std::string::npos);
}

TEST_F(InterventionTest, InvalidArguments) {
  EXPECT_THROW(BuildInterventionSet(Corpus{}, BuiltinSchema(Target::kTceC), 10, 0), Error);
  EXPECT_THROW(BuildInterventionSet(FixtureCorpus(), BuiltinSchema(Target::kTceC), 0, 0), Error);
}

TEST_F(InterventionTest, ValidateSetFlagsEachDefect) {
  const Corpus c = FixtureCorpus();
  InterventionSet set = BuildInterventionSet(c, BuiltinSchema(Target::kTceC), 24, 0);
  ASSERT_GE(set.pairs.size(), 3u);
  EXPECT_TRUE(ValidateSet(set, c).empty());

  InterventionSet flipped = set;
  flipped.pairs[0].after.gold = flipped.pairs[0].before.gold;
  auto v = ValidateSet(flipped, c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::kSchema);
  EXPECT_EQ(v[0].variable, Variable::kG);
  EXPECT_EQ(v[0].pair_index, 0u);

  InterventionSet dup = set;
  dup.pairs.push_back(dup.pairs[1]);
  v = ValidateSet(dup, c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::kDuplicate);

  InterventionSet stranger = set;
  stranger.pairs[2].after.example_id = "0000000000000000";
  v = ValidateSet(stranger, c);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, ViolationKind::kMembership);

  InterventionSet wrong_target = set;
  wrong_target.pairs[0].target = Target::kTceW;
  v = ValidateSet(wrong_target, c);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, ViolationKind::kTargetMismatch);
}

TEST_F(InterventionTest, FileRoundTripAndStaleDetection) {
  TempDir dir;
  const Corpus c = FixtureCorpus();
  const auto set = BuildInterventionSet(c, BuiltinSchema(Target::kDceSw), 12, 8);
  WriteInterventionSet(set, dir / "s.jsonl");
  EXPECT_EQ(ReadInterventionSet(dir / "s.jsonl", c), set);

  Corpus other = c;
  other.examples.pop_back();
  try {
    ReadInterventionSet(dir / "s.jsonl", other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kUnknownReference);
  }
}

TEST_F(InterventionTest, SerializedHeaderFields) {
  const Corpus c = FixtureCorpus();
  const auto set = BuildInterventionSet(c, BuiltinSchema(Target::kDceSc), 3, 1);
  const std::string text = SerializeInterventionSet(set);
  const auto header = nlohmann::json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(header.at("target"), "DCE_SC");
  EXPECT_EQ(header.at("seed_count"), 3);
  EXPECT_EQ(header.at("rng_seed"), 1);
  EXPECT_EQ(header.at("sampler"), kSamplerAlgorithm);
  EXPECT_EQ(header.at("corpus_digest"), CorpusDigest(c));
  EXPECT_EQ(header.at("n_pairs"), set.pairs.size());
}

}  // namespace
}  // namespace cnp
