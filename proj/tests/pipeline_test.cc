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

#include "cnp/pipeline.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "cnp/logging.h"
#include "cnp/prediction_source.h"
#include "stub_service.h"
#include "test_util.h"

namespace cnp {
namespace {

using testing::ReadText;
using testing::TempDir;

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override { previous_ = SetLogSink([](LogLevel, const std::string&) {}); }
  void TearDown() override { SetLogSink(previous_); }

  RunConfig Config(const std::filesystem::path& out) {
    RunConfig c;
    c.use_fixture = true;
    c.sources = {"synthetic:natural-logic-oracle", "synthetic:upward-bias",
                 "synthetic:negation-heuristic", "synthetic:seeded-random:4"};
    c.seed_count = 10;
    c.rng_seed = 3;
    c.bootstrap = 100;
    c.out_dir = out;
    return c;
  }

  std::string RunAll(const RunConfig& c) {
    std::ostringstream log;
    Pipeline(c, log).Run();
    return log.str();
  }

  TempDir dir_;
  LogSink previous_;
};

TEST(ConfigTest, SettingsParse) {
  RunConfig c;
  ApplyConfigSetting(c, "target", "tce-c, DCE_SW");
  EXPECT_EQ(c.targets, (std::vector<Target>{Target::kTceC, Target::kDceSw}));
  ApplyConfigSetting(c, "target", "all");
  EXPECT_EQ(c.targets.size(), 4u);
  ApplyConfigSetting(c, "seed_count", "25");
  EXPECT_EQ(c.seed_count, 25u);
  ApplyConfigSetting(c, "metric", "prob-shift");
  EXPECT_EQ(c.metric, EffectMetric::kProbShift);
  ApplyConfigSetting(c, "source", "synthetic:upward-bias,file:/tmp/x.jsonl");
  ApplyConfigSetting(c, "source", "synthetic:constant-entailment");
  EXPECT_EQ(c.sources.size(), 3u);
  ApplyConfigSetting(c, "force", "yes");
  EXPECT_TRUE(c.force);
  EXPECT_THROW(ApplyConfigSetting(c, "seed-count", "-1"), Error);
  EXPECT_THROW(ApplyConfigSetting(c, "target", "dce"), Error);
  EXPECT_THROW(ApplyConfigSetting(c, "colour", "blue"), Error);
  EXPECT_THROW(ApplyConfigSetting(c, "format", "html"), Error);
}

TEST(ConfigTest, ResolvedTextRoundTrips) {
  TempDir dir;
  RunConfig c;
  c.corpus_dir = "/data/corpus";
  c.targets = {Target::kDceSc};
  c.seed_count = 7;
  c.sampling = SeedSampling::kStratified;
  c.sources = {"synthetic:upward-bias", "service:http://h:1"};
  c.cache_dir = "/tmp/cache";
  c.format = ReportFormat::kJson;
  testing::WriteText(dir / "cfg", "# comment\n\n" + ResolvedConfigText(c));
  RunConfig back;
  ApplyConfigFile(back, dir / "cfg");
  EXPECT_EQ(ResolvedConfigText(back), ResolvedConfigText(c));
}

TEST(ConfigTest, FileErrorsCarryLineNumbers) {
  TempDir dir;
  testing::WriteText(dir / "cfg", "seed-count = 3\nbogus line\n");
  RunConfig c;
  try {
    ApplyConfigFile(c, dir / "cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
}

TEST(ConfigTest, Validation) {
  RunConfig c;
  EXPECT_THROW(ValidateConfig(c, false), Error);  // no corpus input
  EXPECT_NO_THROW(ValidateConfig(c, false, false));
  c.use_fixture = true;
  EXPECT_NO_THROW(ValidateConfig(c, false));
  EXPECT_THROW(ValidateConfig(c, true), Error);  // no sources
  c.sources = {"synthetic:nope"};
  EXPECT_THROW(ValidateConfig(c, true), Error);
  c.sources = {"synthetic:upward-bias"};
  EXPECT_NO_THROW(ValidateConfig(c, true));
  c.corpus_dir = "/x";
  EXPECT_THROW(ValidateConfig(c, true), Error);  // two inputs
}

TEST(ConfigTest, CacheDirPrecedence) {
  RunConfig c;
  c.out_dir = "/o";
  unsetenv("CNP_CACHE_DIR");
  EXPECT_EQ(EffectiveCacheDir(c), std::filesystem::path("/o/cache"));
  setenv("CNP_CACHE_DIR", "/env", 1);
  EXPECT_EQ(EffectiveCacheDir(c), std::filesystem::path("/env"));
  c.cache_dir = "/explicit";
  EXPECT_EQ(EffectiveCacheDir(c), std::filesystem::path("/explicit"));
  unsetenv("CNP_CACHE_DIR");
}

TEST_F(PipelineTest, RunWritesAllArtifacts) {
  const RunConfig c = Config(dir_ / "out");
  const std::string log = RunAll(c);
  const ArtifactPaths p = ArtifactsFor(c);
  for (Target t : kAllTargets) {
    EXPECT_TRUE(std::filesystem::exists(p.interventions_dir / (std::string(TargetSlug(t)) + ".jsonl")));
  }
  EXPECT_TRUE(std::filesystem::exists(p.estimates));
  EXPECT_TRUE(std::filesystem::exists(p.report));
  EXPECT_TRUE(std::filesystem::exists(p.resolved_config));
  EXPECT_NE(log.find("natural-logic-oracle TCE_C value=1.000"), std::string::npos) << log;
  EXPECT_NE(log.find("upward-bias TCE_C value=0.000"), std::string::npos);
  EXPECT_EQ(ReadProfiles(p.estimates).size(), 4u);
}

TEST_F(PipelineTest, IdenticalConfigsGiveIdenticalBytes) {
  const RunConfig a = Config(dir_ / "a");
  const RunConfig b = Config(dir_ / "b");
  RunAll(a);
  RunAll(b);
  const ArtifactPaths pa = ArtifactsFor(a), pb = ArtifactsFor(b);
  for (Target t : kAllTargets) {
    const std::string name = std::string(TargetSlug(t)) + ".jsonl";
    EXPECT_EQ(ReadText(pa.interventions_dir / name), ReadText(pb.interventions_dir / name));
  }
  EXPECT_EQ(ReadText(pa.estimates), ReadText(pb.estimates));
  EXPECT_EQ(ReadText(pa.report), ReadText(pb.report));
}

TEST_F(PipelineTest, SecondRunReusesEveryStage) {
  const RunConfig c = Config(dir_ / "out");
  RunAll(c);
  const std::string estimates = ReadText(ArtifactsFor(c).estimates);
  const std::string log = RunAll(c);
  EXPECT_NE(log.find("ingest: reusing"), std::string::npos) << log;
  EXPECT_NE(log.find("build-interventions: reusing"), std::string::npos);
  EXPECT_NE(log.find("predict: reusing"), std::string::npos);
  EXPECT_NE(log.find("estimate: reusing"), std::string::npos);
  EXPECT_NE(log.find("report: reusing"), std::string::npos);
  EXPECT_EQ(ReadText(ArtifactsFor(c).estimates), estimates);

  RunConfig forced = c;
  forced.force = true;
  const std::string forced_log = RunAll(forced);
  EXPECT_EQ(forced_log.find("reusing"), std::string::npos) << forced_log;
  EXPECT_EQ(ReadText(ArtifactsFor(c).estimates), estimates);
}

TEST_F(PipelineTest, ChangedSettingsInvalidateDownstream) {
  RunConfig c = Config(dir_ / "out");
  RunAll(c);
  const std::string before = ReadText(ArtifactsFor(c).interventions_dir / "tce-w.jsonl");
  c.rng_seed = 4;
  const std::string log = RunAll(c);
  EXPECT_EQ(log.find("build-interventions: reusing"), std::string::npos);
  EXPECT_EQ(log.find("estimate: reusing"), std::string::npos);
  EXPECT_NE(ReadText(ArtifactsFor(c).interventions_dir / "tce-w.jsonl"), before);

  c.format = ReportFormat::kTsv;
  const std::string tsv_log = RunAll(c);
  EXPECT_NE(tsv_log.find("estimate: reusing"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out" / "report.tsv"));
}

TEST_F(PipelineTest, StagesRunSeparately) {
  const RunConfig c = Config(dir_ / "out");
  std::ostringstream log;
  Pipeline p(c, log);
  EXPECT_THROW(p.BuildInterventions(), StageError);  // nothing ingested yet
  p.Ingest();
  EXPECT_EQ(p.BuildInterventions().size(), 4u);
  EXPECT_EQ(p.Predict().size(), 4u);
  EXPECT_EQ(p.Estimate().size(), 4u);
  EXPECT_NE(p.Report().find("natural-logic-oracle"), std::string::npos);
}

TEST_F(PipelineTest, MissingPredictionFileNamesStage) {
  RunConfig c = Config(dir_ / "out");
  c.sources = {"file:" + (dir_ / "absent.jsonl").string()};
  std::ostringstream log;
  try {
    Pipeline(c, log).Run();
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "predict");
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST_F(PipelineTest, DuplicateModelIdsRejected) {
  RunConfig c = Config(dir_ / "out");
  c.sources = {"synthetic:upward-bias", "synthetic:upward-bias"};
  std::ostringstream log;
  EXPECT_THROW(Pipeline(c, log).Run(), StageError);
}

TEST_F(PipelineTest, EmptyTargetSkippedWithPartialProfile) {
  // With every context upward no pair can change M, so TCE_C is empty.
  WriteCorpus(CorpusFromFactors({{"A", "a ___ .", Monotonicity::kUp}, {"B", "b ___ .", Monotonicity::kUp}},
                                {{"W1", "dog", "animal", Relation::kSubsumed},
                                 {"W2", "animal", "dog", Relation::kSubsumes}}),
              dir_ / "corpus");
  RunConfig c = Config(dir_ / "out");
  c.use_fixture = false;
  c.corpus_dir = dir_ / "corpus";
  RunAll(c);
  const auto profiles = ReadProfiles(ArtifactsFor(c).estimates);
  ASSERT_FALSE(profiles.empty());
  EXPECT_FALSE(profiles[0].estimates.count(Target::kTceC));
  EXPECT_TRUE(profiles[0].estimates.count(Target::kDceSc));
  EXPECT_FALSE(profiles[0].delta_context);
}

TEST_F(PipelineTest, ServiceRunEqualsFileRunOnDumpedPredictions) {
  const Corpus corpus = FixtureCorpus();
  testing::StubService stub(corpus.examples);
  testing::HttpStub server(&stub);
  WritePredictionFile(stub.Dump(corpus.examples), dir_ / "dump.jsonl");

  RunConfig service = Config(dir_ / "service");
  service.sources = {"service:" + server.url()};
  service.metric = EffectMetric::kProbShift;
  RunConfig file = Config(dir_ / "file");
  file.sources = {"file:" + (dir_ / "dump.jsonl").string()};
  file.metric = EffectMetric::kProbShift;
  RunAll(service);
  RunAll(file);
  EXPECT_EQ(ReadText(ArtifactsFor(service).estimates), ReadText(ArtifactsFor(file).estimates));
  EXPECT_EQ(ReadText(ArtifactsFor(service).report), ReadText(ArtifactsFor(file).report));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "service" / "cache"));

  // Regenerating a deleted report must not contact the service again.
  const int label_calls = stub.label_calls_, predict_calls = stub.predict_calls_;
  const std::string report = ReadText(ArtifactsFor(service).report);
  std::filesystem::remove(ArtifactsFor(service).report);
  RunAll(service);
  EXPECT_EQ(ReadText(ArtifactsFor(service).report), report);
  EXPECT_EQ(stub.label_calls_, label_calls);
  EXPECT_EQ(stub.predict_calls_, predict_calls);
}

TEST(SyntheticEvalTest, AllChecksPassOnFixtureAndRandomCorpora) {
  const auto previous = SetLogSink([](LogLevel, const std::string&) {});
  for (const auto& check : RunSyntheticEval(FixtureCorpus())) {
    EXPECT_TRUE(check.passed) << check.name << ": " << check.detail;
  }
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    for (const auto& check : RunSyntheticEval(testing::RandomCorpus(rng, 6, 6))) {
      EXPECT_TRUE(check.passed) << check.name << ": " << check.detail;
    }
  }
  SetLogSink(previous);
}

}  // namespace
}  // namespace cnp
