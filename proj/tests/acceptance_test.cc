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

// Acceptance suite: one PASS/FAIL line per criterion, each with its pinned
// tolerance and time budget. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cnp/corpus_io.h"
#include "cnp/effects.h"
#include "cnp/intervention.h"
#include "cnp/logging.h"
#include "cnp/natural_logic.h"
#include "cnp/pipeline.h"
#include "cnp/prediction_source.h"
#include "cnp/report.h"
#include "cnp/synthetic_models.h"
#include "reference_profiles.h"
#include "test_util.h"

namespace cnp {
namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;  // <= 0: no time limit
  std::function<Outcome()> check;
};

Outcome GoldLabelTable() {
  struct Cell {
    Monotonicity m;
    Relation r;
    GoldLabel want;
  };
  const Cell table[] = {
      {Monotonicity::kUp, Relation::kSubsumed, GoldLabel::kEntailment},
      {Monotonicity::kUp, Relation::kSubsumes, GoldLabel::kNonEntailment},
      {Monotonicity::kUp, Relation::kUnrelated, GoldLabel::kNonEntailment},
      {Monotonicity::kDown, Relation::kSubsumed, GoldLabel::kNonEntailment},
      {Monotonicity::kDown, Relation::kSubsumes, GoldLabel::kEntailment},
      {Monotonicity::kDown, Relation::kUnrelated, GoldLabel::kNonEntailment},
  };
  Outcome out;
  int cells = 0, entail = 0;
  for (Monotonicity m : kAllMonotonicities) {
    for (Relation r : kAllRelations) {
      ++cells;
      const GoldLabel got = GoldLabelFor(m, r);
      entail += got == GoldLabel::kEntailment;
      for (const Cell& c : table) {
        if (c.m == m && c.r == r && c.want != got) {
          out.ok = false;
          out.detail += "mismatch at (" + std::string(ToString(m)) + "," + std::string(ToString(r)) + ") ";
        }
      }
    }
  }
  out.ok = out.ok && cells == 6 && entail == 2;
  out.detail += std::to_string(cells) + " cells, " + std::to_string(entail) + " entailment";
  return out;
}

Outcome SchemaCompliance() {
  std::mt19937_64 rng(20240601);
  std::size_t pairs = 0, violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const Corpus corpus = testing::RandomCorpus(rng, 20, 20);
    for (Target t : kAllTargets) {
      const auto set = BuildInterventionSet(corpus, BuiltinSchema(t), kDefaultSeedCount, i);
      pairs += set.pairs.size();
      violations += ValidateSet(set, corpus).size();
    }
  }
  return {violations == 0, "1000 corpora, " + std::to_string(pairs) + " pairs, " +
                               std::to_string(violations) + " violations"};
}

struct FixtureSets {
  Corpus corpus = FixtureCorpus();
  std::map<Target, InterventionSet> sets;
  FixtureSets() {
    for (Target t : kAllTargets) {
      sets[t] = BuildInterventionSet(corpus, BuiltinSchema(t), corpus.examples.size(), 0);
    }
  }
};

Outcome OracleIdentities() {
  const FixtureSets f;
  auto value = [&](SyntheticKind kind, Target t) {
    const auto store = SyntheticPredictionSource({kind, 0}).Fetch(f.corpus.examples);
    return EstimateEffect(f.sets.at(t), store, {EffectMetric::kFlip}).value;
  };
  Outcome out;
  auto exact = [&](const char* what, double got, double want) {
    if (got != want) {
      out.ok = false;
      out.detail += std::string(what) + "=" + std::to_string(got) + " ";
    }
  };
  using K = SyntheticKind;
  exact("oracle TCE_C", value(K::kNaturalLogicOracle, Target::kTceC), 1.0);
  exact("oracle TCE_W", value(K::kNaturalLogicOracle, Target::kTceW), 1.0);
  exact("oracle DCE_SC", value(K::kNaturalLogicOracle, Target::kDceSc), 0.0);
  exact("oracle DCE_SW", value(K::kNaturalLogicOracle, Target::kDceSw), 0.0);
  for (Target t : kAllTargets) exact("constant", value(K::kConstantEntailment, t), 0.0);
  exact("upward TCE_C", value(K::kUpwardBias, Target::kTceC), 0.0);
  exact("upward DCE_SC", value(K::kUpwardBias, Target::kDceSc), 0.0);
  exact("upward DCE_SW", value(K::kUpwardBias, Target::kDceSw), 0.0);

  double flips = 0, n = 0;
  for (const auto& a : f.corpus.examples) {
    for (const auto& b : f.corpus.examples) {
      if (!testing::NaiveSatisfies(Target::kTceW, a, b)) continue;
      n += 1;
      flips += GoldLabelFor(Monotonicity::kUp, a.relation) != GoldLabelFor(Monotonicity::kUp, b.relation);
    }
  }
  const double got = value(K::kUpwardBias, Target::kTceW);
  if (std::fabs(got - flips / n) > 1e-12) {
    out.ok = false;
    out.detail += "upward TCE_W " + std::to_string(got) + " vs " + std::to_string(flips / n) + " ";
  }
  if (out.ok) {
    std::ostringstream ss;
    ss.precision(6);
    ss << "all exact; upward-bias TCE_W = " << got << " (brute force " << flips << "/" << n << ")";
    out.detail = ss.str();
  }
  return out;
}

Outcome BruteForceEquivalence() {
  const FixtureSets f;
  std::mt19937_64 rng(99);
  std::vector<PredictionStore> stores;
  stores.push_back(testing::RandomStore(f.corpus, rng));
  stores.push_back(testing::RandomStore(f.corpus, rng));
  for (SyntheticKind k : kAllSyntheticKinds) {
    stores.push_back(SyntheticPredictionSource({k, 1}).Fetch(f.corpus.examples));
  }
  double worst = 0;
  int comparisons = 0;
  for (const auto& store : stores) {
    for (Target t : kAllTargets) {
      for (EffectMetric m : {EffectMetric::kFlip, EffectMetric::kProbShift}) {
        const double want = testing::NaiveEstimate(f.corpus, t, store, m);
        for (std::size_t workers : {1u, 4u}) {
          const double got = EstimateEffect(f.sets.at(t), store, {m, Averaging::kPerPair, workers}).value;
          worst = std::max(worst, std::fabs(got - want));
          ++comparisons;
        }
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d comparisons, max |diff| = %.3g (tol 1e-12)", comparisons, worst);
  return {worst <= 1e-12, buf};
}

Outcome Determinism() {
  testing::TempDir dir;
  auto config = [&](const std::string& name) {
    RunConfig c;
    c.use_fixture = true;
    c.sources = {"synthetic:natural-logic-oracle", "synthetic:upward-bias",
                 "synthetic:negation-heuristic", "synthetic:seeded-random:11"};
    c.out_dir = dir / name;
    c.rng_seed = 5;
    return c;
  };
  const RunConfig a = config("run-a"), b = config("run-b");
  std::ostringstream log;
  Pipeline(a, log).Run();
  Pipeline(b, log).Run();
  const ArtifactPaths pa = ArtifactsFor(a), pb = ArtifactsFor(b);
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> files = {
      {pa.estimates, pb.estimates}, {pa.report, pb.report}};
  for (Target t : kAllTargets) {
    const std::string name = std::string(TargetSlug(t)) + ".jsonl";
    files.emplace_back(pa.interventions_dir / name, pb.interventions_dir / name);
  }
  Outcome out;
  for (const auto& [x, y] : files) {
    const std::string tx = testing::ReadText(x), ty = testing::ReadText(y);
    if (tx.empty() || tx != ty) {
      out.ok = false;
      out.detail += x.filename().string() + " differs ";
    }
  }
  if (out.ok) out.detail = std::to_string(files.size()) + " files byte-identical";
  return out;
}

Outcome ProfileArithmetic() {
  // Delta within 0.001 and ratio within 0.01 of the tabulated values; the
  // 1e-9 slack only absorbs binary rounding of 3-decimal inputs.
  constexpr double kDeltaTol = 0.001 + 1e-9;
  constexpr double kRatioTol = 0.01 + 1e-9;
  Outcome out;
  int checked = 0;
  double worst_delta = 0, worst_ratio = 0;
  for (const auto& r : testing::kReferenceRows) {
    const EffectProfile p = BuildProfile(r.model_id, testing::ReferenceEstimates(r));
    const struct {
      const char* what;
      double got, want, tol;
    } cols[] = {
        {"delta_context", *p.delta_context, r.delta_context, kDeltaTol},
        {"ratio_context", *p.ratio_context, r.ratio_context, kRatioTol},
        {"delta_word", *p.delta_word, r.delta_word, kDeltaTol},
        {"ratio_word", *p.ratio_word, r.ratio_word, kRatioTol},
    };
    for (const auto& c : cols) {
      ++checked;
      const double diff = std::fabs(c.got - c.want);
      (c.tol < 0.005 ? worst_delta : worst_ratio) =
          std::max(c.tol < 0.005 ? worst_delta : worst_ratio, diff);
      if (diff > c.tol) {
        out.ok = false;
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s %s: %.4f vs tabulated %.3f; ", r.model_id, c.what, c.got, c.want);
        out.detail += buf;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d values, max delta err %.4f (tol 0.001), max ratio err %.4f (tol 0.01)",
                checked, worst_delta, worst_ratio);
  out.detail += buf;
  return out;
}

Outcome Binning() {
  const auto profiles = testing::ReferenceProfiles();
  const auto sens = BinModels(profiles, Category::kContextSensitivity);
  const auto rob = BinModels(profiles, Category::kContextRobustness);
  std::string lowest_sens, highest_sens, min_dce_model;
  double min_dce = 1e9;
  for (const auto& r : testing::kReferenceRows) {
    if (r.tce_c == 0.081) lowest_sens = r.model_id;
    if (r.tce_c == 0.828) highest_sens = r.model_id;
    if (r.dce_sc < min_dce) {
      min_dce = r.dce_sc;
      min_dce_model = r.model_id;
    }
  }
  const bool ok = sens.at(lowest_sens).bin == QualitativeBin::kLowest &&
                  sens.at(highest_sens).bin == QualitativeBin::kHighest &&
                  rob.at(min_dce_model).bin == QualitativeBin::kHighest;
  return {ok, "Lowest sensitivity " + lowest_sens + ", Highest sensitivity " + highest_sens +
                  ", Highest robustness " + min_dce_model + " (" +
                  std::string(ToString(rob.at(min_dce_model).bin)) + ")"};
}

}  // namespace
}  // namespace cnp

int main() {
  using namespace cnp;
  SetLogSink([](LogLevel, const std::string&) {});
  const std::vector<Criterion> criteria = {
      {"gold-label table", 0.001, GoldLabelTable},
      {"schema compliance", 60, SchemaCompliance},
      {"oracle identities", 5, OracleIdentities},
      {"brute-force equivalence", 5, BruteForceEquivalence},
      {"determinism", 10, Determinism},
      {"profile arithmetic", 0, ProfileArithmetic},
      {"binning extremes", 0, Binning},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_seconds <= 0 || secs < c.budget_seconds;
    const bool pass = o.ok && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %s: %s; %.3f s", pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs);
    if (c.budget_seconds > 0) std::printf(" (limit %g s)", c.budget_seconds);
    std::printf("\n");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
