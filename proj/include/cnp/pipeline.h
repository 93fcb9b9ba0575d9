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

#ifndef CNP_PIPELINE_H_
#define CNP_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cnp/corpus_io.h"
#include "cnp/effects.h"
#include "cnp/error.h"
#include "cnp/intervention.h"
#include "cnp/prediction.h"
#include "cnp/report.h"

namespace cnp {

struct RunConfig {
  // Corpus input: exactly one of corpus_dir, import_path or use_fixture.
  std::optional<std::filesystem::path> corpus_dir;
  std::optional<std::filesystem::path> import_path;
  bool import_cross_product = false;
  bool use_fixture = false;

  std::vector<Target> targets{kAllTargets.begin(), kAllTargets.end()};
  std::size_t seed_count = kDefaultSeedCount;
  std::uint64_t rng_seed = 0;
  SeedSampling sampling = SeedSampling::kUniform;

  EffectMetric metric = EffectMetric::kFlip;
  Averaging averaging = Averaging::kPerPair;
  std::size_t bootstrap = 1000;  // 0 disables confidence intervals

  std::vector<std::string> sources;  // file:..., synthetic:..., service:...
  std::string scheme = "auto";
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;

  std::optional<std::filesystem::path> benchmarks;
  ReportFormat format = ReportFormat::kMarkdown;
  std::filesystem::path out_dir = "cnp-out";
  bool force = false;
};

// Applies one "key = value" setting. Keys are the long flag names
// (corpus-dir, import, import-cross-product, fixture, target, seed-count,
// rng-seed, sampling, metric, averaging, bootstrap, source, scheme,
// batch-size, max-in-flight, cache-dir, benchmarks, format, out, force);
// underscores are accepted in place of dashes. "source" may repeat and also
// accepts a comma-separated list. Throws kInvalidArgument.
void ApplyConfigSetting(RunConfig& config, std::string_view key, std::string_view value);

// Reads "key = value" lines; '#' starts a comment, blank lines are ignored.
void ApplyConfigFile(RunConfig& config, const std::filesystem::path& path);

// Throws kInvalidArgument for unusable settings. Without `needs_corpus`
// the corpus input may be left unset.
void ValidateConfig(const RunConfig& config, bool needs_sources, bool needs_corpus = true);

// Canonical "key = value" rendering, parseable by ApplyConfigFile.
std::string ResolvedConfigText(const RunConfig& config);

// Explicit setting, else $CNP_CACHE_DIR, else <out>/cache.
std::filesystem::path EffectiveCacheDir(const RunConfig& config);

// Error raised by a stage, tagged with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ArtifactPaths {
  std::filesystem::path corpus_dir;
  std::filesystem::path interventions_dir;
  std::filesystem::path predictions_dir;
  std::filesystem::path estimates;
  std::filesystem::path report;
  std::filesystem::path resolved_config;
};

ArtifactPaths ArtifactsFor(const RunConfig& config);

// Each stage reads its inputs from the previous stage's artifacts under
// config.out_dir and reuses its own artifact when it is present and still
// matches its inputs, unless config.force is set. Progress goes to `log`.
class Pipeline {
 public:
  Pipeline(RunConfig config, std::ostream& log);

  Corpus Ingest();
  std::map<Target, InterventionSet> BuildInterventions();
  std::vector<PredictionStore> Predict();
  std::vector<EffectProfile> Estimate();
  std::string Report();

  // All stages in order; prints one summary line per (model, target).
  void Run();

  const RunConfig& config() const { return config_; }
  const ArtifactPaths& paths() const { return paths_; }

 private:
  Corpus LoadIngested();
  void WriteResolvedConfig();

  RunConfig config_;
  ArtifactPaths paths_;
  std::ostream& log_;
};

struct SyntheticCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Builds exhaustive intervention sets over `corpus` (every example a seed)
// and checks the synthetic models' analytic identities under the flip
// metric.
std::vector<SyntheticCheck> RunSyntheticEval(const Corpus& corpus);

}  // namespace cnp

#endif  // CNP_PIPELINE_H_
