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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "cnp/digest.h"
#include "cnp/logging.h"
#include "cnp/prediction_source.h"
#include "cnp/rng.h"
#include "cnp/synthetic_models.h"

namespace cnp {
namespace {

namespace fs = std::filesystem;

std::string Trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitCommas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    std::string item = Trim(s.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void BadSetting(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(ErrorCode::kInvalidArgument, "config " + std::string(key) + " = \"" +
                                               std::string(value) + "\": " + std::string(why));
}

std::uint64_t ParseUnsigned(std::string_view key, std::string_view value) {
  const std::string v = Trim(value);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    BadSetting(key, value, "expected a non-negative integer");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    BadSetting(key, value, "integer out of range");
  }
}

bool ParseBool(std::string_view key, std::string_view value) {
  const std::string v = Trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  BadSetting(key, value, "expected true or false");
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<std::string> ReadKey(const fs::path& artifact) {
  fs::path key = artifact;
  key += ".key";
  if (!fs::exists(key) || !fs::exists(artifact)) return std::nullopt;
  return ReadFile(key);
}

void WriteKey(const fs::path& artifact, const std::string& key) {
  fs::path p = artifact;
  p += ".key";
  WriteFileAtomic(p, key);
}

std::string Format3(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(3) << v;
  return ss.str();
}

template <typename Fn>
auto InStage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const fs::filesystem_error& e) {
    throw StageError(stage, Error(ErrorCode::kIoError, e.what()));
  }
}

std::string ReportExtension(ReportFormat f) {
  return f == ReportFormat::kMarkdown ? "md" : std::string(ToString(f));
}

}  // namespace

void ApplyConfigSetting(RunConfig& c, std::string_view raw_key, std::string_view raw_value) {
  std::string key = Trim(raw_key);
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string value = Trim(raw_value);
  if (key == "corpus-dir") {
    c.corpus_dir = value;
  } else if (key == "import") {
    c.import_path = value;
  } else if (key == "import-cross-product") {
    c.import_cross_product = ParseBool(key, value);
  } else if (key == "fixture") {
    c.use_fixture = ParseBool(key, value);
  } else if (key == "target") {
    c.targets.clear();
    for (const auto& item : SplitCommas(value)) {
      if (item == "all") {
        c.targets.assign(kAllTargets.begin(), kAllTargets.end());
        continue;
      }
      const auto t = ParseTarget(item);
      if (!t) BadSetting(key, value, "targets are dce-sc, tce-c, dce-sw, tce-w or all");
      if (std::find(c.targets.begin(), c.targets.end(), *t) == c.targets.end()) {
        c.targets.push_back(*t);
      }
    }
    std::sort(c.targets.begin(), c.targets.end());
    if (c.targets.empty()) BadSetting(key, value, "no targets");
  } else if (key == "seed-count") {
    c.seed_count = ParseUnsigned(key, value);
  } else if (key == "rng-seed") {
    c.rng_seed = ParseUnsigned(key, value);
  } else if (key == "sampling") {
    const auto s = ParseSeedSampling(value);
    if (!s) BadSetting(key, value, "expected uniform or stratified");
    c.sampling = *s;
  } else if (key == "metric") {
    const auto m = ParseEffectMetric(value);
    if (!m) BadSetting(key, value, "expected flip or prob-shift");
    c.metric = *m;
  } else if (key == "averaging") {
    const auto a = ParseAveraging(value);
    if (!a) BadSetting(key, value, "expected per-pair or per-seed");
    c.averaging = *a;
  } else if (key == "bootstrap") {
    c.bootstrap = ParseUnsigned(key, value);
  } else if (key == "source") {
    for (auto& s : SplitCommas(value)) c.sources.push_back(std::move(s));
  } else if (key == "scheme") {
    c.scheme = value;
  } else if (key == "batch-size") {
    c.batch_size = ParseUnsigned(key, value);
  } else if (key == "max-in-flight") {
    c.max_in_flight = ParseUnsigned(key, value);
  } else if (key == "cache-dir") {
    c.cache_dir = value;
  } else if (key == "benchmarks") {
    c.benchmarks = value;
  } else if (key == "format") {
    const auto f = ParseReportFormat(value);
    if (!f) BadSetting(key, value, "expected tsv, md or json");
    c.format = *f;
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "force") {
    c.force = ParseBool(key, value);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown config key \"" + key + "\"");
  }
}

void ApplyConfigFile(RunConfig& config, const fs::path& path) {
  const auto lines = ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (Trim(line).empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ":" + std::to_string(i + 1) + ": expected key = value");
    }
    try {
      ApplyConfigSetting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

void ValidateConfig(const RunConfig& c, bool needs_sources, bool needs_corpus) {
  const int inputs = (c.corpus_dir ? 1 : 0) + (c.import_path ? 1 : 0) + (c.use_fixture ? 1 : 0);
  if (inputs > 1 || (needs_corpus && inputs != 1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "choose exactly one corpus input: corpus-dir, import or fixture");
  }
  if (c.seed_count < 1) throw Error(ErrorCode::kInvalidArgument, "seed-count must be >= 1");
  if (c.batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch-size must be >= 1");
  if (c.max_in_flight < 1) throw Error(ErrorCode::kInvalidArgument, "max-in-flight must be >= 1");
  if (c.targets.empty()) throw Error(ErrorCode::kInvalidArgument, "no targets selected");
  if (c.out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "out must not be empty");
  if (needs_sources && c.sources.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one prediction source is required");
  }
  for (const auto& s : c.sources) {
    const bool ok = s.rfind("file:", 0) == 0 || s.rfind("synthetic:", 0) == 0 ||
                    s.rfind("service:http://", 0) == 0 || s.rfind("http://", 0) == 0;
    if (!ok) {
      throw Error(ErrorCode::kInvalidArgument,
                  "source \"" + s + "\" must be file:<path>, synthetic:<name> or service:http://...");
    }
    if (s.rfind("synthetic:", 0) == 0 && !ParseSyntheticModel(s.substr(10))) {
      throw Error(ErrorCode::kInvalidArgument, "unknown synthetic model in \"" + s + "\"");
    }
  }
}

std::string ResolvedConfigText(const RunConfig& c) {
  std::ostringstream out;
  if (c.corpus_dir) out << "corpus-dir = " << c.corpus_dir->string() << "\n";
  if (c.import_path) {
    out << "import = " << c.import_path->string() << "\n";
    out << "import-cross-product = " << (c.import_cross_product ? "true" : "false") << "\n";
  }
  if (c.use_fixture) out << "fixture = true\n";
  out << "target = ";
  for (std::size_t i = 0; i < c.targets.size(); ++i) {
    out << (i ? "," : "") << TargetSlug(c.targets[i]);
  }
  out << "\n";
  out << "seed-count = " << c.seed_count << "\n";
  out << "rng-seed = " << c.rng_seed << "\n";
  out << "sampling = " << ToString(c.sampling) << "\n";
  out << "metric = " << ToString(c.metric) << "\n";
  out << "averaging = " << ToString(c.averaging) << "\n";
  out << "bootstrap = " << c.bootstrap << "\n";
  for (const auto& s : c.sources) out << "source = " << s << "\n";
  out << "scheme = " << c.scheme << "\n";
  out << "batch-size = " << c.batch_size << "\n";
  out << "max-in-flight = " << c.max_in_flight << "\n";
  if (c.cache_dir) out << "cache-dir = " << c.cache_dir->string() << "\n";
  if (c.benchmarks) out << "benchmarks = " << c.benchmarks->string() << "\n";
  out << "format = " << ToString(c.format) << "\n";
  out << "out = " << c.out_dir.string() << "\n";
  return out.str();
}

fs::path EffectiveCacheDir(const RunConfig& c) {
  if (c.cache_dir) return *c.cache_dir;
  if (const char* env = std::getenv("CNP_CACHE_DIR"); env && *env) return env;
  return c.out_dir / "cache";
}

ArtifactPaths ArtifactsFor(const RunConfig& c) {
  ArtifactPaths p;
  p.corpus_dir = c.out_dir / "corpus";
  p.interventions_dir = c.out_dir / "interventions";
  p.predictions_dir = c.out_dir / "predictions";
  p.estimates = c.out_dir / "estimates.json";
  p.report = c.out_dir / ("report." + ReportExtension(c.format));
  p.resolved_config = c.out_dir / "resolved_config.txt";
  return p;
}

Pipeline::Pipeline(RunConfig config, std::ostream& log)
    : config_(std::move(config)), paths_(ArtifactsFor(config_)), log_(log) {}

void Pipeline::WriteResolvedConfig() { WriteFileAtomic(paths_.resolved_config, ResolvedConfigText(config_)); }

Corpus Pipeline::Ingest() {
  return InStage("ingest", [&] {
    WriteResolvedConfig();
    Corpus corpus;
    if (config_.use_fixture) {
      corpus = FixtureCorpus();
    } else if (config_.corpus_dir) {
      corpus = LoadCorpusDir(*config_.corpus_dir).corpus;
    } else if (config_.import_path) {
      corpus = ImportCorpus(*config_.import_path, ImportOptions{config_.import_cross_product}).corpus;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "no corpus input configured");
    }
    ValidateCorpus(corpus);
    bool unchanged = false;
    if (!config_.force && fs::exists(paths_.corpus_dir / "examples.jsonl")) {
      try {
        unchanged = LoadCorpusDir(paths_.corpus_dir).corpus == corpus;
      } catch (const Error&) {
        unchanged = false;
      }
    }
    if (unchanged) {
      log_ << "ingest: reusing " << paths_.corpus_dir.string() << "\n";
    } else {
      WriteCorpus(corpus, paths_.corpus_dir);
      log_ << "ingest: " << corpus.contexts.size() << " contexts, " << corpus.word_pairs.size()
           << " word pairs, " << corpus.examples.size() << " examples -> "
           << paths_.corpus_dir.string() << "\n";
    }
    return corpus;
  });
}

Corpus Pipeline::LoadIngested() {
  if (!fs::exists(paths_.corpus_dir / "examples.jsonl")) {
    throw Error(ErrorCode::kIoError,
                "no ingested corpus under " + paths_.corpus_dir.string() + "; run ingest first");
  }
  return LoadCorpusDir(paths_.corpus_dir).corpus;
}

std::map<Target, InterventionSet> Pipeline::BuildInterventions() {
  return InStage("build-interventions", [&] {
    WriteResolvedConfig();
    const Corpus corpus = LoadIngested();
    std::map<Target, InterventionSet> sets;
    for (Target t : config_.targets) {
      const fs::path path = paths_.interventions_dir / (std::string(TargetSlug(t)) + ".jsonl");
      if (!config_.force && fs::exists(path)) {
        try {
          InterventionSet existing = ReadInterventionSet(path, corpus);
          if (existing.target == t && existing.seed_count == config_.seed_count &&
              existing.rng_seed == config_.rng_seed && existing.sampling == config_.sampling) {
            log_ << "build-interventions: reusing " << path.string() << "\n";
            sets.emplace(t, std::move(existing));
            continue;
          }
        } catch (const Error& e) {
          LogWarning("rebuilding stale " + path.string() + ": " + e.what());
        }
      }
      InterventionSet set = BuildInterventionSet(corpus, BuiltinSchema(t), config_.seed_count,
                                                 config_.rng_seed, BuildOptions{config_.sampling, 0});
      WriteInterventionSet(set, path);
      log_ << "build-interventions: " << ToString(t) << " " << set.pairs.size() << " pairs from "
           << set.seeds_drawn << " seeds -> " << path.string() << "\n";
      sets.emplace(t, std::move(set));
    }
    return sets;
  });
}

std::vector<PredictionStore> Pipeline::Predict() {
  return InStage("predict", [&] {
    WriteResolvedConfig();
    const Corpus corpus = LoadIngested();
    SourceDefaults defaults;
    defaults.scheme_spec = config_.scheme;
    defaults.cache_dir = EffectiveCacheDir(config_);
    defaults.batch_size = config_.batch_size;
    defaults.max_in_flight = config_.max_in_flight;
    std::vector<PredictionStore> stores;
    std::set<std::string> model_ids;
    for (const auto& spec : config_.sources) {
      const fs::path path = paths_.predictions_dir / (CacheSlug(spec) + ".jsonl");
      std::optional<PredictionStore> store;
      if (!config_.force && fs::exists(path)) {
        try {
          FilePredictionSource saved(path, config_.scheme);
          store = saved.Fetch(corpus.examples);
          log_ << "predict: reusing " << path.string() << "\n";
        } catch (const Error& e) {
          LogWarning("refetching " + spec + ": " + e.what());
        }
      }
      if (!store) {
        auto source = MakeSource(spec, defaults);
        store = FetchPredictions(*source, corpus.examples);
        WritePredictionFile(ToPredictionFile(*store), path);
        log_ << "predict: " << store->records.size() << " predictions from " << source->Describe()
             << " -> " << path.string() << "\n";
      }
      if (!model_ids.insert(store->model_id).second) {
        throw Error(ErrorCode::kDuplicateId, "two sources report model_id " + store->model_id);
      }
      stores.push_back(std::move(*store));
    }
    return stores;
  });
}

std::vector<EffectProfile> Pipeline::Estimate() {
  const auto sets = BuildInterventions();
  const auto stores = Predict();
  return InStage("estimate", [&] {
    std::string key_material = "metric=" + std::string(ToString(config_.metric)) +
                               " averaging=" + std::string(ToString(config_.averaging)) +
                               " bootstrap=" + std::to_string(config_.bootstrap) +
                               " rng-seed=" + std::to_string(config_.rng_seed) + "\n";
    for (const auto& [t, set] : sets) key_material += SerializeInterventionSet(set);
    for (const auto& store : stores) key_material += SerializePredictionFile(ToPredictionFile(store));
    const std::string key = Sha256Hex(key_material);
    if (!config_.force && ReadKey(paths_.estimates) == key) {
      log_ << "estimate: reusing " << paths_.estimates.string() << "\n";
      return ReadProfiles(paths_.estimates);
    }
    const EstimateOptions options{config_.metric, config_.averaging, 0};
    std::vector<EffectProfile> profiles;
    for (const auto& store : stores) {
      std::vector<EffectEstimate> estimates;
      for (const auto& [t, set] : sets) {
        if (set.pairs.empty()) {
          LogWarning(std::string(ToString(t)) + " has no intervention pairs; skipping estimate");
          continue;
        }
        const std::uint64_t boot_seed =
            SplitMix64(config_.rng_seed ^ SplitMix64(static_cast<std::uint64_t>(t) + 101));
        estimates.push_back(EstimateWithCi(set, store, options, config_.bootstrap, boot_seed));
      }
      if (estimates.empty()) {
        throw Error(ErrorCode::kEmptySet, "no non-empty intervention set to estimate");
      }
      profiles.push_back(BuildProfile(store.model_id, estimates, /*allow_partial=*/true));
    }
    std::sort(profiles.begin(), profiles.end(),
              [](const EffectProfile& a, const EffectProfile& b) { return a.model_id < b.model_id; });
    WriteProfiles(profiles, paths_.estimates);
    WriteKey(paths_.estimates, key);
    log_ << "estimate: " << profiles.size() << " profiles -> " << paths_.estimates.string() << "\n";
    return profiles;
  });
}

std::string Pipeline::Report() {
  return InStage("report", [&] {
    WriteResolvedConfig();
    if (!fs::exists(paths_.estimates)) {
      throw Error(ErrorCode::kIoError,
                  "no estimates at " + paths_.estimates.string() + "; run estimate first");
    }
    const std::string estimates_text = ReadFile(paths_.estimates);
    std::string key_material = estimates_text + "format=" + std::string(ToString(config_.format));
    std::optional<std::map<std::string, BenchmarkScores>> bench;
    if (config_.benchmarks) {
      bench = LoadBenchmarkScores(*config_.benchmarks);
      key_material += ReadFile(*config_.benchmarks);
    }
    const std::string key = Sha256Hex(key_material);
    if (!config_.force && ReadKey(paths_.report) == key) {
      log_ << "report: reusing " << paths_.report.string() << "\n";
      return ReadFile(paths_.report);
    }
    const auto profiles = ParseProfiles(estimates_text);
    const std::string text = RenderReport(profiles, bench ? &*bench : nullptr, config_.format);
    WriteFileAtomic(paths_.report, text);
    WriteKey(paths_.report, key);
    log_ << "report: -> " << paths_.report.string() << "\n";
    return text;
  });
}

void Pipeline::Run() {
  Ingest();
  const auto profiles = Estimate();
  Report();
  for (const auto& p : profiles) {
    for (const auto& [t, e] : p.estimates) {
      log_ << p.model_id << " " << ToString(t) << " value=" << Format3(e.value) << " n=" << e.n_pairs;
      if (e.ci_low && e.ci_high) {
        log_ << " ci=[" << Format3(*e.ci_low) << ", " << Format3(*e.ci_high) << "]";
      }
      log_ << "\n";
    }
  }
}

std::vector<SyntheticCheck> RunSyntheticEval(const Corpus& corpus) {
  std::vector<SyntheticCheck> checks;
  std::map<Target, InterventionSet> sets;
  for (Target t : kAllTargets) {
    sets.emplace(t, BuildInterventionSet(corpus, BuiltinSchema(t), corpus.examples.size(), 0));
  }
  const EstimateOptions options{EffectMetric::kFlip, Averaging::kPerPair, 0};

  auto estimate = [&](const SyntheticModel& model, Target t) -> std::optional<double> {
    const InterventionSet& set = sets.at(t);
    if (set.pairs.empty()) return std::nullopt;
    SyntheticPredictionSource source(model);
    const PredictionStore store = source.Fetch(corpus.examples);
    return EstimateEffect(set, store, options).value;
  };
  auto expect = [&](const SyntheticModel& model, Target t, double want) {
    SyntheticCheck c;
    c.name = SyntheticModelId(model) + " " + std::string(ToString(t)) + " = " + Format3(want);
    const auto got = estimate(model, t);
    if (!got) {
      c.passed = true;
      c.detail = "empty set, skipped";
    } else {
      c.passed = *got == want;
      c.detail = "got " + std::to_string(*got);
    }
    checks.push_back(std::move(c));
  };

  const SyntheticModel oracle{SyntheticKind::kNaturalLogicOracle, 0};
  const SyntheticModel upward{SyntheticKind::kUpwardBias, 0};
  const SyntheticModel constant{SyntheticKind::kConstantEntailment, 0};
  const SyntheticModel negation{SyntheticKind::kNegationHeuristic, 0};
  const SyntheticModel random{SyntheticKind::kSeededRandom, 1};

  expect(oracle, Target::kTceC, 1.0);
  expect(oracle, Target::kTceW, 1.0);
  expect(oracle, Target::kDceSc, 0.0);
  expect(oracle, Target::kDceSw, 0.0);
  for (Target t : kAllTargets) expect(constant, t, 0.0);
  expect(upward, Target::kTceC, 0.0);
  expect(upward, Target::kDceSc, 0.0);
  expect(upward, Target::kDceSw, 0.0);

  // Brute force over every ordered example pair, independent of the sets.
  auto brute = [&](Target t, auto&& label_of) -> std::optional<double> {
    const InterventionSchema& schema = BuiltinSchema(t);
    std::map<std::string, std::pair<double, double>> by_stratum;  // flips, count
    double total = 0;
    for (const auto& a : corpus.examples) {
      for (const auto& b : corpus.examples) {
        if (!PairSatisfies(schema, a, b)) continue;
        const std::string s = t == Target::kDceSc   ? std::string(ToString(a.monotonicity))
                              : t == Target::kDceSw ? std::string(ToString(a.relation))
                                                    : "all";
        by_stratum[s].first += label_of(a) != label_of(b) ? 1.0 : 0.0;
        by_stratum[s].second += 1.0;
        total += 1.0;
      }
    }
    if (total == 0) return std::nullopt;
    double value = 0;
    for (const auto& [s, fc] : by_stratum) value += (fc.second / total) * (fc.first / fc.second);
    return value;
  };
  auto expect_brute = [&](const SyntheticModel& model, Target t, auto&& label_of) {
    SyntheticCheck c;
    c.name = SyntheticModelId(model) + " " + std::string(ToString(t)) + " = brute-force rate";
    const auto want = brute(t, label_of);
    const auto got = estimate(model, t);
    if (!want || !got) {
      c.passed = !want && !got;
      c.detail = "empty set";
    } else {
      c.passed = std::fabs(*got - *want) <= 1e-12;
      c.detail = "got " + std::to_string(*got) + ", want " + std::to_string(*want);
    }
    checks.push_back(std::move(c));
  };
  expect_brute(upward, Target::kTceW,
               [](const NLIExample& e) { return GoldLabelFor(Monotonicity::kUp, e.relation); });
  expect_brute(negation, Target::kDceSc,
               [](const NLIExample& e) { return HasNegationToken(e.premise); });

  for (Target t : kAllTargets) {
    SyntheticCheck c;
    c.name = SyntheticModelId(random) + " " + std::string(ToString(t)) + " deterministic and in [0, 1]";
    const auto first = estimate(random, t);
    const auto second = estimate(random, t);
    c.passed = first == second && (!first || (*first >= 0.0 && *first <= 1.0));
    c.detail = first ? "got " + std::to_string(*first) : "empty set";
    checks.push_back(std::move(c));
  }
  return checks;
}

}  // namespace cnp
