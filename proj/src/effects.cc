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

#include "cnp/effects.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <utility>

#include "cnp/corpus_io.h"
#include "cnp/error.h"
#include "cnp/logging.h"
#include "cnp/parallel.h"
#include "cnp/rng.h"

namespace cnp {
namespace {

using ordered_json = nlohmann::ordered_json;

// Pair effects with their grouping keys. Stratum and seed keys are dense
// indices so resampling never touches strings.
struct EffectTable {
  std::vector<double> effects;
  std::vector<std::size_t> stratum;  // index into stratum_names; 0 for totals
  std::vector<std::size_t> seed;     // dense id of before.example_id
  std::vector<std::string> stratum_names;
  std::size_t n_seeds = 0;
};

std::string StratumOf(Target target, const InterventionPair& p) {
  if (target == Target::kDceSc) return std::string(ToString(p.before.monotonicity));
  return std::string(ToString(p.before.relation));
}

std::vector<std::string> PossibleStrata(Target target) {
  std::vector<std::string> out;
  if (target == Target::kDceSc) {
    for (Monotonicity m : kAllMonotonicities) out.emplace_back(ToString(m));
  } else if (target == Target::kDceSw) {
    for (Relation r : kAllRelations) out.emplace_back(ToString(r));
  } else {
    out.emplace_back("all");
  }
  return out;
}

EffectTable BuildTable(const InterventionSet& set, const PredictionStore& store,
                       const EstimateOptions& options) {
  EffectTable t;
  t.effects = PairEffects(set, store, options);
  t.stratum_names = PossibleStrata(set.target);
  std::unordered_map<std::string, std::size_t> seed_ids;
  t.stratum.reserve(set.pairs.size());
  t.seed.reserve(set.pairs.size());
  for (const auto& p : set.pairs) {
    std::size_t s = 0;
    if (!IsTotalEffect(set.target)) {
      const std::string name = StratumOf(set.target, p);
      s = static_cast<std::size_t>(
          std::find(t.stratum_names.begin(), t.stratum_names.end(), name) -
          t.stratum_names.begin());
    }
    t.stratum.push_back(s);
    auto [it, inserted] = seed_ids.emplace(p.before.example_id, seed_ids.size());
    t.seed.push_back(it->second);
  }
  t.n_seeds = seed_ids.size();
  return t;
}

// Mean over `rows` (indices into the table), per pair or per seed. Sums run in
// row order, so the result depends only on the multiset order passed in.
double GroupMean(const EffectTable& t, std::span<const std::size_t> rows, Averaging averaging) {
  if (rows.empty()) return 0.0;
  if (averaging == Averaging::kPerPair) {
    double sum = 0;
    for (std::size_t r : rows) sum += t.effects[r];
    return sum / static_cast<double>(rows.size());
  }
  std::vector<double> sums(t.n_seeds, 0.0);
  std::vector<std::size_t> counts(t.n_seeds, 0);
  for (std::size_t r : rows) {
    sums[t.seed[r]] += t.effects[r];
    ++counts[t.seed[r]];
  }
  double total = 0;
  std::size_t groups = 0;
  for (std::size_t s = 0; s < t.n_seeds; ++s) {
    if (counts[s] == 0) continue;
    total += sums[s] / static_cast<double>(counts[s]);
    ++groups;
  }
  return total / static_cast<double>(groups);
}

struct Aggregate {
  double value = 0;
  std::vector<StratumEstimate> strata;
};

// rows_by_stratum[s] lists the rows of stratum s.
Aggregate AggregateStrata(const EffectTable& t,
                          const std::vector<std::vector<std::size_t>>& rows_by_stratum,
                          Averaging averaging) {
  std::size_t total = 0;
  for (const auto& rows : rows_by_stratum) total += rows.size();
  Aggregate out;
  for (std::size_t s = 0; s < rows_by_stratum.size(); ++s) {
    const auto& rows = rows_by_stratum[s];
    if (rows.empty()) continue;
    StratumEstimate est;
    est.stratum = t.stratum_names[s];
    est.n = rows.size();
    est.weight = static_cast<double>(rows.size()) / static_cast<double>(total);
    est.mean_effect = GroupMean(t, rows, averaging);
    out.value += est.weight * est.mean_effect;
    out.strata.push_back(std::move(est));
  }
  return out;
}

std::vector<std::vector<std::size_t>> RowsByStratum(const EffectTable& t) {
  std::vector<std::vector<std::size_t>> rows(t.stratum_names.size());
  for (std::size_t i = 0; i < t.effects.size(); ++i) rows[t.stratum[i]].push_back(i);
  return rows;
}

void RequireNonEmpty(const InterventionSet& set) {
  if (set.pairs.empty()) {
    throw Error(ErrorCode::kEmptySet,
                std::string(ToString(set.target)) + " intervention set has no pairs");
  }
}

EffectEstimate BaseEstimate(const InterventionSet& set, const PredictionStore& store,
                            const EstimateOptions& options) {
  EffectEstimate e;
  e.model_id = store.model_id;
  e.target = set.target;
  e.metric = options.metric;
  e.averaging = options.averaging;
  e.n_pairs = set.pairs.size();
  return e;
}

double Clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double Percentile(std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::optional<double> Ratio(const EffectEstimate* tce, const EffectEstimate* dce) {
  if (!tce || !dce || dce->value == 0.0) return std::nullopt;
  return tce->value / dce->value;
}

std::optional<double> Delta(const EffectEstimate* tce, const EffectEstimate* dce) {
  if (!tce || !dce) return std::nullopt;
  return tce->value - dce->value;
}

template <typename T>
ordered_json Optional(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> GetOptional(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

ordered_json EstimateToJson(const EffectEstimate& e) {
  ordered_json j;
  j["model_id"] = e.model_id;
  j["target"] = ToString(e.target);
  j["metric"] = ToString(e.metric);
  j["averaging"] = ToString(e.averaging);
  j["value"] = e.value;
  j["n_pairs"] = e.n_pairs;
  j["stratified_by"] = Optional(e.stratified_by);
  ordered_json strata = ordered_json::array();
  for (const auto& s : e.strata) {
    ordered_json js;
    js["stratum"] = s.stratum;
    js["weight"] = s.weight;
    js["mean_effect"] = s.mean_effect;
    js["n"] = s.n;
    strata.push_back(std::move(js));
  }
  j["strata"] = std::move(strata);
  j["ci_low"] = Optional(e.ci_low);
  j["ci_high"] = Optional(e.ci_high);
  j["bootstrap_replicates"] = e.bootstrap_replicates;
  return j;
}

EffectEstimate EstimateFromJson(const nlohmann::json& j) {
  EffectEstimate e;
  e.model_id = j.at("model_id").get<std::string>();
  const auto target = ParseTarget(j.at("target").get<std::string>());
  const auto metric = ParseEffectMetric(j.at("metric").get<std::string>());
  const auto averaging = ParseAveraging(j.value("averaging", std::string("per-pair")));
  if (!target || !metric || !averaging) {
    throw Error(ErrorCode::kParseError, "bad target, metric or averaging in estimate");
  }
  e.target = *target;
  e.metric = *metric;
  e.averaging = *averaging;
  e.value = j.at("value").get<double>();
  e.n_pairs = j.at("n_pairs").get<std::size_t>();
  e.stratified_by = GetOptional<std::string>(j, "stratified_by");
  for (const auto& js : j.value("strata", nlohmann::json::array())) {
    e.strata.push_back(StratumEstimate{js.at("stratum").get<std::string>(),
                                       js.at("weight").get<double>(),
                                       js.at("mean_effect").get<double>(),
                                       js.at("n").get<std::size_t>()});
  }
  e.ci_low = GetOptional<double>(j, "ci_low");
  e.ci_high = GetOptional<double>(j, "ci_high");
  e.bootstrap_replicates = j.value("bootstrap_replicates", std::size_t{0});
  return e;
}

}  // namespace

std::string_view ToString(EffectMetric m) {
  return m == EffectMetric::kFlip ? "flip" : "prob-shift";
}

std::optional<EffectMetric> ParseEffectMetric(std::string_view s) {
  if (s == "flip") return EffectMetric::kFlip;
  if (s == "prob-shift") return EffectMetric::kProbShift;
  return std::nullopt;
}

std::string_view ToString(Averaging a) {
  return a == Averaging::kPerPair ? "per-pair" : "per-seed";
}

std::optional<Averaging> ParseAveraging(std::string_view s) {
  if (s == "per-pair") return Averaging::kPerPair;
  if (s == "per-seed") return Averaging::kPerSeed;
  return std::nullopt;
}

double PairEffect(EffectMetric metric, const Prediction& before, const Prediction& after) {
  if (metric == EffectMetric::kFlip) return before.collapsed == after.collapsed ? 0.0 : 1.0;
  if (!before.collapsed_entail_prob || !after.collapsed_entail_prob) {
    throw Error(ErrorCode::kMissingProbabilities,
                "prob-shift needs probabilities for examples " + before.example_id + " and " +
                    after.example_id);
  }
  return std::fabs(*after.collapsed_entail_prob - *before.collapsed_entail_prob);
}

std::vector<double> PairEffects(const InterventionSet& set, const PredictionStore& store,
                                const EstimateOptions& options) {
  std::vector<double> effects(set.pairs.size());
  ParallelFor(
      set.pairs.size(),
      [&](std::size_t i) {
        const auto& p = set.pairs[i];
        effects[i] = PairEffect(options.metric, store.At(p.before.example_id),
                                store.At(p.after.example_id));
      },
      options.max_workers);
  return effects;
}

EffectEstimate EstimateTce(const InterventionSet& set, const PredictionStore& store,
                           const EstimateOptions& options) {
  if (!IsTotalEffect(set.target)) {
    throw Error(ErrorCode::kInvalidArgument,
                "EstimateTce needs a TCE set, got " + std::string(ToString(set.target)));
  }
  RequireNonEmpty(set);
  const EffectTable t = BuildTable(set, store, options);
  std::vector<std::size_t> rows(t.effects.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  EffectEstimate e = BaseEstimate(set, store, options);
  e.value = GroupMean(t, rows, options.averaging);
  return e;
}

EffectEstimate EstimateDce(const InterventionSet& set, const PredictionStore& store,
                           const EstimateOptions& options) {
  if (IsTotalEffect(set.target)) {
    throw Error(ErrorCode::kInvalidArgument,
                "EstimateDce needs a DCE set, got " + std::string(ToString(set.target)));
  }
  RequireNonEmpty(set);
  const EffectTable t = BuildTable(set, store, options);
  const auto rows = RowsByStratum(t);
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (rows[s].empty()) {
      LogWarning(std::string(ToString(set.target)) + ": stratum \"" + t.stratum_names[s] +
                 "\" has no pairs; remaining strata reweighted");
    }
  }
  Aggregate agg = AggregateStrata(t, rows, options.averaging);
  EffectEstimate e = BaseEstimate(set, store, options);
  e.value = agg.value;
  e.stratified_by = set.target == Target::kDceSc ? "M" : "R";
  e.strata = std::move(agg.strata);
  return e;
}

EffectEstimate EstimateEffect(const InterventionSet& set, const PredictionStore& store,
                              const EstimateOptions& options) {
  return IsTotalEffect(set.target) ? EstimateTce(set, store, options)
                                   : EstimateDce(set, store, options);
}

ConfidenceInterval BootstrapCi(const InterventionSet& set, const PredictionStore& store,
                               const EstimateOptions& options, std::size_t replicates,
                               std::uint64_t rng_seed) {
  if (replicates < 1) throw Error(ErrorCode::kInvalidArgument, "bootstrap needs B >= 1");
  RequireNonEmpty(set);
  const EffectTable t = BuildTable(set, store, options);
  const auto strata = RowsByStratum(t);
  const double point = EstimateEffect(set, store, options).value;

  std::vector<double> values(replicates);
  ParallelFor(
      replicates,
      [&](std::size_t b) {
        SampleRng rng(SplitMix64(rng_seed ^ SplitMix64(b + 1)));
        std::vector<std::vector<std::size_t>> resampled(strata.size());
        for (std::size_t s = 0; s < strata.size(); ++s) {
          const auto& rows = strata[s];
          resampled[s].reserve(rows.size());
          for (std::size_t k = 0; k < rows.size(); ++k) {
            resampled[s].push_back(rows[rng.Below(rows.size())]);
          }
        }
        values[b] = AggregateStrata(t, resampled, options.averaging).value;
      },
      options.max_workers);

  std::sort(values.begin(), values.end());
  ConfidenceInterval ci{Percentile(values, 0.025), Percentile(values, 0.975)};
  ci.low = Clamp01(std::min(ci.low, point));
  ci.high = Clamp01(std::max(ci.high, point));
  return ci;
}

EffectEstimate EstimateWithCi(const InterventionSet& set, const PredictionStore& store,
                              const EstimateOptions& options, std::size_t replicates,
                              std::uint64_t rng_seed) {
  EffectEstimate e = EstimateEffect(set, store, options);
  if (replicates > 0) {
    const ConfidenceInterval ci = BootstrapCi(set, store, options, replicates, rng_seed);
    e.ci_low = ci.low;
    e.ci_high = ci.high;
    e.bootstrap_replicates = replicates;
  }
  return e;
}

EffectProfile BuildProfile(const std::string& model_id, std::span<const EffectEstimate> estimates,
                           bool allow_partial) {
  EffectProfile profile;
  profile.model_id = model_id;
  if (estimates.empty()) throw Error(ErrorCode::kMissingTarget, "no estimates for " + model_id);
  profile.metric = estimates.front().metric;
  for (const auto& e : estimates) {
    if (e.metric != profile.metric) {
      throw Error(ErrorCode::kMetricMismatch, "estimates for " + model_id + " mix metrics " +
                                                  std::string(ToString(profile.metric)) + " and " +
                                                  std::string(ToString(e.metric)));
    }
    if (!profile.estimates.emplace(e.target, e).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate " + std::string(ToString(e.target)) + " estimate for " + model_id);
    }
  }
  if (!allow_partial) {
    for (Target t : kAllTargets) {
      if (!profile.estimates.count(t)) {
        throw Error(ErrorCode::kMissingTarget,
                    "profile for " + model_id + " lacks " + std::string(ToString(t)));
      }
    }
  }
  auto find = [&](Target t) -> const EffectEstimate* {
    auto it = profile.estimates.find(t);
    return it == profile.estimates.end() ? nullptr : &it->second;
  };
  profile.ratio_context = Ratio(find(Target::kTceC), find(Target::kDceSc));
  profile.delta_context = Delta(find(Target::kTceC), find(Target::kDceSc));
  profile.ratio_word = Ratio(find(Target::kTceW), find(Target::kDceSw));
  profile.delta_word = Delta(find(Target::kTceW), find(Target::kDceSw));
  return profile;
}

ordered_json ProfileToJson(const EffectProfile& p) {
  ordered_json j;
  j["model_id"] = p.model_id;
  j["metric"] = ToString(p.metric);
  ordered_json estimates = ordered_json::object();
  for (Target t : kAllTargets) {
    if (auto it = p.estimates.find(t); it != p.estimates.end()) {
      estimates[std::string(ToString(t))] = EstimateToJson(it->second);
    }
  }
  j["estimates"] = std::move(estimates);
  j["ratio_context"] = Optional(p.ratio_context);
  j["delta_context"] = Optional(p.delta_context);
  j["ratio_word"] = Optional(p.ratio_word);
  j["delta_word"] = Optional(p.delta_word);
  return j;
}

EffectProfile ProfileFromJson(const nlohmann::json& j) {
  try {
    EffectProfile p;
    p.model_id = j.at("model_id").get<std::string>();
    const auto metric = ParseEffectMetric(j.at("metric").get<std::string>());
    if (!metric) throw Error(ErrorCode::kParseError, "bad metric in profile " + p.model_id);
    p.metric = *metric;
    for (const auto& [key, value] : j.at("estimates").items()) {
      EffectEstimate e = EstimateFromJson(value);
      p.estimates.emplace(e.target, std::move(e));
    }
    p.ratio_context = GetOptional<double>(j, "ratio_context");
    p.delta_context = GetOptional<double>(j, "delta_context");
    p.ratio_word = GetOptional<double>(j, "ratio_word");
    p.delta_word = GetOptional<double>(j, "delta_word");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad profile JSON: ") + e.what());
  }
}

std::string SerializeProfiles(std::span<const EffectProfile> profiles) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : profiles) arr.push_back(ProfileToJson(p));
  return arr.dump(2) + "\n";
}

std::vector<EffectProfile> ParseProfiles(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("bad estimates JSON: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::kParseError, "estimates JSON must be an array");
  std::vector<EffectProfile> out;
  for (const auto& item : j) out.push_back(ProfileFromJson(item));
  return out;
}

void WriteProfiles(std::span<const EffectProfile> profiles, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeProfiles(profiles));
}

std::vector<EffectProfile> ReadProfiles(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : ReadLines(path)) text += line + "\n";
  return ParseProfiles(text);
}

}  // namespace cnp
