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

#ifndef CNP_EFFECTS_H_
#define CNP_EFFECTS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cnp/intervention.h"
#include "cnp/prediction.h"
#include "json.hpp"

namespace cnp {

enum class EffectMetric {
  kFlip,       // 1 if the collapsed label changes, else 0
  kProbShift,  // |P_after(entailment) - P_before(entailment)|
};

// How per-pair effects are averaged: over all pairs, or first within each
// seed (before example) and then across seeds.
enum class Averaging { kPerPair, kPerSeed };

std::string_view ToString(EffectMetric m);
std::optional<EffectMetric> ParseEffectMetric(std::string_view s);
std::string_view ToString(Averaging a);
std::optional<Averaging> ParseAveraging(std::string_view s);

struct StratumEstimate {
  std::string stratum;  // "up"/"down" for DCE_SC, "sub"/"sup"/"none" for DCE_SW
  double weight = 0;
  double mean_effect = 0;
  std::size_t n = 0;

  friend bool operator==(const StratumEstimate&, const StratumEstimate&) = default;
};

struct EffectEstimate {
  std::string model_id;
  Target target = Target::kDceSc;
  EffectMetric metric = EffectMetric::kFlip;
  Averaging averaging = Averaging::kPerPair;
  double value = 0;
  std::size_t n_pairs = 0;
  std::optional<std::string> stratified_by;  // "M" or "R" for direct effects
  std::vector<StratumEstimate> strata;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t bootstrap_replicates = 0;

  friend bool operator==(const EffectEstimate&, const EffectEstimate&) = default;
};

struct EffectProfile {
  std::string model_id;
  EffectMetric metric = EffectMetric::kFlip;
  std::map<Target, EffectEstimate> estimates;
  // TCE_C / DCE_SC and TCE_W / DCE_SW; nullopt when the denominator is 0 or
  // an estimate is absent.
  std::optional<double> ratio_context;
  std::optional<double> delta_context;
  std::optional<double> ratio_word;
  std::optional<double> delta_word;

  friend bool operator==(const EffectProfile&, const EffectProfile&) = default;
};

// Throws kMissingProbabilities in kProbShift mode when either side lacks an
// entailment probability.
double PairEffect(EffectMetric metric, const Prediction& before, const Prediction& after);

struct EstimateOptions {
  EffectMetric metric = EffectMetric::kFlip;
  Averaging averaging = Averaging::kPerPair;
  std::size_t max_workers = 0;
};

// Per-pair effects in set order. Throws kMissingPrediction.
std::vector<double> PairEffects(const InterventionSet& set, const PredictionStore& store,
                                const EstimateOptions& options = {});

// Mean pair effect; set.target must be TCE_C or TCE_W. Throws kEmptySet.
EffectEstimate EstimateTce(const InterventionSet& set, const PredictionStore& store,
                           const EstimateOptions& options = {});

// Stratified by M (DCE_SC) or R (DCE_SW) with empirical pair-frequency
// weights. Strata without pairs are omitted. Throws kEmptySet.
EffectEstimate EstimateDce(const InterventionSet& set, const PredictionStore& store,
                           const EstimateOptions& options = {});

// Dispatches on set.target.
EffectEstimate EstimateEffect(const InterventionSet& set, const PredictionStore& store,
                              const EstimateOptions& options = {});

struct ConfidenceInterval {
  double low = 0;
  double high = 0;
};

// Percentile 2.5/97.5 interval (linear interpolation between order
// statistics) over `replicates` resamples of pairs with replacement;
// direct effects resample within strata. Widened if needed so that it
// contains the point estimate. Deterministic in rng_seed.
ConfidenceInterval BootstrapCi(const InterventionSet& set, const PredictionStore& store,
                               const EstimateOptions& options, std::size_t replicates,
                               std::uint64_t rng_seed);

// EstimateEffect plus CI bounds when replicates > 0.
EffectEstimate EstimateWithCi(const InterventionSet& set, const PredictionStore& store,
                              const EstimateOptions& options, std::size_t replicates,
                              std::uint64_t rng_seed);

// Requires one estimate per target, all with the same metric (kMetricMismatch,
// kMissingTarget). With allow_partial, absent targets leave the matching
// ratio/delta empty instead.
EffectProfile BuildProfile(const std::string& model_id, std::span<const EffectEstimate> estimates,
                           bool allow_partial = false);

nlohmann::ordered_json ProfileToJson(const EffectProfile& profile);
// Ignores unknown keys.
EffectProfile ProfileFromJson(const nlohmann::json& j);

// Estimates file: a JSON array of profiles.
std::string SerializeProfiles(std::span<const EffectProfile> profiles);
std::vector<EffectProfile> ParseProfiles(std::string_view json_text);
void WriteProfiles(std::span<const EffectProfile> profiles, const std::filesystem::path& path);
std::vector<EffectProfile> ReadProfiles(const std::filesystem::path& path);

}  // namespace cnp

#endif  // CNP_EFFECTS_H_
