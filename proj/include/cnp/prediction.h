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

#ifndef CNP_PREDICTION_H_
#define CNP_PREDICTION_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cnp/natural_logic.h"

namespace cnp {

using LabelProbs = std::map<std::string, double>;

// Raw model labels and their two-class grouping.
struct LabelScheme {
  std::vector<std::string> labels;
  std::map<std::string, GoldLabel> collapse_map;

  friend bool operator==(const LabelScheme&, const LabelScheme&) = default;
};

// Throws kInvalidScheme unless every label maps exactly once and both
// two-class values are reachable.
void ValidateScheme(const LabelScheme& scheme);

LabelScheme MakeScheme(
    const std::vector<std::pair<std::string, GoldLabel>>& mapping);

// Named presets for common checkpoint families. Label order here is only a
// default; a source that declares its own labels overrides it.
std::optional<LabelScheme> SchemePreset(std::string_view name);
std::vector<std::string> SchemePresetNames();

// Maps labels by name: "entailment" (any case) to Entailment; "neutral",
// "contradiction", "non-entailment", "non_entailment", "not_entailment" to
// NonEntailment. Throws kInvalidScheme on anything else.
LabelScheme AutoScheme(const std::vector<std::string>& labels);

// `spec` is empty/"auto", a preset name, or an inline list such as
// "entailment=entailment,neutral=non-entailment,contradiction=non-entailment".
// With `declared` labels present, the scheme's label set must match them
// (kSchemeMismatch) and the declared order is kept.
LabelScheme ResolveScheme(std::string_view spec,
                          const std::optional<std::vector<std::string>>& declared);

struct Collapsed {
  GoldLabel label = GoldLabel::kNonEntailment;
  std::optional<double> entail_prob;
};

inline constexpr double kProbSumTolerance = 1e-6;

// Throws kUnknownLabel for labels outside the scheme (including probability
// keys) and kInvalidArgument for probabilities outside [0, 1] or not summing
// to 1 within kProbSumTolerance.
Collapsed Collapse(const LabelScheme& scheme, std::string_view raw_label,
                   const std::optional<LabelProbs>& probabilities = std::nullopt);

struct Prediction {
  std::string example_id;
  std::string raw_label;
  std::optional<LabelProbs> probabilities;
  GoldLabel collapsed = GoldLabel::kNonEntailment;
  std::optional<double> collapsed_entail_prob;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

Prediction MakePrediction(const LabelScheme& scheme, std::string example_id,
                          std::string raw_label,
                          std::optional<LabelProbs> probabilities = std::nullopt);

struct PredictionStore {
  std::string model_id;
  LabelScheme scheme;
  std::map<std::string, Prediction> records;

  // Throws kMissingPrediction.
  const Prediction& At(const std::string& example_id) const;

  friend bool operator==(const PredictionStore&,
                         const PredictionStore&) = default;
};

// Prediction file: header {"model_id", "labels"}, then one
// {"example_id", "label", "probs"?} object per line. Cache files add an
// "input_digest" key per row.
struct PredictionFileRow {
  std::string example_id;
  std::string label;
  std::optional<LabelProbs> probs;
  std::optional<std::string> input_digest;
};

struct PredictionFile {
  std::string model_id;
  std::vector<std::string> labels;
  std::vector<PredictionFileRow> rows;
};

PredictionFile ReadPredictionFile(const std::filesystem::path& path);
std::string SerializePredictionFile(const PredictionFile& file);
void WritePredictionFile(const PredictionFile& file,
                         const std::filesystem::path& path);

// Rows in example_id order.
PredictionFile ToPredictionFile(const PredictionStore& store);

}  // namespace cnp

#endif  // CNP_PREDICTION_H_
