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

#ifndef CNP_SYNTHETIC_MODELS_H_
#define CNP_SYNTHETIC_MODELS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cnp/natural_logic.h"
#include "cnp/prediction.h"

namespace cnp {

// Rule-based predictors with known causal behavior. The oracle and the
// upward-bias model read the example's M/R annotations; the negation
// heuristic reads only the premise text.
enum class SyntheticKind {
  kNaturalLogicOracle,  // gold_label(M, R)
  kUpwardBias,          // gold_label(Up, R)
  kNegationHeuristic,   // NonEntailment iff the premise has a negation token
  kConstantEntailment,
  kSeededRandom,        // hash of (seed, example_id)
};

inline constexpr std::array<SyntheticKind, 5> kAllSyntheticKinds = {
    SyntheticKind::kNaturalLogicOracle, SyntheticKind::kUpwardBias,
    SyntheticKind::kNegationHeuristic, SyntheticKind::kConstantEntailment,
    SyntheticKind::kSeededRandom};

struct SyntheticModel {
  SyntheticKind kind = SyntheticKind::kConstantEntailment;
  std::uint64_t seed = 0;  // kSeededRandom only
};

// "natural-logic-oracle", "upward-bias", "negation-heuristic",
// "constant-entailment", "seeded-random".
std::string_view SyntheticName(SyntheticKind kind);

// "<name>" or "seeded-random:<seed>".
std::optional<SyntheticModel> ParseSyntheticModel(std::string_view spec);

// Stable model id, e.g. "constant-entailment" or "seeded-random-7".
std::string SyntheticModelId(const SyntheticModel& model);

// Labels "entailment" / "non-entailment".
const LabelScheme& SyntheticScheme();

// Tokens are whitespace-separated, lowercased, with surrounding punctuation
// stripped. A token counts when it is one of no/not/n't/never/none or ends
// in the contraction "n't" (e.g. "can't").
bool HasNegationToken(std::string_view text);

GoldLabel SyntheticLabel(const SyntheticModel& model, const NLIExample& example);

// Degenerate probabilities: 1.0 on the chosen label.
Prediction Predict(const SyntheticModel& model, const NLIExample& example);

}  // namespace cnp

#endif  // CNP_SYNTHETIC_MODELS_H_
