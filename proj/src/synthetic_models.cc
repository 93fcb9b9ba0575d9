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

#include <cctype>
#include <string>

#include "cnp/digest.h"

namespace cnp {
namespace {

bool IsEdgePunct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) && c != '\'';
}

}  // namespace

std::string_view SyntheticName(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kNaturalLogicOracle: return "natural-logic-oracle";
    case SyntheticKind::kUpwardBias: return "upward-bias";
    case SyntheticKind::kNegationHeuristic: return "negation-heuristic";
    case SyntheticKind::kConstantEntailment: return "constant-entailment";
    case SyntheticKind::kSeededRandom: return "seeded-random";
  }
  return "";
}

std::optional<SyntheticModel> ParseSyntheticModel(std::string_view spec) {
  std::string_view name = spec;
  std::optional<std::uint64_t> seed;
  if (auto colon = spec.find(':'); colon != std::string_view::npos) {
    name = spec.substr(0, colon);
    const std::string digits(spec.substr(colon + 1));
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      return std::nullopt;
    }
    try {
      seed = std::stoull(digits);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  for (SyntheticKind kind : kAllSyntheticKinds) {
    if (name == SyntheticName(kind)) {
      if (seed && kind != SyntheticKind::kSeededRandom) return std::nullopt;
      return SyntheticModel{kind, seed.value_or(0)};
    }
  }
  return std::nullopt;
}

std::string SyntheticModelId(const SyntheticModel& model) {
  std::string id(SyntheticName(model.kind));
  if (model.kind == SyntheticKind::kSeededRandom) id += "-" + std::to_string(model.seed);
  return id;
}

const LabelScheme& SyntheticScheme() {
  static const LabelScheme* scheme = new LabelScheme(MakeScheme(
      {{"entailment", GoldLabel::kEntailment}, {"non-entailment", GoldLabel::kNonEntailment}}));
  return *scheme;
}

bool HasNegationToken(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t end = i;
    while (start < end && IsEdgePunct(text[start])) ++start;
    while (end > start && IsEdgePunct(text[end - 1])) --end;
    if (start == end) continue;
    std::string token(text.substr(start, end - start));
    for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (token == "no" || token == "not" || token == "n't" || token == "never" ||
        token == "none") {
      return true;
    }
    if (token.size() > 3 && token.compare(token.size() - 3, 3, "n't") == 0) return true;
  }
  return false;
}

GoldLabel SyntheticLabel(const SyntheticModel& model, const NLIExample& example) {
  switch (model.kind) {
    case SyntheticKind::kNaturalLogicOracle:
      return GoldLabelFor(example.monotonicity, example.relation);
    case SyntheticKind::kUpwardBias:
      return GoldLabelFor(Monotonicity::kUp, example.relation);
    case SyntheticKind::kNegationHeuristic:
      return HasNegationToken(example.premise) ? GoldLabel::kNonEntailment
                                               : GoldLabel::kEntailment;
    case SyntheticKind::kConstantEntailment:
      return GoldLabel::kEntailment;
    case SyntheticKind::kSeededRandom: {
      const std::string digest =
          Sha256Hex(std::to_string(model.seed) + "|" + example.example_id);
      // Low bit of the first hex digit.
      const char c = digest[0];
      const int nibble = c <= '9' ? c - '0' : c - 'a' + 10;
      return (nibble & 1) ? GoldLabel::kEntailment : GoldLabel::kNonEntailment;
    }
  }
  return GoldLabel::kNonEntailment;
}

Prediction Predict(const SyntheticModel& model, const NLIExample& example) {
  const GoldLabel label = SyntheticLabel(model, example);
  const bool entail = label == GoldLabel::kEntailment;
  LabelProbs probs{{"entailment", entail ? 1.0 : 0.0},
                   {"non-entailment", entail ? 0.0 : 1.0}};
  return MakePrediction(SyntheticScheme(), example.example_id, std::string(ToString(label)),
                        std::move(probs));
}

}  // namespace cnp
