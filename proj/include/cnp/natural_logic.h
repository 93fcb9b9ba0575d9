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

#ifndef CNP_NATURAL_LOGIC_H_
#define CNP_NATURAL_LOGIC_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace cnp {

// Context monotonicity. Corpora may annotate "neither"; such contexts are
// dropped at load time and never become a Monotonicity value.
enum class Monotonicity { kUp, kDown };

// Relation of (first, second): kSubsumed is first ⊑ second, kSubsumes is
// first ⊒ second, kUnrelated is #.
enum class Relation { kSubsumed, kSubsumes, kUnrelated };

enum class GoldLabel { kEntailment, kNonEntailment };

inline constexpr std::array<Monotonicity, 2> kAllMonotonicities = {
    Monotonicity::kUp, Monotonicity::kDown};
inline constexpr std::array<Relation, 3> kAllRelations = {
    Relation::kSubsumed, Relation::kSubsumes, Relation::kUnrelated};

// Canonical corpus spellings: "up"/"down", "sub"/"sup"/"none",
// "entailment"/"non-entailment".
std::string_view ToString(Monotonicity m);
std::string_view ToString(Relation r);
std::string_view ToString(GoldLabel g);

// Parsers accept the canonical spellings only; they return nullopt otherwise.
// "neither" is not a Monotonicity, so ParseMonotonicity rejects it too.
std::optional<Monotonicity> ParseMonotonicity(std::string_view s);
std::optional<Relation> ParseRelation(std::string_view s);
std::optional<GoldLabel> ParseGoldLabel(std::string_view s);

inline constexpr std::string_view kSlotMarker = "___";

struct Context {
  std::string id;
  std::string template_text;
  Monotonicity monotonicity = Monotonicity::kUp;

  friend bool operator==(const Context&, const Context&) = default;
};

struct WordPair {
  std::string id;
  std::string first;   // inserted into the premise
  std::string second;  // inserted into the hypothesis
  Relation relation = Relation::kUnrelated;

  friend bool operator==(const WordPair&, const WordPair&) = default;
};

struct NLIExample {
  std::string example_id;
  std::string context_id;
  std::string word_pair_id;
  std::string premise;
  std::string hypothesis;
  Monotonicity monotonicity = Monotonicity::kUp;
  Relation relation = Relation::kUnrelated;
  GoldLabel gold = GoldLabel::kNonEntailment;

  friend bool operator==(const NLIExample&, const NLIExample&) = default;
};

// Entailment iff (Up, ⊑) or (Down, ⊒).
constexpr GoldLabel GoldLabelFor(Monotonicity m, Relation r) {
  if ((m == Monotonicity::kUp && r == Relation::kSubsumed) ||
      (m == Monotonicity::kDown && r == Relation::kSubsumes)) {
    return GoldLabel::kEntailment;
  }
  return GoldLabel::kNonEntailment;
}

// Trims and collapses every run of ASCII whitespace to a single space.
std::string NormalizeWhitespace(std::string_view text);

// Number of whitespace-delimited tokens equal to the slot marker.
int CountSlotMarkers(std::string_view template_text);

// Throws Error(kMalformedTemplate) unless the template has exactly one slot
// token and no other token containing the marker.
void ValidateTemplate(std::string_view template_text);

// Fills the slot with w.first / w.second. Throws kMalformedTemplate.
std::pair<std::string, std::string> Substitute(const Context& c,
                                               const WordPair& w);

// First 16 hex characters of sha256("context_id|word_pair_id").
std::string ExampleId(std::string_view context_id,
                      std::string_view word_pair_id);

NLIExample MakeExample(const Context& c, const WordPair& w);

}  // namespace cnp

#endif  // CNP_NATURAL_LOGIC_H_
