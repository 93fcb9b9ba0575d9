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

#include "cnp/natural_logic.h"

#include <string>
#include <vector>

#include "cnp/digest.h"
#include "cnp/error.h"

namespace cnp {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::vector<std::string_view> SplitTokens(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string Fill(const std::vector<std::string_view>& tokens,
                 std::string_view term) {
  const std::string normalized = NormalizeWhitespace(term);
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    if (tokens[i] == kSlotMarker) {
      out += normalized;
    } else {
      out.append(tokens[i]);
    }
  }
  return out;
}

}  // namespace

std::string_view ToString(Monotonicity m) {
  return m == Monotonicity::kUp ? "up" : "down";
}

std::string_view ToString(Relation r) {
  switch (r) {
    case Relation::kSubsumed: return "sub";
    case Relation::kSubsumes: return "sup";
    case Relation::kUnrelated: return "none";
  }
  return "none";
}

std::string_view ToString(GoldLabel g) {
  return g == GoldLabel::kEntailment ? "entailment" : "non-entailment";
}

std::optional<Monotonicity> ParseMonotonicity(std::string_view s) {
  if (s == "up") return Monotonicity::kUp;
  if (s == "down") return Monotonicity::kDown;
  return std::nullopt;
}

std::optional<Relation> ParseRelation(std::string_view s) {
  if (s == "sub") return Relation::kSubsumed;
  if (s == "sup") return Relation::kSubsumes;
  if (s == "none") return Relation::kUnrelated;
  return std::nullopt;
}

std::optional<GoldLabel> ParseGoldLabel(std::string_view s) {
  if (s == "entailment") return GoldLabel::kEntailment;
  if (s == "non-entailment") return GoldLabel::kNonEntailment;
  return std::nullopt;
}

std::string NormalizeWhitespace(std::string_view text) {
  std::string out;
  for (std::string_view token : SplitTokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out.append(token);
  }
  return out;
}

int CountSlotMarkers(std::string_view template_text) {
  int count = 0;
  for (std::string_view token : SplitTokens(template_text)) {
    if (token == kSlotMarker) ++count;
  }
  return count;
}

void ValidateTemplate(std::string_view template_text) {
  int exact = 0;
  for (std::string_view token : SplitTokens(template_text)) {
    if (token == kSlotMarker) {
      ++exact;
    } else if (token.find(kSlotMarker) != std::string_view::npos) {
      throw Error(ErrorCode::kMalformedTemplate,
                  "slot marker must be a standalone token: \"" +
                      std::string(token) + "\"");
    }
  }
  if (exact != 1) {
    throw Error(ErrorCode::kMalformedTemplate,
                "template must contain exactly one slot marker, found " +
                    std::to_string(exact));
  }
}

std::pair<std::string, std::string> Substitute(const Context& c,
                                               const WordPair& w) {
  try {
    ValidateTemplate(c.template_text);
  } catch (const Error& e) {
    throw Error(e.code(), "context " + c.id + ": " + e.what());
  }
  const auto tokens = SplitTokens(c.template_text);
  return {Fill(tokens, w.first), Fill(tokens, w.second)};
}

std::string ExampleId(std::string_view context_id,
                      std::string_view word_pair_id) {
  std::string key;
  key.reserve(context_id.size() + word_pair_id.size() + 1);
  key.append(context_id).push_back('|');
  key.append(word_pair_id);
  return Sha256Hex(key).substr(0, 16);
}

NLIExample MakeExample(const Context& c, const WordPair& w) {
  auto [premise, hypothesis] = Substitute(c, w);
  NLIExample ex;
  ex.example_id = ExampleId(c.id, w.id);
  ex.context_id = c.id;
  ex.word_pair_id = w.id;
  ex.premise = std::move(premise);
  ex.hypothesis = std::move(hypothesis);
  ex.monotonicity = c.monotonicity;
  ex.relation = w.relation;
  ex.gold = GoldLabelFor(c.monotonicity, w.relation);
  return ex;
}

}  // namespace cnp
