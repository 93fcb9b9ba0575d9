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

#include "cnp/prediction.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "cnp/corpus_io.h"
#include "cnp/error.h"
#include "json.hpp"

namespace cnp {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string Trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

constexpr GoldLabel kE = GoldLabel::kEntailment;
constexpr GoldLabel kN = GoldLabel::kNonEntailment;

const std::map<std::string, std::vector<std::pair<std::string, GoldLabel>>>& Presets() {
  static const auto* presets =
      new std::map<std::string, std::vector<std::pair<std::string, GoldLabel>>>{
          {"three-class", {{"entailment", kE}, {"neutral", kN}, {"contradiction", kN}}},
          {"two-class", {{"entailment", kE}, {"non-entailment", kN}}},
          {"roberta-large-mnli",
           {{"CONTRADICTION", kN}, {"NEUTRAL", kN}, {"ENTAILMENT", kE}}},
          {"bart-large-mnli", {{"contradiction", kN}, {"neutral", kN}, {"entailment", kE}}},
          {"help", {{"entailment", kE}, {"non_entailment", kN}}},
      };
  return *presets;
}

}  // namespace

void ValidateScheme(const LabelScheme& scheme) {
  if (scheme.labels.empty()) throw Error(ErrorCode::kInvalidScheme, "label scheme has no labels");
  std::set<std::string> seen;
  bool any_e = false, any_n = false;
  for (const auto& label : scheme.labels) {
    if (label.empty()) throw Error(ErrorCode::kInvalidScheme, "empty label name");
    if (!seen.insert(label).second) {
      throw Error(ErrorCode::kInvalidScheme, "label \"" + label + "\" listed twice");
    }
    auto it = scheme.collapse_map.find(label);
    if (it == scheme.collapse_map.end()) {
      throw Error(ErrorCode::kInvalidScheme, "label \"" + label + "\" has no two-class mapping");
    }
    (it->second == kE ? any_e : any_n) = true;
  }
  if (scheme.collapse_map.size() != scheme.labels.size()) {
    throw Error(ErrorCode::kInvalidScheme, "collapse map names labels outside the scheme");
  }
  if (!any_e || !any_n) {
    throw Error(ErrorCode::kInvalidScheme,
                "scheme must map at least one label to each two-class value");
  }
}

LabelScheme MakeScheme(const std::vector<std::pair<std::string, GoldLabel>>& mapping) {
  LabelScheme scheme;
  for (const auto& [label, gold] : mapping) {
    scheme.labels.push_back(label);
    if (!scheme.collapse_map.emplace(label, gold).second) {
      throw Error(ErrorCode::kInvalidScheme, "label \"" + label + "\" listed twice");
    }
  }
  ValidateScheme(scheme);
  return scheme;
}

std::optional<LabelScheme> SchemePreset(std::string_view name) {
  auto it = Presets().find(std::string(name));
  if (it == Presets().end()) return std::nullopt;
  return MakeScheme(it->second);
}

std::vector<std::string> SchemePresetNames() {
  std::vector<std::string> names;
  for (const auto& [name, mapping] : Presets()) names.push_back(name);
  return names;
}

LabelScheme AutoScheme(const std::vector<std::string>& labels) {
  std::vector<std::pair<std::string, GoldLabel>> mapping;
  for (const auto& label : labels) {
    const std::string v = Lower(label);
    if (v == "entailment") {
      mapping.emplace_back(label, kE);
    } else if (v == "neutral" || v == "contradiction" || v == "non-entailment" ||
               v == "non_entailment" || v == "not_entailment") {
      mapping.emplace_back(label, kN);
    } else {
      throw Error(ErrorCode::kInvalidScheme,
                  "cannot infer a two-class mapping for label \"" + label +
                      "\"; pass an explicit scheme");
    }
  }
  return MakeScheme(mapping);
}

LabelScheme ResolveScheme(std::string_view spec,
                          const std::optional<std::vector<std::string>>& declared) {
  const std::string s = Trim(spec);
  LabelScheme scheme;
  if (s.empty() || s == "auto") {
    if (!declared) {
      throw Error(ErrorCode::kInvalidScheme,
                  "scheme \"auto\" needs labels declared by the prediction source");
    }
    return AutoScheme(*declared);
  }
  if (auto preset = SchemePreset(s)) {
    scheme = *preset;
  } else if (s.find('=') != std::string::npos) {
    std::vector<std::pair<std::string, GoldLabel>> mapping;
    std::size_t start = 0;
    while (start <= s.size()) {
      std::size_t comma = s.find(',', start);
      if (comma == std::string::npos) comma = s.size();
      const std::string item = Trim(s.substr(start, comma - start));
      start = comma + 1;
      if (item.empty()) continue;
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::kInvalidScheme, "bad scheme entry \"" + item + "\"");
      }
      const auto gold = ParseGoldLabel(Lower(Trim(item.substr(eq + 1))));
      if (!gold) {
        throw Error(ErrorCode::kInvalidScheme,
                    "scheme entry \"" + item + "\" must map to entailment or non-entailment");
      }
      mapping.emplace_back(Trim(item.substr(0, eq)), *gold);
    }
    scheme = MakeScheme(mapping);
  } else {
    throw Error(ErrorCode::kInvalidScheme, "unknown label scheme \"" + s + "\"");
  }
  if (declared) {
    const std::set<std::string> want(scheme.labels.begin(), scheme.labels.end());
    const std::set<std::string> got(declared->begin(), declared->end());
    if (want != got || got.size() != declared->size()) {
      std::string msg = "declared labels [";
      for (std::size_t i = 0; i < declared->size(); ++i) {
        msg += (i ? "," : "") + (*declared)[i];
      }
      msg += "] disagree with the configured scheme";
      throw Error(ErrorCode::kSchemeMismatch, msg);
    }
    scheme.labels = *declared;
  }
  return scheme;
}

Collapsed Collapse(const LabelScheme& scheme, std::string_view raw_label,
                   const std::optional<LabelProbs>& probabilities) {
  auto it = scheme.collapse_map.find(std::string(raw_label));
  if (it == scheme.collapse_map.end()) {
    throw Error(ErrorCode::kUnknownLabel, "unknown label \"" + std::string(raw_label) + "\"");
  }
  Collapsed out{it->second, std::nullopt};
  if (probabilities) {
    double total = 0, entail = 0;
    for (const auto& [label, p] : *probabilities) {
      auto m = scheme.collapse_map.find(label);
      if (m == scheme.collapse_map.end()) {
        throw Error(ErrorCode::kUnknownLabel, "probability for unknown label \"" + label + "\"");
      }
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "probability outside [0, 1] for \"" + label + "\"");
      }
      total += p;
      if (m->second == kE) entail += p;
    }
    if (std::fabs(total - 1.0) > kProbSumTolerance) {
      throw Error(ErrorCode::kInvalidArgument, "probabilities sum to " + std::to_string(total));
    }
    out.entail_prob = std::min(1.0, entail);
  }
  return out;
}

Prediction MakePrediction(const LabelScheme& scheme, std::string example_id,
                          std::string raw_label, std::optional<LabelProbs> probabilities) {
  const Collapsed c = Collapse(scheme, raw_label, probabilities);
  Prediction p;
  p.example_id = std::move(example_id);
  p.raw_label = std::move(raw_label);
  p.probabilities = std::move(probabilities);
  p.collapsed = c.label;
  p.collapsed_entail_prob = c.entail_prob;
  return p;
}

const Prediction& PredictionStore::At(const std::string& example_id) const {
  auto it = records.find(example_id);
  if (it == records.end()) {
    throw Error(ErrorCode::kMissingPrediction,
                "model " + model_id + " has no prediction for example " + example_id);
  }
  return it->second;
}

PredictionFile ReadPredictionFile(const std::filesystem::path& path) {
  const auto lines = ReadLines(path);
  PredictionFile file;
  bool header_seen = false;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (Trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      if (!header_seen) {
        file.model_id = j.at("model_id").get<std::string>();
        file.labels = j.at("labels").get<std::vector<std::string>>();
        header_seen = true;
        continue;
      }
      PredictionFileRow row;
      row.example_id = j.at("example_id").get<std::string>();
      row.label = j.at("label").get<std::string>();
      if (auto p = j.find("probs"); p != j.end() && !p->is_null()) {
        row.probs = p->get<LabelProbs>();
      }
      if (auto d = j.find("input_digest"); d != j.end()) {
        row.input_digest = d->get<std::string>();
      }
      if (!ids.insert(row.example_id).second) {
        throw Error(ErrorCode::kDuplicateId, where + "duplicate example_id " + row.example_id);
      }
      file.rows.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, where + e.what());
    }
  }
  if (!header_seen) {
    throw Error(ErrorCode::kParseError, path.string() + ": missing header line");
  }
  return file;
}

std::string SerializePredictionFile(const PredictionFile& file) {
  nlohmann::ordered_json header;
  header["model_id"] = file.model_id;
  header["labels"] = file.labels;
  std::string out = header.dump();
  out.push_back('\n');
  for (const auto& row : file.rows) {
    nlohmann::ordered_json j;
    j["example_id"] = row.example_id;
    j["label"] = row.label;
    if (row.probs) {
      // Declared label order, not map order.
      nlohmann::ordered_json probs = nlohmann::ordered_json::object();
      for (const auto& label : file.labels) {
        if (auto it = row.probs->find(label); it != row.probs->end()) probs[label] = it->second;
      }
      for (const auto& [label, p] : *row.probs) {
        if (!probs.contains(label)) probs[label] = p;
      }
      j["probs"] = probs;
    }
    if (row.input_digest) j["input_digest"] = *row.input_digest;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void WritePredictionFile(const PredictionFile& file, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializePredictionFile(file));
}

PredictionFile ToPredictionFile(const PredictionStore& store) {
  PredictionFile file;
  file.model_id = store.model_id;
  file.labels = store.scheme.labels;
  for (const auto& [id, p] : store.records) {
    file.rows.push_back(PredictionFileRow{id, p.raw_label, p.probabilities, std::nullopt});
  }
  return file;
}

}  // namespace cnp
