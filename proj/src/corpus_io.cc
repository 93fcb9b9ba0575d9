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

#include "cnp/corpus_io.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <utility>

#include "cnp/digest.h"
#include "cnp/error.h"
#include "cnp/logging.h"
#include "json.hpp"

namespace cnp {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kContextsHeader = "context_id\tmonotonicity\ttemplate";
constexpr std::string_view kWordPairsHeader = "pair_id\tfirst\tsecond\trelation";
constexpr std::string_view kBenchmarkHeader =
    "model_id\tbenchmark\tn_classes\taccuracy";

[[noreturn]] void ThrowParse(const fs::path& path, std::size_t line,
                             const std::string& what) {
  throw Error(ErrorCode::kParseError, path.string() + ":" +
                                          std::to_string(line) + ": " + what);
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string Trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool IsBlank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c));
  });
}

void CheckTsvField(const std::string& field, std::string_view what) {
  if (field.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " contains a tab or newline: " + field);
  }
}

// Monotonicity as read from files, where "neither" is representable.
enum class RawMonotonicity { kUp, kDown, kNeither };

std::optional<RawMonotonicity> ParseRawMonotonicity(std::string_view s) {
  if (s == "up") return RawMonotonicity::kUp;
  if (s == "down") return RawMonotonicity::kDown;
  if (s == "neither") return RawMonotonicity::kNeither;
  return std::nullopt;
}

struct RawContexts {
  std::vector<Context> kept;
  std::set<std::string> neither_ids;
};

RawContexts ReadContexts(const fs::path& path) {
  RawContexts out;
  const auto lines = ReadLines(path);
  std::set<std::string> seen;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (IsBlank(lines[i])) continue;
    if (!header_seen) {
      if (lines[i] != kContextsHeader) {
        ThrowParse(path, lineno, "expected header \"context_id<TAB>monotonicity<TAB>template\"");
      }
      header_seen = true;
      continue;
    }
    const auto f = SplitTabs(lines[i]);
    if (f.size() != 3) ThrowParse(path, lineno, "expected 3 fields");
    if (f[0].empty()) ThrowParse(path, lineno, "empty context_id");
    if (!seen.insert(f[0]).second) {
      throw Error(ErrorCode::kDuplicateId, path.string() + ":" +
                                               std::to_string(lineno) +
                                               ": duplicate context_id " + f[0]);
    }
    const auto mono = ParseRawMonotonicity(f[1]);
    if (!mono) ThrowParse(path, lineno, "bad monotonicity \"" + f[1] + "\"");
    try {
      ValidateTemplate(f[2]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedTemplate,
                  "context " + f[0] + " (" + path.string() + ":" +
                      std::to_string(lineno) + "): " + e.what());
    }
    if (*mono == RawMonotonicity::kNeither) {
      out.neither_ids.insert(f[0]);
      continue;
    }
    out.kept.push_back(Context{f[0], f[2],
                               *mono == RawMonotonicity::kUp
                                   ? Monotonicity::kUp
                                   : Monotonicity::kDown});
  }
  return out;
}

std::vector<WordPair> ReadWordPairs(const fs::path& path) {
  std::vector<WordPair> out;
  const auto lines = ReadLines(path);
  std::set<std::string> seen;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (IsBlank(lines[i])) continue;
    if (!header_seen) {
      if (lines[i] != kWordPairsHeader) {
        ThrowParse(path, lineno, "expected header \"pair_id<TAB>first<TAB>second<TAB>relation\"");
      }
      header_seen = true;
      continue;
    }
    const auto f = SplitTabs(lines[i]);
    if (f.size() != 4) ThrowParse(path, lineno, "expected 4 fields");
    if (f[0].empty()) ThrowParse(path, lineno, "empty pair_id");
    if (!seen.insert(f[0]).second) {
      throw Error(ErrorCode::kDuplicateId, path.string() + ":" +
                                               std::to_string(lineno) +
                                               ": duplicate pair_id " + f[0]);
    }
    if (Trim(f[1]).empty() || Trim(f[2]).empty()) {
      ThrowParse(path, lineno, "empty term in pair " + f[0]);
    }
    const auto rel = ParseRelation(f[3]);
    if (!rel) ThrowParse(path, lineno, "bad relation \"" + f[3] + "\"");
    out.push_back(WordPair{f[0], f[1], f[2], *rel});
  }
  return out;
}

ordered_json ExampleToJson(const NLIExample& ex) {
  ordered_json j;
  j["example_id"] = ex.example_id;
  j["context_id"] = ex.context_id;
  j["pair_id"] = ex.word_pair_id;
  j["premise"] = ex.premise;
  j["hypothesis"] = ex.hypothesis;
  j["monotonicity"] = ToString(ex.monotonicity);
  j["relation"] = ToString(ex.relation);
  j["gold"] = ToString(ex.gold);
  return j;
}

std::string GetString(const nlohmann::json& j, const char* key,
                      const fs::path& path, std::size_t lineno) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    ThrowParse(path, lineno, std::string("missing string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

nlohmann::json ParseJsonLine(const std::string& line, const fs::path& path,
                             std::size_t lineno) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) ThrowParse(path, lineno, "expected a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    ThrowParse(path, lineno, e.what());
  }
}

// Re-derives `claimed` from its factors and reports the first disagreement.
std::optional<std::string> ExampleMismatch(const NLIExample& claimed,
                                           const NLIExample& derived) {
  if (claimed.example_id != derived.example_id) return "example_id";
  if (NormalizeWhitespace(claimed.premise) != derived.premise) return "premise";
  if (NormalizeWhitespace(claimed.hypothesis) != derived.hypothesis) {
    return "hypothesis";
  }
  if (claimed.monotonicity != derived.monotonicity) return "monotonicity";
  if (claimed.relation != derived.relation) return "relation";
  if (claimed.gold != derived.gold) return "gold";
  return std::nullopt;
}

std::string ExamplesJsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& ex : corpus.examples) {
    out += ExampleToJson(ex).dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path.string());
  return lines;
}

void WriteFileAtomic(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorCode::kIoError, "cannot create directory " +
                                           path.parent_path().string() + ": " +
                                           ec.message());
    }
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot rename into " + path.string() + ": " + ec.message());
  }
}

Corpus CorpusFromFactors(std::vector<Context> contexts,
                         std::vector<WordPair> word_pairs) {
  Corpus corpus;
  corpus.examples.reserve(contexts.size() * word_pairs.size());
  for (const auto& c : contexts) {
    for (const auto& w : word_pairs) corpus.examples.push_back(MakeExample(c, w));
  }
  corpus.contexts = std::move(contexts);
  corpus.word_pairs = std::move(word_pairs);
  return corpus;
}

void ValidateCorpus(const Corpus& corpus) {
  std::unordered_map<std::string, const Context*> contexts;
  for (const auto& c : corpus.contexts) {
    if (!contexts.emplace(c.id, &c).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate context_id " + c.id);
    }
    ValidateTemplate(c.template_text);
  }
  std::unordered_map<std::string, const WordPair*> pairs;
  for (const auto& w : corpus.word_pairs) {
    if (!pairs.emplace(w.id, &w).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate pair_id " + w.id);
    }
    if (Trim(w.first).empty() || Trim(w.second).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty term in pair " + w.id);
    }
  }
  std::set<std::pair<std::string, std::string>> seen;
  std::set<std::string> ids;
  for (const auto& ex : corpus.examples) {
    auto c = contexts.find(ex.context_id);
    auto w = pairs.find(ex.word_pair_id);
    if (c == contexts.end() || w == pairs.end()) {
      throw Error(ErrorCode::kUnknownReference,
                  "example " + ex.example_id + " references unknown context " +
                      ex.context_id + " or pair " + ex.word_pair_id);
    }
    if (!seen.emplace(ex.context_id, ex.word_pair_id).second ||
        !ids.insert(ex.example_id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate example " +
                                               ex.context_id + "|" +
                                               ex.word_pair_id);
    }
    if (auto field = ExampleMismatch(ex, MakeExample(*c->second, *w->second))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "example " + ex.example_id + " disagrees with its factors on " +
                      *field);
    }
  }
}

std::unordered_map<std::string, std::size_t> IndexExamples(
    const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(corpus.examples.size());
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    index.emplace(corpus.examples[i].example_id, i);
  }
  return index;
}

LoadedCorpus LoadCorpus(const fs::path& contexts_path,
                        const fs::path& word_pairs_path,
                        const std::optional<fs::path>& examples_path) {
  RawContexts raw = ReadContexts(contexts_path);
  std::vector<WordPair> pairs = ReadWordPairs(word_pairs_path);

  LoadedCorpus out;
  out.stats.contexts_loaded = raw.kept.size();
  out.stats.contexts_excluded_neither = raw.neither_ids.size();
  out.stats.word_pairs_loaded = pairs.size();

  if (!examples_path) {
    out.stats.examples_excluded_neither = raw.neither_ids.size() * pairs.size();
    out.corpus = CorpusFromFactors(std::move(raw.kept), std::move(pairs));
  } else {
    std::unordered_map<std::string, const Context*> ctx_by_id;
    for (const auto& c : raw.kept) ctx_by_id.emplace(c.id, &c);
    std::unordered_map<std::string, const WordPair*> pair_by_id;
    for (const auto& w : pairs) pair_by_id.emplace(w.id, &w);

    std::vector<NLIExample> examples;
    std::set<std::pair<std::string, std::string>> seen;
    const auto lines = ReadLines(*examples_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::size_t lineno = i + 1;
      if (IsBlank(lines[i])) continue;
      const auto j = ParseJsonLine(lines[i], *examples_path, lineno);
      NLIExample ex;
      ex.example_id = GetString(j, "example_id", *examples_path, lineno);
      ex.context_id = GetString(j, "context_id", *examples_path, lineno);
      ex.word_pair_id = GetString(j, "pair_id", *examples_path, lineno);
      ex.premise = GetString(j, "premise", *examples_path, lineno);
      ex.hypothesis = GetString(j, "hypothesis", *examples_path, lineno);
      const auto m = ParseMonotonicity(GetString(j, "monotonicity", *examples_path, lineno));
      const auto r = ParseRelation(GetString(j, "relation", *examples_path, lineno));
      const auto g = ParseGoldLabel(GetString(j, "gold", *examples_path, lineno));
      if (!m || !r || !g) ThrowParse(*examples_path, lineno, "bad label value");
      ex.monotonicity = *m;
      ex.relation = *r;
      ex.gold = *g;

      if (raw.neither_ids.count(ex.context_id)) {
        ++out.stats.examples_excluded_neither;
        continue;
      }
      auto c = ctx_by_id.find(ex.context_id);
      auto w = pair_by_id.find(ex.word_pair_id);
      if (c == ctx_by_id.end() || w == pair_by_id.end()) {
        throw Error(ErrorCode::kUnknownReference,
                    examples_path->string() + ":" + std::to_string(lineno) +
                        ": unknown context_id or pair_id");
      }
      if (!seen.emplace(ex.context_id, ex.word_pair_id).second) {
        throw Error(ErrorCode::kDuplicateId,
                    examples_path->string() + ":" + std::to_string(lineno) +
                        ": duplicate example " + ex.context_id + "|" +
                        ex.word_pair_id);
      }
      NLIExample derived = MakeExample(*c->second, *w->second);
      if (auto field = ExampleMismatch(ex, derived)) {
        ThrowParse(*examples_path, lineno,
                   "example disagrees with re-substitution on " + *field);
      }
      examples.push_back(std::move(derived));
    }
    out.corpus.contexts = std::move(raw.kept);
    out.corpus.word_pairs = std::move(pairs);
    out.corpus.examples = std::move(examples);
  }
  out.stats.examples = out.corpus.examples.size();
  if (out.stats.contexts_excluded_neither > 0) {
    LogWarning("excluded " + std::to_string(out.stats.contexts_excluded_neither) +
               " contexts with monotonicity \"neither\" (" +
               std::to_string(out.stats.examples_excluded_neither) +
               " examples)");
  }
  return out;
}

LoadedCorpus LoadCorpusDir(const fs::path& dir) {
  const fs::path examples = dir / "examples.jsonl";
  std::optional<fs::path> examples_path;
  if (fs::exists(examples)) examples_path = examples;
  return LoadCorpus(dir / "contexts.tsv", dir / "word_pairs.tsv", examples_path);
}

CorpusPaths WriteCorpus(const Corpus& corpus, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "cannot create directory " + dir.string() +
                                         (ec ? ": " + ec.message() : ""));
  }
  std::string contexts(kContextsHeader);
  contexts.push_back('\n');
  for (const auto& c : corpus.contexts) {
    CheckTsvField(c.id, "context_id");
    CheckTsvField(c.template_text, "template");
    contexts += c.id + "\t" + std::string(ToString(c.monotonicity)) + "\t" +
                c.template_text + "\n";
  }
  std::string pairs(kWordPairsHeader);
  pairs.push_back('\n');
  for (const auto& w : corpus.word_pairs) {
    CheckTsvField(w.id, "pair_id");
    CheckTsvField(w.first, "first");
    CheckTsvField(w.second, "second");
    pairs += w.id + "\t" + w.first + "\t" + w.second + "\t" +
             std::string(ToString(w.relation)) + "\n";
  }
  CorpusPaths paths{dir / "contexts.tsv", dir / "word_pairs.tsv",
                    dir / "examples.jsonl"};
  WriteFileAtomic(paths.contexts, contexts);
  WriteFileAtomic(paths.word_pairs, pairs);
  WriteFileAtomic(paths.examples, ExamplesJsonl(corpus));
  return paths;
}

std::string CorpusDigest(const Corpus& corpus) {
  return Sha256Hex(ExamplesJsonl(corpus));
}

Corpus FixtureCorpus() {
  std::vector<Context> contexts = {
      {"C1", "There is no ___ here .", Monotonicity::kDown},
      {"C2", "Some ___ arrived .", Monotonicity::kUp},
      {"C3", "I saw a ___ yesterday .", Monotonicity::kUp},
      {"C4", "He refused to eat any ___ .", Monotonicity::kDown},
  };
  std::vector<WordPair> pairs = {
      {"W1", "dog", "animal", Relation::kSubsumed},
      {"W2", "animal", "dog", Relation::kSubsumes},
      {"W3", "poodle", "dog", Relation::kSubsumed},
      {"W4", "fruit", "apple", Relation::kSubsumes},
      {"W5", "car", "banana", Relation::kUnrelated},
      {"W6", "sugar", "brown sugar", Relation::kSubsumes},
  };
  return CorpusFromFactors(std::move(contexts), std::move(pairs));
}

// ---------------------------------------------------------------------------
// Import of externally formatted corpora.

namespace {

enum class Field {
  kContextId, kTemplate, kMonotonicity, kPairId, kFirst, kSecond, kRelation,
  kPremise, kHypothesis, kGold,
};

const std::map<std::string, Field>& HeadingAliases() {
  static const auto* aliases = new std::map<std::string, Field>{
      {"context_id", Field::kContextId}, {"context_idx", Field::kContextId},
      {"context_index", Field::kContextId}, {"ctx_id", Field::kContextId},
      {"template", Field::kTemplate}, {"context", Field::kTemplate},
      {"context_template", Field::kTemplate},
      {"monotonicity", Field::kMonotonicity},
      {"context_monotonicity", Field::kMonotonicity},
      {"mono", Field::kMonotonicity},
      {"pair_id", Field::kPairId}, {"word_pair_id", Field::kPairId},
      {"insertion_pair_id", Field::kPairId}, {"insertion_pair_idx", Field::kPairId},
      {"first", Field::kFirst}, {"x", Field::kFirst}, {"w1", Field::kFirst},
      {"word1", Field::kFirst}, {"term1", Field::kFirst},
      {"insertion_x", Field::kFirst}, {"premise_word", Field::kFirst},
      {"second", Field::kSecond}, {"y", Field::kSecond}, {"w2", Field::kSecond},
      {"word2", Field::kSecond}, {"term2", Field::kSecond},
      {"insertion_y", Field::kSecond}, {"hypothesis_word", Field::kSecond},
      {"relation", Field::kRelation}, {"rel", Field::kRelation},
      {"insertion_rel", Field::kRelation}, {"xy_relation", Field::kRelation},
      {"word_pair_relation", Field::kRelation},
      {"premise", Field::kPremise}, {"sentence1", Field::kPremise},
      {"hypothesis", Field::kHypothesis}, {"sentence2", Field::kHypothesis},
      {"gold", Field::kGold}, {"gold_label", Field::kGold},
      {"label", Field::kGold},
  };
  return *aliases;
}

std::optional<RawMonotonicity> ImportMonotonicity(const std::string& s) {
  const std::string v = Lower(Trim(s));
  if (v == "up" || v == "upward" || v == "\xE2\x86\x91") return RawMonotonicity::kUp;
  if (v == "down" || v == "downward" || v == "\xE2\x86\x93") return RawMonotonicity::kDown;
  if (v == "neither" || v == "non-monotone" || v == "nonmonotone") {
    return RawMonotonicity::kNeither;
  }
  return std::nullopt;
}

std::optional<Relation> ImportRelation(const std::string& s) {
  const std::string v = Lower(Trim(s));
  if (v == "sub" || v == "\xE2\x8A\x91" || v == "forward" || v == "hyponym" ||
      v == "subsumed") {
    return Relation::kSubsumed;
  }
  if (v == "sup" || v == "\xE2\x8A\x92" || v == "reverse" || v == "hypernym" ||
      v == "subsumes") {
    return Relation::kSubsumes;
  }
  if (v == "none" || v == "#" || v == "independent" || v == "unrelated") {
    return Relation::kUnrelated;
  }
  return std::nullopt;
}

std::optional<GoldLabel> ImportGold(const std::string& s) {
  const std::string v = Lower(Trim(s));
  if (v == "entailment" || v == "entail" || v == "1") return GoldLabel::kEntailment;
  if (v == "non-entailment" || v == "non_entailment" ||
      v == "not_entailment" || v == "neutral" || v == "contradiction" ||
      v == "0") {
    return GoldLabel::kNonEntailment;
  }
  return std::nullopt;
}

using ImportRow = std::map<Field, std::string>;

std::vector<std::pair<std::size_t, ImportRow>> ReadImportRows(
    const fs::path& path) {
  std::vector<std::pair<std::size_t, ImportRow>> rows;
  const auto lines = ReadLines(path);
  const std::string ext = Lower(path.extension().string());
  const auto& aliases = HeadingAliases();
  if (ext == ".jsonl" || ext == ".json") {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (IsBlank(lines[i])) continue;
      const auto j = ParseJsonLine(lines[i], path, i + 1);
      ImportRow row;
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto a = aliases.find(Lower(Trim(it.key())));
        if (a == aliases.end()) continue;
        if (it->is_string()) {
          row[a->second] = it->get<std::string>();
        } else if (it->is_number_integer()) {
          row[a->second] = std::to_string(it->get<long long>());
        } else if (!it->is_null()) {
          ThrowParse(path, i + 1, "unsupported value for \"" + it.key() + "\"");
        }
      }
      rows.emplace_back(i + 1, std::move(row));
    }
    return rows;
  }
  std::vector<std::optional<Field>> columns;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    const auto f = SplitTabs(lines[i]);
    if (!header_seen) {
      std::set<Field> mapped;
      for (const auto& h : f) {
        auto a = aliases.find(Lower(Trim(h)));
        if (a != aliases.end() && mapped.insert(a->second).second) {
          columns.emplace_back(a->second);
        } else {
          columns.emplace_back(std::nullopt);
        }
      }
      header_seen = true;
      continue;
    }
    if (f.size() != columns.size()) {
      ThrowParse(path, i + 1, "expected " + std::to_string(columns.size()) +
                                  " fields, got " + std::to_string(f.size()));
    }
    ImportRow row;
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (columns[k]) row[*columns[k]] = f[k];
    }
    rows.emplace_back(i + 1, std::move(row));
  }
  return rows;
}

}  // namespace

LoadedCorpus ImportCorpus(const fs::path& path, const ImportOptions& options) {
  const auto rows = ReadImportRows(path);
  for (Field required : {Field::kTemplate, Field::kMonotonicity, Field::kFirst,
                         Field::kSecond, Field::kRelation}) {
    for (const auto& [lineno, row] : rows) {
      if (!row.count(required)) {
        ThrowParse(path, lineno,
                   "row lacks a template, monotonicity, term or relation column");
      }
    }
  }

  Corpus corpus;
  LoadStats stats;
  std::map<std::string, std::pair<std::string, RawMonotonicity>> context_defs;
  std::map<std::string, std::tuple<std::string, std::string, Relation>> pair_defs;
  std::map<std::string, std::size_t> context_pos, pair_pos;
  std::set<std::string> neither;
  std::set<std::pair<std::string, std::string>> seen;

  for (const auto& [lineno, row] : rows) {
    const std::string& tmpl = row.at(Field::kTemplate);
    const auto mono = ImportMonotonicity(row.at(Field::kMonotonicity));
    if (!mono) ThrowParse(path, lineno, "bad monotonicity \"" + row.at(Field::kMonotonicity) + "\"");
    const auto rel = ImportRelation(row.at(Field::kRelation));
    if (!rel) ThrowParse(path, lineno, "bad relation \"" + row.at(Field::kRelation) + "\"");
    const std::string first = row.at(Field::kFirst);
    const std::string second = row.at(Field::kSecond);
    if (Trim(first).empty() || Trim(second).empty()) {
      ThrowParse(path, lineno, "empty term");
    }

    std::string cid = row.count(Field::kContextId) && !Trim(row.at(Field::kContextId)).empty()
                          ? Trim(row.at(Field::kContextId))
                          : "ctx-" + Sha256Hex(NormalizeWhitespace(tmpl)).substr(0, 12);
    std::string pid = row.count(Field::kPairId) && !Trim(row.at(Field::kPairId)).empty()
                          ? Trim(row.at(Field::kPairId))
                          : "wp-" + Sha256Hex(NormalizeWhitespace(first) + "|" +
                                              NormalizeWhitespace(second) + "|" +
                                              std::string(ToString(*rel)))
                                        .substr(0, 12);

    auto [cit, new_context] = context_defs.emplace(cid, std::make_pair(tmpl, *mono));
    if (!new_context && (cit->second.first != tmpl || cit->second.second != *mono)) {
      throw Error(ErrorCode::kDuplicateId, path.string() + ":" + std::to_string(lineno) +
                                               ": context_id " + cid +
                                               " redefined with different content");
    }
    if (new_context) {
      try {
        ValidateTemplate(tmpl);
      } catch (const Error& e) {
        throw Error(ErrorCode::kMalformedTemplate, "context " + cid + " (" + path.string() +
                                                       ":" + std::to_string(lineno) +
                                                       "): " + e.what());
      }
      if (*mono == RawMonotonicity::kNeither) {
        neither.insert(cid);
      } else {
        context_pos[cid] = corpus.contexts.size();
        corpus.contexts.push_back(Context{cid, tmpl,
                                          *mono == RawMonotonicity::kUp ? Monotonicity::kUp
                                                                        : Monotonicity::kDown});
      }
    }
    auto [pit, new_pair] = pair_defs.emplace(pid, std::make_tuple(first, second, *rel));
    if (!new_pair && pit->second != std::make_tuple(first, second, *rel)) {
      throw Error(ErrorCode::kDuplicateId, path.string() + ":" + std::to_string(lineno) +
                                               ": pair_id " + pid +
                                               " redefined with different content");
    }
    if (new_pair) {
      pair_pos[pid] = corpus.word_pairs.size();
      corpus.word_pairs.push_back(WordPair{pid, first, second, *rel});
    }

    if (neither.count(cid)) {
      ++stats.examples_excluded_neither;
      continue;
    }
    if (!seen.emplace(cid, pid).second) {
      ++stats.duplicate_rows_dropped;
      continue;
    }
    NLIExample ex = MakeExample(corpus.contexts[context_pos.at(cid)],
                                corpus.word_pairs[pair_pos.at(pid)]);
    if (row.count(Field::kPremise) &&
        NormalizeWhitespace(row.at(Field::kPremise)) != ex.premise) {
      ThrowParse(path, lineno, "premise disagrees with re-substitution: \"" +
                                   row.at(Field::kPremise) + "\" vs \"" + ex.premise + "\"");
    }
    if (row.count(Field::kHypothesis) &&
        NormalizeWhitespace(row.at(Field::kHypothesis)) != ex.hypothesis) {
      ThrowParse(path, lineno, "hypothesis disagrees with re-substitution: \"" +
                                   row.at(Field::kHypothesis) + "\" vs \"" +
                                   ex.hypothesis + "\"");
    }
    if (row.count(Field::kGold) && !Trim(row.at(Field::kGold)).empty()) {
      const auto gold = ImportGold(row.at(Field::kGold));
      if (!gold) ThrowParse(path, lineno, "bad gold label \"" + row.at(Field::kGold) + "\"");
      if (*gold != ex.gold) {
        ThrowParse(path, lineno, "gold label disagrees with monotonicity x relation");
      }
    }
    corpus.examples.push_back(std::move(ex));
  }

  if (options.cross_product) {
    corpus = CorpusFromFactors(std::move(corpus.contexts), std::move(corpus.word_pairs));
  }
  stats.contexts_loaded = corpus.contexts.size();
  stats.contexts_excluded_neither = neither.size();
  stats.word_pairs_loaded = corpus.word_pairs.size();
  stats.examples = corpus.examples.size();
  if (stats.duplicate_rows_dropped > 0) {
    LogWarning("dropped " + std::to_string(stats.duplicate_rows_dropped) +
               " duplicate example rows from " + path.string());
  }
  if (!neither.empty()) {
    LogWarning("excluded " + std::to_string(neither.size()) +
               " contexts with monotonicity \"neither\" (" +
               std::to_string(stats.examples_excluded_neither) + " rows)");
  }
  return LoadedCorpus{std::move(corpus), stats};
}

// ---------------------------------------------------------------------------
// Benchmark scores.

std::map<std::string, BenchmarkScores> LoadBenchmarkScores(const fs::path& path) {
  std::map<std::string, BenchmarkScores> out;
  const auto lines = ReadLines(path);
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (IsBlank(lines[i])) continue;
    if (!header_seen) {
      if (lines[i] != kBenchmarkHeader) {
        ThrowParse(path, lineno, "expected header \"model_id<TAB>benchmark<TAB>n_classes<TAB>accuracy\"");
      }
      header_seen = true;
      continue;
    }
    const auto f = SplitTabs(lines[i]);
    if (f.size() != 4) ThrowParse(path, lineno, "expected 4 fields");
    if (f[0].empty() || f[1].empty()) ThrowParse(path, lineno, "empty model_id or benchmark");
    int n_classes = 0;
    double accuracy = 0;
    try {
      std::size_t used = 0;
      n_classes = std::stoi(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("trailing");
      accuracy = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      ThrowParse(path, lineno, "bad n_classes or accuracy");
    }
    if (n_classes != 2 && n_classes != 3) ThrowParse(path, lineno, "n_classes must be 2 or 3");
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) ThrowParse(path, lineno, "accuracy outside [0, 1]");
    auto& scores = out[f[0]];
    scores.model_id = f[0];
    if (!scores.rows.emplace(BenchmarkKey{f[1], n_classes}, accuracy).second) {
      throw Error(ErrorCode::kDuplicateId, path.string() + ":" + std::to_string(lineno) +
                                               ": duplicate benchmark row");
    }
  }
  return out;
}

void WriteBenchmarkScores(const std::map<std::string, BenchmarkScores>& scores,
                          const fs::path& path) {
  std::ostringstream out;
  out << kBenchmarkHeader << '\n';
  for (const auto& [model, s] : scores) {
    for (const auto& [key, acc] : s.rows) {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof(buf), acc);  // shortest round-trip form
      out << model << '\t' << key.benchmark << '\t' << key.n_classes << '\t'
          << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
    }
  }
  WriteFileAtomic(path, out.str());
}

}  // namespace cnp
