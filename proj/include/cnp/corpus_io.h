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

#ifndef CNP_CORPUS_IO_H_
#define CNP_CORPUS_IO_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cnp/natural_logic.h"

namespace cnp {

struct Corpus {
  std::vector<Context> contexts;
  std::vector<WordPair> word_pairs;
  std::vector<NLIExample> examples;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct LoadStats {
  std::size_t contexts_loaded = 0;
  std::size_t contexts_excluded_neither = 0;
  std::size_t word_pairs_loaded = 0;
  std::size_t examples = 0;
  std::size_t examples_excluded_neither = 0;
  std::size_t duplicate_rows_dropped = 0;
};

struct LoadedCorpus {
  Corpus corpus;
  LoadStats stats;
};

// Full cross product, contexts outer and word pairs inner.
Corpus CorpusFromFactors(std::vector<Context> contexts,
                         std::vector<WordPair> word_pairs);

// Checks id uniqueness, reference resolution, duplicate examples and that
// every example re-derives from its factors. Throws on the first problem.
void ValidateCorpus(const Corpus& corpus);

// example_id -> position in corpus.examples.
std::unordered_map<std::string, std::size_t> IndexExamples(
    const Corpus& corpus);

// Reads the canonical contexts/word-pairs TSV files. When `examples_path` is
// given the example list comes from that JSON Lines file (each row checked
// against re-substitution); otherwise it is the full cross product.
// Contexts annotated "neither" are excluded, together with their examples.
LoadedCorpus LoadCorpus(
    const std::filesystem::path& contexts_path,
    const std::filesystem::path& word_pairs_path,
    const std::optional<std::filesystem::path>& examples_path = std::nullopt);

// Loads <dir>/contexts.tsv and <dir>/word_pairs.tsv, plus
// <dir>/examples.jsonl when present.
LoadedCorpus LoadCorpusDir(const std::filesystem::path& dir);

struct CorpusPaths {
  std::filesystem::path contexts;
  std::filesystem::path word_pairs;
  std::filesystem::path examples;
};

CorpusPaths WriteCorpus(const Corpus& corpus, const std::filesystem::path& dir);

struct ImportOptions {
  // Replace the imported example rows with the full factor cross product.
  bool cross_product = false;
};

// Reads an externally formatted corpus (TSV with a header row, or JSON Lines
// for .jsonl/.json) where each row is one example. Common column headings
// are mapped onto the canonical fields; rows may be factored (template plus
// terms) or pre-substituted (premise/hypothesis also present, in which case
// they are validated against re-substitution).
LoadedCorpus ImportCorpus(const std::filesystem::path& path,
                          const ImportOptions& options = {});

// Hex sha256 over the canonical examples serialization.
std::string CorpusDigest(const Corpus& corpus);

// 4 contexts x 6 word pairs covering every (monotonicity, relation) cell.
Corpus FixtureCorpus();

struct BenchmarkKey {
  std::string benchmark;
  int n_classes = 2;

  friend auto operator<=>(const BenchmarkKey&, const BenchmarkKey&) = default;
};

struct BenchmarkScores {
  std::string model_id;
  std::map<BenchmarkKey, double> rows;

  friend bool operator==(const BenchmarkScores&,
                         const BenchmarkScores&) = default;
};

// model_id -> scores. TSV with header model_id, benchmark, n_classes,
// accuracy. Accuracies must lie in [0, 1] and n_classes in {2, 3}.
std::map<std::string, BenchmarkScores> LoadBenchmarkScores(
    const std::filesystem::path& path);

void WriteBenchmarkScores(const std::map<std::string, BenchmarkScores>& scores,
                          const std::filesystem::path& path);

// Helpers shared with other artifact writers.
std::vector<std::string> ReadLines(const std::filesystem::path& path);
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& contents);

}  // namespace cnp

#endif  // CNP_CORPUS_IO_H_
