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

#include "cnp/intervention.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>

#include "cnp/error.h"
#include "cnp/logging.h"
#include "cnp/parallel.h"
#include "cnp/rng.h"
#include "json.hpp"

namespace cnp {
namespace {

constexpr Constraint kEq = Constraint::kMustEqual;
constexpr Constraint kNe = Constraint::kMustDiffer;

bool Holds(Constraint c, bool equal) {
  return c == Constraint::kMustEqual ? equal : !equal;
}

bool VariableEqual(Variable v, const NLIExample& a, const NLIExample& b) {
  switch (v) {
    case Variable::kC: return a.context_id == b.context_id;
    case Variable::kW: return a.word_pair_id == b.word_pair_id;
    case Variable::kM: return a.monotonicity == b.monotonicity;
    case Variable::kR: return a.relation == b.relation;
    case Variable::kG: return a.gold == b.gold;
  }
  return false;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool PairLess(const InterventionPair& a, const InterventionPair& b) {
  if (a.before.example_id != b.before.example_id) {
    return a.before.example_id < b.before.example_id;
  }
  return a.after.example_id < b.after.example_id;
}

}  // namespace

std::string_view ToString(Target t) {
  switch (t) {
    case Target::kDceSc: return "DCE_SC";
    case Target::kTceC: return "TCE_C";
    case Target::kDceSw: return "DCE_SW";
    case Target::kTceW: return "TCE_W";
  }
  return "";
}

std::string_view TargetSlug(Target t) {
  switch (t) {
    case Target::kDceSc: return "dce-sc";
    case Target::kTceC: return "tce-c";
    case Target::kDceSw: return "dce-sw";
    case Target::kTceW: return "tce-w";
  }
  return "";
}

std::optional<Target> ParseTarget(std::string_view s) {
  const std::string v = Lower(s);
  for (Target t : kAllTargets) {
    if (v == TargetSlug(t) || v == Lower(ToString(t))) return t;
  }
  return std::nullopt;
}

std::string_view ToString(Variable v) {
  switch (v) {
    case Variable::kC: return "C";
    case Variable::kW: return "W";
    case Variable::kM: return "M";
    case Variable::kR: return "R";
    case Variable::kG: return "G";
  }
  return "";
}

std::string_view ToString(SeedSampling s) {
  return s == SeedSampling::kUniform ? "uniform" : "stratified";
}

std::optional<SeedSampling> ParseSeedSampling(std::string_view s) {
  if (s == "uniform") return SeedSampling::kUniform;
  if (s == "stratified") return SeedSampling::kStratified;
  return std::nullopt;
}

std::string_view ToString(ViolationKind k) {
  switch (k) {
    case ViolationKind::kSchema: return "schema";
    case ViolationKind::kMembership: return "membership";
    case ViolationKind::kDuplicate: return "duplicate";
    case ViolationKind::kTargetMismatch: return "target";
  }
  return "";
}

const InterventionSchema& BuiltinSchema(Target target) {
  //                                              C    W    M    R    G
  static const InterventionSchema kDceSc{Target::kDceSc, {kNe, kEq, kEq, kEq, kEq}};
  static const InterventionSchema kTceC{Target::kTceC, {kNe, kEq, kNe, kEq, kNe}};
  static const InterventionSchema kDceSw{Target::kDceSw, {kEq, kNe, kEq, kEq, kEq}};
  static const InterventionSchema kTceW{Target::kTceW, {kEq, kNe, kEq, kNe, kNe}};
  switch (target) {
    case Target::kDceSc: return kDceSc;
    case Target::kTceC: return kTceC;
    case Target::kDceSw: return kDceSw;
    case Target::kTceW: return kTceW;
  }
  return kDceSc;
}

std::vector<std::string> SchemaInconsistencies(const InterventionSchema& s) {
  std::vector<std::string> problems;
  if (s.Of(Variable::kC) == kEq && s.Of(Variable::kM) != kEq) {
    problems.push_back("C= requires M= (monotonicity is a function of the context)");
  }
  if (s.Of(Variable::kW) == kEq && s.Of(Variable::kR) != kEq) {
    problems.push_back("W= requires R= (relation is a function of the word pair)");
  }
  const bool mr_fixed = s.Of(Variable::kM) == kEq && s.Of(Variable::kR) == kEq;
  if (mr_fixed && s.Of(Variable::kG) != kEq) {
    problems.push_back("M= and R= force G=");
  }
  // Some (M, R) -> (M', R') transition allowed by the M/R constraints must
  // realize the G constraint, otherwise the schema is unsatisfiable.
  bool satisfiable = false;
  for (Monotonicity m1 : kAllMonotonicities) {
    for (Monotonicity m2 : kAllMonotonicities) {
      if (!Holds(s.Of(Variable::kM), m1 == m2)) continue;
      for (Relation r1 : kAllRelations) {
        for (Relation r2 : kAllRelations) {
          if (!Holds(s.Of(Variable::kR), r1 == r2)) continue;
          if (Holds(s.Of(Variable::kG), GoldLabelFor(m1, r1) == GoldLabelFor(m2, r2))) {
            satisfiable = true;
          }
        }
      }
    }
  }
  if (!satisfiable) problems.push_back("G constraint unreachable under the M/R constraints");
  return problems;
}

std::vector<Variable> ViolatedConstraints(const InterventionSchema& schema,
                                          const NLIExample& before,
                                          const NLIExample& after) {
  std::vector<Variable> violated;
  for (Variable v : kAllVariables) {
    if (!Holds(schema.Of(v), VariableEqual(v, before, after))) violated.push_back(v);
  }
  return violated;
}

bool PairSatisfies(const InterventionSchema& schema, const NLIExample& before,
                   const NLIExample& after) {
  for (Variable v : kAllVariables) {
    if (!Holds(schema.Of(v), VariableEqual(v, before, after))) return false;
  }
  return true;
}

std::vector<std::size_t> SampleSeeds(const Corpus& corpus, std::size_t seed_count,
                                     std::uint64_t rng_seed, SeedSampling sampling) {
  const std::size_t n = corpus.examples.size();
  const std::size_t k = std::min(seed_count, n);
  if (sampling == SeedSampling::kUniform) return ShuffledPrefix(n, k, rng_seed);

  // Cells in fixed (M, R) order; each shuffled with its own derived stream.
  std::vector<std::vector<std::size_t>> cells;
  for (Monotonicity m : kAllMonotonicities) {
    for (Relation r : kAllRelations) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (corpus.examples[i].monotonicity == m && corpus.examples[i].relation == r) {
          members.push_back(i);
        }
      }
      const std::uint64_t cell_seed = SplitMix64(rng_seed ^ SplitMix64(cells.size() + 1));
      const auto order = ShuffledPrefix(members.size(), members.size(), cell_seed);
      std::vector<std::size_t> shuffled;
      shuffled.reserve(order.size());
      for (std::size_t o : order) shuffled.push_back(members[o]);
      cells.push_back(std::move(shuffled));
    }
  }
  std::vector<std::size_t> seeds;
  seeds.reserve(k);
  for (std::size_t round = 0; seeds.size() < k; ++round) {
    for (const auto& cell : cells) {
      if (round < cell.size() && seeds.size() < k) seeds.push_back(cell[round]);
    }
  }
  return seeds;
}

InterventionSet BuildInterventionSet(const Corpus& corpus,
                                     const InterventionSchema& schema,
                                     std::size_t seed_count, std::uint64_t rng_seed,
                                     const BuildOptions& options) {
  if (corpus.examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot build interventions from an empty corpus");
  }
  if (seed_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "seed_count must be at least 1");
  }
  if (auto problems = SchemaInconsistencies(schema); !problems.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent schema: " + problems.front());
  }

  const auto seeds = SampleSeeds(corpus, seed_count, rng_seed, options.sampling);

  // Candidate partners share whichever of C or W the schema holds fixed.
  std::unordered_map<std::string, std::vector<std::size_t>> by_context, by_pair;
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    by_context[corpus.examples[i].context_id].push_back(i);
    by_pair[corpus.examples[i].word_pair_id].push_back(i);
  }
  std::vector<std::size_t> all(corpus.examples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::vector<std::vector<std::size_t>> partners(seeds.size());
  ParallelFor(
      seeds.size(),
      [&](std::size_t s) {
        const NLIExample& seed = corpus.examples[seeds[s]];
        const std::vector<std::size_t>* candidates = &all;
        if (schema.Of(Variable::kW) == kEq) {
          candidates = &by_pair.at(seed.word_pair_id);
        } else if (schema.Of(Variable::kC) == kEq) {
          candidates = &by_context.at(seed.context_id);
        }
        for (std::size_t j : *candidates) {
          if (PairSatisfies(schema, seed, corpus.examples[j])) partners[s].push_back(j);
        }
      },
      options.max_workers);

  InterventionSet set;
  set.target = schema.target;
  set.seed_count = seed_count;
  set.seeds_drawn = seeds.size();
  set.rng_seed = rng_seed;
  set.sampling = options.sampling;
  set.corpus_digest = CorpusDigest(corpus);

  std::set<std::pair<std::size_t, std::size_t>> unique;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (std::size_t j : partners[s]) unique.emplace(seeds[s], j);
  }
  set.pairs.reserve(unique.size());
  for (const auto& [b, a] : unique) {
    set.pairs.push_back(InterventionPair{schema.target, corpus.examples[b], corpus.examples[a]});
  }
  std::sort(set.pairs.begin(), set.pairs.end(), PairLess);

  if (set.pairs.empty()) {
    LogWarning(std::string("EmptyResult: no pair satisfies the ") +
               std::string(ToString(schema.target)) + " schema");
  }
  return set;
}

std::vector<Violation> ValidateSet(const InterventionSet& set, const Corpus& corpus) {
  std::vector<Violation> out;
  const auto index = IndexExamples(corpus);
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    const InterventionPair& p = set.pairs[i];
    if (p.target != set.target) {
      out.push_back({i, ViolationKind::kTargetMismatch, std::nullopt,
                     "pair target " + std::string(ToString(p.target)) +
                         " differs from set target " + std::string(ToString(set.target))});
    }
    for (const NLIExample* ex : {&p.before, &p.after}) {
      if (!index.count(ex->example_id)) {
        out.push_back({i, ViolationKind::kMembership, std::nullopt,
                       "example " + ex->example_id + " is not in the corpus"});
      }
    }
    for (Variable v : ViolatedConstraints(BuiltinSchema(p.target), p.before, p.after)) {
      out.push_back({i, ViolationKind::kSchema, v,
                     std::string(ToString(v)) + " constraint violated"});
    }
    if (!seen.emplace(p.before.example_id, p.after.example_id).second) {
      out.push_back({i, ViolationKind::kDuplicate, std::nullopt,
                     "duplicate pair " + p.before.example_id + " -> " + p.after.example_id});
    }
  }
  return out;
}

std::string SerializeInterventionSet(const InterventionSet& set) {
  nlohmann::ordered_json header;
  header["target"] = ToString(set.target);
  header["seed_count"] = set.seed_count;
  header["rng_seed"] = set.rng_seed;
  header["corpus_digest"] = set.corpus_digest;
  header["seeds_drawn"] = set.seeds_drawn;
  header["sampling"] = ToString(set.sampling);
  header["sampler"] = kSamplerAlgorithm;
  header["n_pairs"] = set.pairs.size();
  std::string out = header.dump();
  out.push_back('\n');
  for (const auto& p : set.pairs) {
    nlohmann::ordered_json row;
    row["target"] = ToString(p.target);
    row["before_example_id"] = p.before.example_id;
    row["after_example_id"] = p.after.example_id;
    out += row.dump();
    out.push_back('\n');
  }
  return out;
}

void WriteInterventionSet(const InterventionSet& set, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeInterventionSet(set));
}

InterventionSet ReadInterventionSet(const std::filesystem::path& path, const Corpus& corpus) {
  const auto lines = ReadLines(path);
  const auto index = IndexExamples(corpus);
  InterventionSet set;
  bool header_seen = false;
  auto fail = [&](std::size_t lineno, const std::string& what) -> Error {
    return Error(ErrorCode::kParseError,
                 path.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (lines[i].empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(lineno, e.what());
    }
    try {
      const auto target = ParseTarget(j.at("target").get<std::string>());
      if (!target) throw fail(lineno, "unknown target");
      if (!header_seen) {
        set.target = *target;
        set.seed_count = j.at("seed_count").get<std::size_t>();
        set.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        set.corpus_digest = j.at("corpus_digest").get<std::string>();
        set.seeds_drawn = j.value("seeds_drawn", std::size_t{0});
        const auto sampling = ParseSeedSampling(j.value("sampling", std::string("uniform")));
        if (!sampling) throw fail(lineno, "unknown sampling mode");
        set.sampling = *sampling;
        header_seen = true;
        if (set.corpus_digest != CorpusDigest(corpus)) {
          throw Error(ErrorCode::kInvalidArgument,
                      path.string() + ": intervention set was built from a different corpus");
        }
        continue;
      }
      const std::string before = j.at("before_example_id").get<std::string>();
      const std::string after = j.at("after_example_id").get<std::string>();
      auto b = index.find(before);
      auto a = index.find(after);
      if (b == index.end() || a == index.end()) {
        throw Error(ErrorCode::kUnknownReference,
                    path.string() + ":" + std::to_string(lineno) + ": unknown example id " +
                        (b == index.end() ? before : after));
      }
      set.pairs.push_back(
          InterventionPair{*target, corpus.examples[b->second], corpus.examples[a->second]});
    } catch (const nlohmann::json::exception& e) {
      throw fail(lineno, e.what());
    }
  }
  if (!header_seen) throw fail(1, "missing header line");
  return set;
}

}  // namespace cnp
