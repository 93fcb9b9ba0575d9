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

#ifndef CNP_INTERVENTION_H_
#define CNP_INTERVENTION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cnp/corpus_io.h"
#include "cnp/natural_logic.h"

namespace cnp {

// The causal quantity an intervention set estimates.
enum class Target { kDceSc, kTceC, kDceSw, kTceW };

inline constexpr std::array<Target, 4> kAllTargets = {
    Target::kDceSc, Target::kTceC, Target::kDceSw, Target::kTceW};

// "DCE_SC", "TCE_C", "DCE_SW", "TCE_W".
std::string_view ToString(Target t);
// "dce-sc", "tce-c", "dce-sw", "tce-w" (CLI and file-name spelling).
std::string_view TargetSlug(Target t);
// Accepts either spelling, case-insensitively.
std::optional<Target> ParseTarget(std::string_view s);

inline bool IsTotalEffect(Target t) {
  return t == Target::kTceC || t == Target::kTceW;
}

enum class Variable { kC, kW, kM, kR, kG };
inline constexpr std::array<Variable, 5> kAllVariables = {
    Variable::kC, Variable::kW, Variable::kM, Variable::kR, Variable::kG};
std::string_view ToString(Variable v);

enum class Constraint { kMustEqual, kMustDiffer };

struct InterventionSchema {
  Target target = Target::kDceSc;
  // Indexed by Variable.
  std::array<Constraint, 5> constraints{};

  Constraint Of(Variable v) const {
    return constraints[static_cast<std::size_t>(v)];
  }
};

const InterventionSchema& BuiltinSchema(Target target);

// Empty when the schema is internally consistent: C= implies M=, W= implies
// R=, M= with R= implies G=, and G≠ needs M≠ or R≠.
std::vector<std::string> SchemaInconsistencies(const InterventionSchema& schema);

// Variables whose constraint fails between `before` and `after`. C compares
// context ids, W pair ids, M/R/G values.
std::vector<Variable> ViolatedConstraints(const InterventionSchema& schema,
                                          const NLIExample& before,
                                          const NLIExample& after);

bool PairSatisfies(const InterventionSchema& schema, const NLIExample& before,
                   const NLIExample& after);

struct InterventionPair {
  Target target = Target::kDceSc;
  NLIExample before;
  NLIExample after;

  friend bool operator==(const InterventionPair&,
                         const InterventionPair&) = default;
};

enum class SeedSampling {
  // Shuffle all example indices and take a prefix.
  kUniform,
  // Shuffle within each (monotonicity, relation) cell, then take seeds
  // round-robin over the cells in a fixed cell order.
  kStratified,
};

std::string_view ToString(SeedSampling s);
std::optional<SeedSampling> ParseSeedSampling(std::string_view s);

struct InterventionSet {
  Target target = Target::kDceSc;
  std::vector<InterventionPair> pairs;
  std::size_t seed_count = 0;  // as requested
  std::size_t seeds_drawn = 0;
  std::uint64_t rng_seed = 0;
  SeedSampling sampling = SeedSampling::kUniform;
  std::string corpus_digest;

  friend bool operator==(const InterventionSet&,
                         const InterventionSet&) = default;
};

inline constexpr std::size_t kDefaultSeedCount = 400;

// Indices into corpus.examples of the sampled seeds, in draw order. Prefix
// stable: a larger seed_count with the same rng_seed extends the list.
std::vector<std::size_t> SampleSeeds(const Corpus& corpus,
                                     std::size_t seed_count,
                                     std::uint64_t rng_seed,
                                     SeedSampling sampling);

struct BuildOptions {
  SeedSampling sampling = SeedSampling::kUniform;
  std::size_t max_workers = 0;  // 0 = hardware concurrency
};

// Samples min(seed_count, |examples|) seeds and pairs each with every corpus
// example satisfying the schema. Output is deduplicated and sorted by
// (before.example_id, after.example_id). An empty result is logged as a
// warning, not an error.
InterventionSet BuildInterventionSet(const Corpus& corpus,
                                     const InterventionSchema& schema,
                                     std::size_t seed_count,
                                     std::uint64_t rng_seed,
                                     const BuildOptions& options = {});

enum class ViolationKind { kSchema, kMembership, kDuplicate, kTargetMismatch };
std::string_view ToString(ViolationKind k);

struct Violation {
  std::size_t pair_index = 0;
  ViolationKind kind = ViolationKind::kSchema;
  std::optional<Variable> variable;
  std::string message;
};

std::vector<Violation> ValidateSet(const InterventionSet& set,
                                   const Corpus& corpus);

// JSON Lines: a header object, then one {target, before_example_id,
// after_example_id} object per pair.
std::string SerializeInterventionSet(const InterventionSet& set);
void WriteInterventionSet(const InterventionSet& set,
                          const std::filesystem::path& path);
// Resolves example ids against `corpus`; throws kUnknownReference for ids the
// corpus lacks and kInvalidArgument when the header digest differs.
InterventionSet ReadInterventionSet(const std::filesystem::path& path,
                                    const Corpus& corpus);

}  // namespace cnp

#endif  // CNP_INTERVENTION_H_
