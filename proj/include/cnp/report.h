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

#ifndef CNP_REPORT_H_
#define CNP_REPORT_H_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cnp/corpus_io.h"
#include "cnp/effects.h"

namespace cnp {

enum class QualitativeBin { kLowest, kLow, kMid, kHigh, kHighest };

enum class Category {
  kContextRobustness,   // inverse order of DCE_SC
  kContextSensitivity,  // order of TCE_C
  kWordRobustness,      // inverse order of DCE_SW
  kWordSensitivity,     // order of TCE_W
};

inline constexpr std::array<Category, 4> kAllCategories = {
    Category::kContextRobustness, Category::kContextSensitivity,
    Category::kWordRobustness, Category::kWordSensitivity};

std::string_view ToString(QualitativeBin b);  // "Lowest" ... "Highest"
std::string_view ToString(Category c);        // "context_robustness", ...
Target CategoryTarget(Category c);

struct BinAssignment {
  QualitativeBin bin = QualitativeBin::kMid;
  bool tie = false;  // statistic equals another model's; order fell back to model_id

  friend bool operator==(const BinAssignment&, const BinAssignment&) = default;
};

// Models are ranked from worst to best for the category (equal statistics
// ordered by model_id), the ends become Lowest/Highest and the interior is
// cut into rank terciles Low/Mid/High. Throws kCohortTooSmall for fewer than
// two profiles and kMissingTarget when a profile lacks the needed estimate.
std::map<std::string, BinAssignment> BinModels(std::span<const EffectProfile> profiles,
                                               Category category);

enum class ReportFormat { kTsv, kMarkdown, kJson };
std::string_view ToString(ReportFormat f);
std::optional<ReportFormat> ParseReportFormat(std::string_view s);

// One row per model in model_id order: benchmark accuracies (when given),
// the four bins (when the cohort allows binning), then raw effects, ratios
// and deltas to 3 decimals. JSON output is an array of profile objects with
// extra "bins" and "benchmarks" keys.
std::string RenderReport(std::span<const EffectProfile> profiles,
                         const std::map<std::string, BenchmarkScores>* benchmarks,
                         ReportFormat format);

}  // namespace cnp

#endif  // CNP_REPORT_H_
