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

#include "cnp/report.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <vector>

#include "cnp/error.h"

namespace cnp {
namespace {

using ordered_json = nlohmann::ordered_json;

bool IsRobustness(Category c) {
  return c == Category::kContextRobustness || c == Category::kWordRobustness;
}

std::string Fixed3(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *v);
  // Avoid "-0.000".
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

std::string BenchmarkColumn(const BenchmarkKey& key) {
  return key.benchmark + " (" + std::to_string(key.n_classes) + "-class)";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  bool any_tie = false;
};

}  // namespace

std::string_view ToString(QualitativeBin b) {
  switch (b) {
    case QualitativeBin::kLowest: return "Lowest";
    case QualitativeBin::kLow: return "Low";
    case QualitativeBin::kMid: return "Mid";
    case QualitativeBin::kHigh: return "High";
    case QualitativeBin::kHighest: return "Highest";
  }
  return "";
}

std::string_view ToString(Category c) {
  switch (c) {
    case Category::kContextRobustness: return "context_robustness";
    case Category::kContextSensitivity: return "context_sensitivity";
    case Category::kWordRobustness: return "word_robustness";
    case Category::kWordSensitivity: return "word_sensitivity";
  }
  return "";
}

Target CategoryTarget(Category c) {
  switch (c) {
    case Category::kContextRobustness: return Target::kDceSc;
    case Category::kContextSensitivity: return Target::kTceC;
    case Category::kWordRobustness: return Target::kDceSw;
    case Category::kWordSensitivity: return Target::kTceW;
  }
  return Target::kDceSc;
}

std::string_view ToString(ReportFormat f) {
  switch (f) {
    case ReportFormat::kTsv: return "tsv";
    case ReportFormat::kMarkdown: return "md";
    case ReportFormat::kJson: return "json";
  }
  return "";
}

std::optional<ReportFormat> ParseReportFormat(std::string_view s) {
  if (s == "tsv") return ReportFormat::kTsv;
  if (s == "md") return ReportFormat::kMarkdown;
  if (s == "json") return ReportFormat::kJson;
  return std::nullopt;
}

std::map<std::string, BinAssignment> BinModels(std::span<const EffectProfile> profiles,
                                               Category category) {
  if (profiles.size() < 2) {
    throw Error(ErrorCode::kCohortTooSmall, "binning needs at least two models, got " +
                                                std::to_string(profiles.size()));
  }
  const Target target = CategoryTarget(category);
  struct Entry {
    std::string model_id;
    double stat;
  };
  std::vector<Entry> entries;
  for (const auto& p : profiles) {
    auto it = p.estimates.find(target);
    if (it == p.estimates.end()) {
      throw Error(ErrorCode::kMissingTarget, "profile " + p.model_id + " lacks " +
                                                 std::string(ToString(target)));
    }
    entries.push_back({p.model_id, it->second.value});
  }
  const bool inverted = IsRobustness(category);
  std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
    if (a.stat != b.stat) return inverted ? a.stat > b.stat : a.stat < b.stat;
    return a.model_id < b.model_id;
  });

  std::map<std::string, BinAssignment> out;
  const std::size_t n = entries.size();
  const std::size_t interior = n - 2;
  for (std::size_t i = 0; i < n; ++i) {
    BinAssignment a;
    if (i == 0) {
      a.bin = QualitativeBin::kLowest;
    } else if (i == n - 1) {
      a.bin = QualitativeBin::kHighest;
    } else {
      const std::size_t tercile = 3 * (i - 1) / interior;
      a.bin = tercile == 0 ? QualitativeBin::kLow
              : tercile == 1 ? QualitativeBin::kMid
                             : QualitativeBin::kHigh;
    }
    a.tie = (i > 0 && entries[i - 1].stat == entries[i].stat) ||
            (i + 1 < n && entries[i + 1].stat == entries[i].stat);
    if (!out.emplace(entries[i].model_id, a).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate model_id " + entries[i].model_id);
    }
  }
  return out;
}

std::string RenderReport(std::span<const EffectProfile> input,
                         const std::map<std::string, BenchmarkScores>* benchmarks,
                         ReportFormat format) {
  std::vector<EffectProfile> profiles(input.begin(), input.end());
  std::sort(profiles.begin(), profiles.end(),
            [](const EffectProfile& a, const EffectProfile& b) { return a.model_id < b.model_id; });

  std::map<Category, std::map<std::string, BinAssignment>> bins;
  for (Category c : kAllCategories) {
    try {
      bins[c] = BinModels(profiles, c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCohortTooSmall && e.code() != ErrorCode::kMissingTarget) throw;
    }
  }

  std::set<BenchmarkKey> bench_columns;
  if (benchmarks) {
    for (const auto& p : profiles) {
      if (auto it = benchmarks->find(p.model_id); it != benchmarks->end()) {
        for (const auto& [key, acc] : it->second.rows) bench_columns.insert(key);
      }
    }
  }
  auto accuracy = [&](const std::string& model, const BenchmarkKey& key) -> std::optional<double> {
    auto it = benchmarks->find(model);
    if (it == benchmarks->end()) return std::nullopt;
    auto row = it->second.rows.find(key);
    if (row == it->second.rows.end()) return std::nullopt;
    return row->second;
  };
  auto value = [](const EffectProfile& p, Target t) -> std::optional<double> {
    auto it = p.estimates.find(t);
    if (it == p.estimates.end()) return std::nullopt;
    return it->second.value;
  };

  if (format == ReportFormat::kJson) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : profiles) {
      ordered_json j = ProfileToJson(p);
      if (bins.empty()) {
        j["bins"] = nullptr;
      } else {
        ordered_json jb = ordered_json::object();
        for (const auto& [c, assignment] : bins) {
          const BinAssignment& a = assignment.at(p.model_id);
          jb[std::string(ToString(c))] = {{"bin", ToString(a.bin)}, {"tie", a.tie}};
        }
        j["bins"] = std::move(jb);
      }
      if (benchmarks) {
        ordered_json jbench = ordered_json::array();
        for (const auto& key : bench_columns) {
          if (auto acc = accuracy(p.model_id, key)) {
            jbench.push_back(
                {{"benchmark", key.benchmark}, {"n_classes", key.n_classes}, {"accuracy", *acc}});
          }
        }
        j["benchmarks"] = std::move(jbench);
      }
      arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
  }

  Table table;
  table.header.push_back("model_id");
  for (const auto& key : bench_columns) table.header.push_back(BenchmarkColumn(key));
  for (const auto& [c, unused] : bins) table.header.emplace_back(ToString(c));
  for (const char* h : {"DCE_SC", "TCE_C", "ratio_context", "delta_context", "DCE_SW", "TCE_W",
                        "ratio_word", "delta_word"}) {
    table.header.emplace_back(h);
  }
  for (const auto& p : profiles) {
    std::vector<std::string> row{p.model_id};
    for (const auto& key : bench_columns) row.push_back(Fixed3(accuracy(p.model_id, key)));
    for (const auto& [c, assignment] : bins) {
      const BinAssignment& a = assignment.at(p.model_id);
      row.push_back(std::string(ToString(a.bin)) + (a.tie ? "*" : ""));
      table.any_tie = table.any_tie || a.tie;
    }
    row.push_back(Fixed3(value(p, Target::kDceSc)));
    row.push_back(Fixed3(value(p, Target::kTceC)));
    row.push_back(Fixed3(p.ratio_context));
    row.push_back(Fixed3(p.delta_context));
    row.push_back(Fixed3(value(p, Target::kDceSw)));
    row.push_back(Fixed3(value(p, Target::kTceW)));
    row.push_back(Fixed3(p.ratio_word));
    row.push_back(Fixed3(p.delta_word));
    table.rows.push_back(std::move(row));
  }

  std::string out;
  auto join = [](const std::vector<std::string>& cells, std::string_view sep) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += sep;
      line += cells[i];
    }
    return line;
  };
  if (format == ReportFormat::kTsv) {
    out += join(table.header, "\t") + "\n";
    for (const auto& row : table.rows) out += join(row, "\t") + "\n";
    return out;
  }
  out += "| " + join(table.header, " | ") + " |\n";
  out += "|";
  for (std::size_t i = 0; i < table.header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
  out += "\n";
  for (const auto& row : table.rows) out += "| " + join(row, " | ") + " |\n";
  if (table.any_tie) out += "\n\\* tied statistic; order between tied models follows model_id.\n";
  return out;
}

}  // namespace cnp
