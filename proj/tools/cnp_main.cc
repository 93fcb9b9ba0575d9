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

// Command-line entry point: `cnp <stage> [options]`.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cnp/error.h"
#include "cnp/pipeline.h"
#include "json.hpp"

namespace {

struct FlagValues {
  std::map<std::string, std::string> scalars;
  std::vector<std::string> sources;
  std::string config_path;
  bool force = false;
  bool fixture = false;
  bool import_cross_product = false;
  std::map<std::string, CLI::Option*> given;
};

const char* const kScalarFlags[][2] = {
    {"corpus-dir", "Directory holding contexts.tsv and word_pairs.tsv"},
    {"import", "External TSV/JSONL corpus to import"},
    {"target", "dce-sc, tce-c, dce-sw, tce-w or all (comma-separated)"},
    {"seed-count", "Number of seed examples per target"},
    {"rng-seed", "Sampler and bootstrap seed"},
    {"sampling", "uniform or stratified seed sampling"},
    {"metric", "flip or prob-shift"},
    {"averaging", "per-pair or per-seed"},
    {"bootstrap", "Bootstrap replicates (0 disables intervals)"},
    {"scheme", "Label scheme: auto, a preset name or label=entailment,..."},
    {"batch-size", "Examples per service request"},
    {"max-in-flight", "Concurrent service requests"},
    {"cache-dir", "Prediction cache directory"},
    {"benchmarks", "Benchmark score TSV for the report"},
    {"format", "Report format: tsv, md or json"},
    {"out", "Output directory"},
};

void AddRunOptions(CLI::App* cmd, FlagValues& v) {
  cmd->add_option("--config", v.config_path, "Settings file of key = value lines");
  for (const auto& [name, help] : kScalarFlags) {
    v.given[name] = cmd->add_option(std::string("--") + name, v.scalars[name], help);
  }
  v.given["source"] = cmd->add_option("--source", v.sources,
                                      "Prediction source: file:<path>, synthetic:<name>[:seed] "
                                      "or service:http://host:port (repeatable)");
  v.given["force"] = cmd->add_flag("--force", v.force, "Recompute every stage artifact");
  v.given["fixture"] = cmd->add_flag("--fixture", v.fixture, "Use the built-in 4x6 fixture corpus");
  v.given["import-cross-product"] = cmd->add_flag(
      "--import-cross-product", v.import_cross_product, "Cross the imported factors");
}

cnp::RunConfig ResolveConfig(const FlagValues& v) {
  cnp::RunConfig config;
  if (!v.config_path.empty()) cnp::ApplyConfigFile(config, v.config_path);
  for (const auto& [name, help] : kScalarFlags) {
    if (v.given.at(name)->count() > 0) cnp::ApplyConfigSetting(config, name, v.scalars.at(name));
  }
  if (v.given.at("source")->count() > 0) {
    config.sources.clear();
    for (const auto& s : v.sources) cnp::ApplyConfigSetting(config, "source", s);
  }
  if (v.force) config.force = true;
  if (v.fixture) config.use_fixture = true;
  if (v.import_cross_product) config.import_cross_product = true;
  return config;
}

void PrintError(const std::string& stage, const std::string& code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"stage", stage}, {"code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal natural-logic probing of NLI models"};
  app.require_subcommand(1);
  std::map<std::string, FlagValues> flags;  // per subcommand

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"ingest", "Load or import a corpus and write the canonical examples"},
      {"build-interventions", "Sample intervention pairs for each target"},
      {"predict", "Collect model predictions for every example"},
      {"estimate", "Estimate causal effects with bootstrap intervals"},
      {"report", "Render the behavioural profile report"},
      {"run", "Run every stage in order"},
      {"synth-eval", "Check the synthetic models' analytic identities"},
  };
  std::map<std::string, CLI::App*> commands;
  for (const auto& [name, help] : stages) {
    commands[name] = app.add_subcommand(name, help);
    AddRunOptions(commands[name], flags[name]);
  }

  CLI11_PARSE(app, argc, argv);

  std::string stage = "config";
  try {
    std::string chosen;
    for (const auto& [name, cmd] : commands) {
      if (cmd->parsed()) chosen = name;
    }
    cnp::RunConfig config = ResolveConfig(flags.at(chosen));

    if (chosen == "synth-eval") {
      stage = "synth-eval";
      if (!config.corpus_dir && !config.import_path) config.use_fixture = true;
      cnp::ValidateConfig(config, false);
      cnp::Corpus corpus = config.use_fixture ? cnp::FixtureCorpus()
                           : config.corpus_dir
                               ? cnp::LoadCorpusDir(*config.corpus_dir).corpus
                               : cnp::ImportCorpus(*config.import_path,
                                                   {config.import_cross_product})
                                     .corpus;
      int failures = 0;
      for (const auto& check : cnp::RunSyntheticEval(corpus)) {
        std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << " (" << check.detail
                  << ")\n";
        failures += check.passed ? 0 : 1;
      }
      return failures == 0 ? 0 : 1;
    }

    const bool needs_sources = chosen == "predict" || chosen == "estimate" || chosen == "run";
    const bool needs_corpus = chosen == "ingest" || chosen == "run";
    // Later stages read the ingested corpus under --out.
    cnp::ValidateConfig(config, needs_sources, needs_corpus);
    cnp::Pipeline pipeline(config, std::cerr);
    if (chosen == "ingest") {
      pipeline.Ingest();
    } else if (chosen == "build-interventions") {
      pipeline.BuildInterventions();
    } else if (chosen == "predict") {
      pipeline.Predict();
    } else if (chosen == "estimate") {
      pipeline.Estimate();
    } else if (chosen == "report") {
      std::cout << pipeline.Report();
    } else if (chosen == "run") {
      pipeline.Run();
    }
  } catch (const cnp::StageError& e) {
    PrintError(e.stage(), std::string(cnp::ErrorCodeName(e.code())), e.what());
    return 1;
  } catch (const cnp::Error& e) {
    PrintError(stage, std::string(cnp::ErrorCodeName(e.code())), e.what());
    return 1;
  } catch (const std::exception& e) {
    PrintError(stage, "Internal", e.what());
    return 1;
  }
  return 0;
}
