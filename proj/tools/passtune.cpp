//===-- passtune.cpp - Command-line driver --------------------------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Harness.h"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

using namespace passtune;
using nlohmann::json;

namespace {

// --config <file> supplies defaults; explicit flags override them because
// CLI11 only writes bound variables when the flag is actually present.
json loadConfigFile(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in)
        throw UsageError(std::string("cannot open config file: ") +
                         argv[i + 1]);
      json j = json::parse(in, nullptr, false);
      if (j.is_discarded())
        throw UsageError(std::string("config file is not valid JSON: ") +
                         argv[i + 1]);
      return j;
    }
  }
  return json::object();
}

template <typename T>
void maybe(const json& j, const char* key, T& value) {
  if (j.contains(key))
    value = j.at(key).get<T>();
}

void applyConfig(const json& j, BackendConfig& c) {
  std::string kind, count, syntax;
  maybe(j, "backend", kind);
  if (!kind.empty())
    c.kind = backendKindFromName(kind);
  maybe(j, "opt_path", c.optPath);
  maybe(j, "count_method", count);
  if (count == "instcount-pass")
    c.countMethod = CountMethod::instcountPass;
  else if (count == "textual-count")
    c.countMethod = CountMethod::textualCount;
  maybe(j, "pass_syntax", syntax);
  if (syntax == "legacy")
    c.passSyntax = PassSyntax::legacy;
  else if (syntax == "modern")
    c.passSyntax = PassSyntax::modern;
  maybe(j, "timeout_s", c.timeoutSeconds);
  maybe(j, "baseline_flag", c.baselineFlag);
  maybe(j, "jobs", c.jobs);
  maybe(j, "pass_list", c.passListPath);
}

void applyConfig(const json& j, GAConfig& c) {
  maybe(j, "pop_size", c.popSize);
  maybe(j, "generations", c.generations);
  maybe(j, "top_k_init", c.topKInit);
  maybe(j, "crossover_rate", c.crossoverRate);
  maybe(j, "mutation_rate", c.mutationRate);
  maybe(j, "candidate_blocks_q", c.candidateBlocksQ);
  maybe(j, "elitism", c.elitism);
  maybe(j, "tournament_size", c.tournamentSize);
  maybe(j, "eval_budget", c.evalBudget);
  maybe(j, "seed", c.seed);
  maybe(j, "smart_init", c.smartInit);
  maybe(j, "knowledge_crossover", c.knowledgeCrossover);
  maybe(j, "knowledge_mutation", c.knowledgeMutation);
  maybe(j, "mutation_accept_always", c.mutationAcceptAlways);
}

void applyConfig(const json& j, BuildConfig& c) {
  maybe(j, "prototypes", c.prototypes);
  maybe(j, "seq_len", c.seqLen);
  maybe(j, "seed", c.seed);
  maybe(j, "pair_budget", c.pairBudget);
  maybe(j, "proto_plain_ga", c.protoPlainGa);
  applyConfig(j, c.ga);
}

void addBackendFlags(CLI::App* cmd, BackendConfig& c, std::string& kindName) {
  cmd->add_option("--backend", kindName, "Backend: llvm or synthetic");
  cmd->add_option("--opt", c.optPath, "Path to the LLVM opt binary");
  cmd->add_option("--pass-list", c.passListPath,
                  "File with one LLVM pass name per line");
  cmd->add_option("--timeout", c.timeoutSeconds,
                  "Per-invocation timeout in seconds");
  cmd->add_option("--baseline-flag", c.baselineFlag,
                  "Baseline optimization flag (default -Oz)");
  cmd->add_option("--jobs", c.jobs, "Parallel backend invocations");
  std::map<std::string, CountMethod> countMap{
      {"textual-count", CountMethod::textualCount},
      {"instcount-pass", CountMethod::instcountPass}};
  cmd->add_option("--count-method", c.countMethod, "Instruction count method")
      ->transform(CLI::CheckedTransformer(countMap, CLI::ignore_case));
  std::map<std::string, PassSyntax> syntaxMap{
      {"auto", PassSyntax::autoDetect},
      {"legacy", PassSyntax::legacy},
      {"modern", PassSyntax::modern}};
  cmd->add_option("--pass-syntax", c.passSyntax,
                  "Pass flag syntax for opt (auto probes opt --version)")
      ->transform(CLI::CheckedTransformer(syntaxMap, CLI::ignore_case));
}

void addGaFlags(CLI::App* cmd, GAConfig& c, bool includeSeed = true) {
  cmd->add_option("--pop-size", c.popSize, "GA population size");
  cmd->add_option("--generations", c.generations, "GA generations");
  cmd->add_option("--top-k-init", c.topKInit,
                  "Prototype sequences seeded into the population");
  cmd->add_option("--crossover-rate", c.crossoverRate, "Crossover rate");
  cmd->add_option("--mutation-rate", c.mutationRate, "Mutation rate");
  cmd->add_option("--candidate-blocks", c.candidateBlocksQ,
                  "Replacement blocks sampled per mutation");
  cmd->add_option("--elitism", c.elitism, "Elite individuals carried over");
  cmd->add_option("--tournament-size", c.tournamentSize,
                  "Tournament selection size");
  cmd->add_option("--budget", c.evalBudget,
                  "Max backend evaluations (cache hits are free)");
  if (includeSeed)
    cmd->add_option("--seed", c.seed, "Run seed");
  cmd->add_flag("--no-smart-init", [&c](std::int64_t) { c.smartInit = false; },
                "Random initial population instead of prototype seeding");
  cmd->add_flag("--no-kc",
                [&c](std::int64_t) { c.knowledgeCrossover = false; },
                "Single-point crossover instead of block recombination");
  cmd->add_flag("--no-km",
                [&c](std::int64_t) { c.knowledgeMutation = false; },
                "Uniform random mutation instead of diagnose-and-repair");
  cmd->add_flag("--mutation-accept-always",
                [&c](std::int64_t) { c.mutationAcceptAlways = true; },
                "Standard mutation accepts without the improvement check");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"passtune: knowledge-guided compiler pass sequence tuning"};
  app.require_subcommand(1);

  std::string configPath;
  app.add_option("--config", configPath,
                 "JSON file with defaults; explicit flags override it");

  try {
    json fileConfig = loadConfigFile(argc, argv);

    // build-kb ------------------------------------------------------------
    BuildKbOptions buildOpts;
    std::string buildBackendName = "synthetic";
    applyConfig(fileConfig, buildOpts.backend);
    applyConfig(fileConfig, buildOpts.build);
    CLI::App* build = app.add_subcommand(
        "build-kb", "Distill a corpus into a pass knowledge base");
    build->add_option("--corpus", buildOpts.corpusPath,
                      "Synthetic suite file or directory of .ll files")
        ->required();
    build->add_option("--out", buildOpts.outPath, "Output kb.json")
        ->required();
    build->add_option("--prototypes", buildOpts.build.prototypes,
                      "Program prototype count (0 = elbow selection)");
    build->add_option("--seq-len", buildOpts.build.seqLen,
                      "Pass sequence length");
    build->add_option("--seed", buildOpts.build.seed, "Build seed");
    build->add_option("--pair-budget", buildOpts.build.pairBudget,
                      "Cap on synergy (program, pair) checks; 0 = all");
    build->add_flag("--proto-plain-ga", buildOpts.build.protoPlainGa,
                    "Evolve prototype sequences with a plain GA");
    build->add_flag("--stamp", buildOpts.build.stamp,
                    "Record a wall-clock timestamp in provenance (breaks "
                    "byte-identical rebuilds)");
    addBackendFlags(build, buildOpts.backend, buildBackendName);
    addGaFlags(build, buildOpts.build.ga, /*includeSeed=*/false);

    // tune ------------------------------------------------------------------
    TuneOptions tuneOpts;
    std::string tuneBackendName = "synthetic";
    applyConfig(fileConfig, tuneOpts.backend);
    applyConfig(fileConfig, tuneOpts.ga);
    CLI::App* tuneCmd = app.add_subcommand(
        "tune", "Find a personalized pass sequence for one program");
    tuneCmd->add_option("--kb", tuneOpts.kbPath, "Knowledge base JSON")
        ->required();
    tuneCmd->add_option("--program", tuneOpts.programRef,
                        "Program: .ll file, suite program id, or program "
                        "JSON")
        ->required();
    tuneCmd->add_option("--suite,--corpus", tuneOpts.corpusPath,
                        "Synthetic suite file (defines the pass universe)");
    tuneCmd->add_option("--report", tuneOpts.reportPath,
                        "Write a JSON tuning report here");
    tuneCmd->add_flag("--timing", tuneOpts.timing,
                      "Include wall time in the report file (breaks "
                      "byte-identical reruns)");
    addBackendFlags(tuneCmd, tuneOpts.backend, tuneBackendName);
    addGaFlags(tuneCmd, tuneOpts.ga);

    // evaluate ----------------------------------------------------------------
    EvaluateOptions evalOpts;
    std::string evalBackendName = "synthetic";
    applyConfig(fileConfig, evalOpts.backend);
    applyConfig(fileConfig, evalOpts.ga);
    CLI::App* evalCmd = app.add_subcommand(
        "evaluate", "Tune every program in a test set and report mean "
                    "improvement over the baseline");
    evalCmd->add_option("--kb", evalOpts.kbPath, "Knowledge base JSON")
        ->required();
    evalCmd->add_option("--test", evalOpts.testPath,
                        "Test suite file or directory of .ll files")
        ->required();
    evalCmd->add_option("--out", evalOpts.outPrefix,
                        "Write <prefix>.csv and <prefix>.json");
    evalCmd->add_option("--method", evalOpts.method,
                        "Label recorded in the report");
    addBackendFlags(evalCmd, evalOpts.backend, evalBackendName);
    addGaFlags(evalCmd, evalOpts.ga);

    // ablate -----------------------------------------------------------------
    AblateOptions ablateOpts;
    std::string ablateBackendName = "synthetic";
    applyConfig(fileConfig, ablateOpts.base.backend);
    applyConfig(fileConfig, ablateOpts.base.ga);
    CLI::App* ablateCmd = app.add_subcommand(
        "ablate", "Run the operator-ablation grid (full, random-init, "
                  "no-kc, no-km, no-knowledge)");
    ablateCmd->add_option("--kb", ablateOpts.base.kbPath,
                          "Knowledge base JSON")
        ->required();
    ablateCmd->add_option("--test", ablateOpts.base.testPath,
                          "Test suite file or directory of .ll files")
        ->required();
    ablateCmd->add_option("--out", ablateOpts.base.outPrefix,
                          "Report file prefix");
    addBackendFlags(ablateCmd, ablateOpts.base.backend, ablateBackendName);
    addGaFlags(ablateCmd, ablateOpts.base.ga);

    // synth-gen ---------------------------------------------------------------
    SynthGenOptions genOpts;
    CLI::App* genCmd = app.add_subcommand(
        "synth-gen", "Generate a planted synthetic suite plus its ground "
                     "truth sidecar");
    genCmd->add_option("--passes", genOpts.passes, "Number of passes");
    genCmd->add_option("--programs", genOpts.programs, "Number of programs");
    genCmd->add_option("--prototypes", genOpts.prototypes,
                       "Planted program archetypes");
    genCmd->add_option("--synergy-pairs", genOpts.synergyPairs,
                       "Planted flag-gated pass pairs");
    genCmd->add_option("--seed", genOpts.seed, "Generator seed");
    genCmd->add_option("--program-seed", genOpts.programSeed,
                       "Separate seed for the program draw, so a train/test "
                       "split can share one pass universe (0 = same as "
                       "--seed)");
    genCmd->add_option("--out", genOpts.outPath, "Output suite JSON")
        ->required();

    // analyze -------------------------------------------------------------------
    CLI::App* analyze =
        app.add_subcommand("analyze", "Inspect features or a knowledge base");
    analyze->require_subcommand(1);
    std::string analyzeIrPath;
    CLI::App* analyzeFeatures = analyze->add_subcommand(
        "features", "Print the feature vector of an IR file as CSV");
    analyzeFeatures->add_option("file", analyzeIrPath, "Textual IR file")
        ->required();
    std::string analyzeKbPath, analyzeOutDir = "analysis";
    CLI::App* analyzeKb = analyze->add_subcommand(
        "kb", "Dump behavioral vectors, variance ranking, synergy edges, "
              "and groups as CSV");
    analyzeKb->add_option("file", analyzeKbPath, "Knowledge base JSON")
        ->required();
    analyzeKb->add_option("--out-dir", analyzeOutDir, "Output directory");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : 1;
    }

    if (build->parsed()) {
      buildOpts.backend.kind = backendKindFromName(buildBackendName);
      cmdBuildKb(buildOpts, std::cout);
    } else if (tuneCmd->parsed()) {
      tuneOpts.backend.kind = backendKindFromName(tuneBackendName);
      cmdTune(tuneOpts, std::cout);
    } else if (evalCmd->parsed()) {
      evalOpts.backend.kind = backendKindFromName(evalBackendName);
      cmdEvaluate(evalOpts, std::cout);
    } else if (ablateCmd->parsed()) {
      ablateOpts.base.backend.kind = backendKindFromName(ablateBackendName);
      cmdAblate(ablateOpts, std::cout);
    } else if (genCmd->parsed()) {
      cmdSynthGen(genOpts, std::cout);
    } else if (analyze->parsed()) {
      if (analyzeFeatures->parsed())
        cmdAnalyzeFeatures(analyzeIrPath, std::cout);
      else
        cmdAnalyzeKb(analyzeKbPath, analyzeOutDir, std::cout);
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const BackendError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
