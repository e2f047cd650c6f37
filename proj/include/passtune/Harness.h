//===-- Harness.h - Command implementations behind the CLI ------*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_HARNESS_H
#define PASSTUNE_HARNESS_H

#include "passtune/Pipeline.h"
#include "passtune/SyntheticBackend.h"

#include <iosfwd>
#include <memory>

namespace passtune {

/// Backend plus the programs found at a corpus path (synthetic suite file or
/// a directory of .ll files).
struct BackendBundle {
  std::unique_ptr<EvaluationBackend> backend;
  std::vector<ProgramUnit> programs;
};
BackendBundle openBackend(const BackendConfig& config,
                          const std::string& corpusPath);

//===----------------------------------------------------------------------===//
// build-kb
//===----------------------------------------------------------------------===//

struct BuildKbOptions {
  BackendConfig backend;
  BuildConfig build;
  std::string corpusPath;
  std::string outPath;
};
PassKnowledgeBase cmdBuildKb(const BuildKbOptions& opts, std::ostream& out);

//===----------------------------------------------------------------------===//
// tune
//===----------------------------------------------------------------------===//

struct TuneOptions {
  BackendConfig backend;
  GAConfig ga;
  std::string kbPath;
  std::string corpusPath;  // synthetic: suite file; llvm: unused
  std::string programRef;  // synthetic: program id or file; llvm: .ll path
  std::string reportPath;  // optional JSON report
  bool timing = false;     // include wall time in the report file
};
TuneReport cmdTune(const TuneOptions& opts, std::ostream& out);

std::string tuneReportToJson(const TuneReport& report, bool includeTiming);

//===----------------------------------------------------------------------===//
// evaluate / ablate
//===----------------------------------------------------------------------===//

struct EvalRow {
  std::string id;
  long long baseline = 0;
  long long tuned = 0;
  double overOz = 0.0;
  double timeSeconds = 0.0;
  long long evals = 0;
  bool flagged = false; // zero baseline; excluded from the mean
};

struct EvalSummary {
  std::string method;
  std::vector<EvalRow> rows;
  double meanOverOz = 0.0;
  int excludedRows = 0;
  std::string configJson;
};

/// Arithmetic mean of the non-flagged rows.
double summaryMean(const std::vector<EvalRow>& rows);

struct EvaluateOptions {
  BackendConfig backend;
  GAConfig ga;
  std::string kbPath;
  std::string testPath;
  std::string outPrefix; // writes <prefix>.csv and <prefix>.json if set
  std::string method = "full";
};
EvalSummary cmdEvaluate(const EvaluateOptions& opts, std::ostream& out);

struct AblateOptions {
  EvaluateOptions base; // method label is overridden per variant
};
std::vector<EvalSummary> cmdAblate(const AblateOptions& opts,
                                   std::ostream& out);

//===----------------------------------------------------------------------===//
// synth-gen
//===----------------------------------------------------------------------===//

struct SynthGenOptions {
  int passes = 8;
  int programs = 30;
  int prototypes = 3;
  int synergyPairs = 2;
  std::uint64_t seed = 1;
  /// Draws the programs from a separate stream so a train/test split can
  /// share one pass universe: same seed, different program seeds. Zero
  /// means "same as seed".
  std::uint64_t programSeed = 0;
  std::string outPath;
};

struct SyntheticTruth {
  std::vector<std::pair<std::string, std::string>> plantedPairs;
  std::map<std::string, int> archetypeOf;        // program id -> archetype
  std::map<std::string, std::string> passCategory;
  std::map<int, std::string> dominantCategory;   // archetype -> category
};

/// Deterministic planted suite; the ground truth goes to <out>.truth.json.
SyntheticSuite generateSuite(const SynthGenOptions& opts,
                             SyntheticTruth* truth = nullptr);
void cmdSynthGen(const SynthGenOptions& opts, std::ostream& out);

SyntheticTruth loadTruth(const std::string& path);

//===----------------------------------------------------------------------===//
// analyze
//===----------------------------------------------------------------------===//

void cmdAnalyzeFeatures(const std::string& irPath, std::ostream& out);
void cmdAnalyzeKb(const std::string& kbPath, const std::string& outDir,
                  std::ostream& out);

} // namespace passtune

#endif // PASSTUNE_HARNESS_H
