//===-- Acceptance.cpp - End-to-end acceptance criteria -------------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Each criterion prints exactly one PASS/FAIL line (SKIP for the gated LLVM
// smoke) and carries its own runtime ceiling. The expected values come from
// the independent oracles in Oracles.h, never from the code under test.
//
//===----------------------------------------------------------------------===//

#include "passtune/Featurizer.h"
#include "passtune/Harness.h"
#include "passtune/LlvmBackend.h"

#include "Oracles.h"
#include "TestUtil.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

using namespace passtune;
using namespace passtune::test;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Skipped : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
  if (!cond)
    throw CheckFailure(what);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

//===----------------------------------------------------------------------===//
// 1. Behavioral vectors match brute force on a generated suite.
//===----------------------------------------------------------------------===//

void criterion1() {
  SynthGenOptions gen;
  gen.passes = 8;
  gen.programs = 30;
  gen.prototypes = 3;
  gen.synergyPairs = 2;
  gen.seed = 1001;
  SyntheticSuite suite = generateSuite(gen);
  SyntheticBackend backend(suite);
  std::vector<ProgramUnit> corpus = suite.programUnits();

  std::vector<FeatureVector> points;
  for (const ProgramUnit& p : corpus)
    points.push_back(l1Normalize(backend.rawFeatures(p)));
  auto [model, assignment] = kmeansFit(points, 3, 42);

  EvalCache cache;
  BatchEvaluator eval(backend, cache, 4);
  std::vector<BehavioralVector> got = computeBehavioralVectors(
      corpus, assignment.labels, 3, backend.universe(), eval);
  oracle::BehavioralTruth want =
      oracle::behavioralBruteForce(suite, assignment.labels, 3);

  for (const BehavioralVector& bv : got) {
    const std::vector<double>& expected = want.values.at(bv.pass.name);
    require(bv.values.size() == expected.size(),
            "dimension mismatch for " + bv.pass.name);
    for (std::size_t i = 0; i < expected.size(); ++i)
      require(std::abs(bv.values[i] - expected[i]) <= 1e-9,
              "component mismatch for " + bv.pass.name + " at prototype " +
                  std::to_string(i));
    require(bv.support == want.support.at(bv.pass.name),
            "support mismatch for " + bv.pass.name);
  }
}

//===----------------------------------------------------------------------===//
// 2. Synergy mining equals exhaustive enumeration; planted pairs recovered.
//===----------------------------------------------------------------------===//

void criterion2() {
  SynthGenOptions gen;
  gen.passes = 8;
  gen.programs = 10;
  gen.prototypes = 3;
  gen.synergyPairs = 2;
  gen.seed = 1002;
  SyntheticTruth truth;
  SyntheticSuite suite = generateSuite(gen, &truth);
  SyntheticBackend backend(suite);
  std::vector<ProgramUnit> corpus = suite.programUnits();

  EvalCache cache;
  BatchEvaluator eval(backend, cache, 4);
  SynergyGraph graph =
      mineSynergyGraph(corpus, backend.universe(), eval, 0, 42);
  auto want = oracle::synergyBruteForce(suite);

  require(graph.edges.size() == want.size(),
          "edge set size mismatch: mined " +
              std::to_string(graph.edges.size()) + " vs brute-force " +
              std::to_string(want.size()));
  for (const auto& [key, count] : want) {
    auto it = graph.edges.find({PassId{key.first}, PassId{key.second}});
    require(it != graph.edges.end(),
            "missing edge (" + key.first + ", " + key.second + ")");
    require(it->second.count == count,
            "count mismatch on (" + key.first + ", " + key.second + ")");
  }
  for (const auto& pair : truth.plantedPairs)
    require(graph.edges.count({PassId{pair.first}, PassId{pair.second}}) == 1,
            "planted pair (" + pair.first + ", " + pair.second +
                ") not recovered");
}

//===----------------------------------------------------------------------===//
// 3. Planted cluster recovery and elbow selection.
//===----------------------------------------------------------------------===//

void criterion3() {
  auto gauss = [](Rng& rng) {
    double sum = 0.0;
    for (int i = 0; i < 12; ++i)
      sum += rng.nextDouble();
    return sum - 6.0;
  };
  auto planted = [&](const std::vector<FeatureVector>& centers, int count,
                     double sigma, std::uint64_t seed) {
    Rng rng(seed);
    std::pair<std::vector<FeatureVector>, std::vector<int>> out;
    for (std::size_t c = 0; c < centers.size(); ++c)
      for (int i = 0; i < count; ++i) {
        FeatureVector p = centers[c];
        for (double& x : p)
          x += sigma * gauss(rng);
        out.first.push_back(std::move(p));
        out.second.push_back(static_cast<int>(c));
      }
    return out;
  };

  // Separation 10 sqrt(2) with sigma 0.1: over 100x the noise scale.
  auto [p2, t2] = planted({{0, 0}, {10, 10}}, 10, 0.1, 3001);
  auto [model2, a2] = kmeansFit(p2, 2, 42);
  require(oracle::adjustedRandIndex(a2.labels, t2) == 1.0,
          "two-cluster recovery is not exact");
  require(elbowSelectK(p2, 1, 8, 42) == 2, "elbow missed k=2");

  auto [p3, t3] = planted({{0, 0, 0}, {10, 10, 0}, {0, 10, 10}}, 10, 0.1,
                          3002);
  auto [model3, a3] = kmeansFit(p3, 3, 42);
  require(oracle::adjustedRandIndex(a3.labels, t3) == 1.0,
          "three-cluster recovery is not exact");
  require(elbowSelectK(p3, 1, 8, 42) == 3, "elbow missed k=3");
}

//===----------------------------------------------------------------------===//
// 4. Fitness, block score, and crossover probability unit exactness.
//===----------------------------------------------------------------------===//

void criterion4() {
  require(fitnessPercent(200, 178) == 11.0, "fitness(200, 178) != 11.0");
  require(fitnessPercent(200, 200) == 0.0, "fitness parity broken");
  require(fitnessPercent(200, 250) == -25.0, "negative fitness broken");

  PassUniverse universe({{"A"}, {"B"}, {"C"}});
  std::vector<BehavioralVector> behavioral = {
      {{"A"}, {3.2}, {1}}, {{"B"}, {-1.0}, {1}}, {{"C"}, {4.8}, {1}}};
  PassGroups groups;
  groups.k = 1;
  groups.groupOf = {{{"A"}, 0}, {{"B"}, 0}, {{"C"}, 0}};
  groups.centroids = {{7.0}};
  SynergyGraph synergy;
  KnowledgeView kv =
      KnowledgeView::fromParts(universe, behavioral, groups, synergy, 0, 1);
  PassSequence s = seq({"A", "B", "C"});
  auto blocks = segmentBlocks(s, groups);
  require(blocks.size() == 1, "expected a single block");
  require(blockScore(blocks[0], s, kv) == (3.2 + -1.0) + 4.8,
          "block score is not the component sum");

  constexpr double eps = 1e-6;
  double p = crossoverSelectProb(7.0, 3.0);
  require(p == (7.0 + eps) / ((7.0 + eps) + (3.0 + eps)),
          "selection probability differs from the pinned formula");
  require(std::abs(p - 0.7) < 1e-6, "selection probability far from 0.7");
  double pNeg = crossoverSelectProb(-2.0, 3.0);
  require(pNeg == eps / (eps + (5.0 + eps)),
          "negative-score shift differs from the pinned formula");

  Rng rng(20240601);
  int hits = 0;
  for (int i = 0; i < 10000; ++i)
    if (rng.nextDouble() < p)
      ++hits;
  double freq = hits / 10000.0;
  double sigma = std::sqrt(0.7 * 0.3 / 10000.0);
  require(std::abs(freq - 0.7) <= 3 * sigma,
          "empirical selection frequency " + std::to_string(freq) +
              " outside 0.7 +/- 3 sigma");
}

//===----------------------------------------------------------------------===//
// 5. Exhaustive-optimum check on the six-pass, length-3 suite.
//===----------------------------------------------------------------------===//

void criterion5() {
  SyntheticSuite suite = sixPassSuite();
  SyntheticBackend backend(suite);
  EvalCache buildCache;
  BuildConfig build;
  build.prototypes = 2;
  build.seqLen = 3;
  build.seed = 42;
  build.ga.popSize = 8;
  build.ga.generations = 8;
  PassKnowledgeBase kb =
      buildKb(suite.programUnits(), backend, buildCache, build);

  GAConfig config;
  config.popSize = 8;
  config.generations = 300;
  config.topKInit = 2;
  config.evalBudget = 216; // the whole length-3 sequence space
  config.seed = 4242;

  ProgramUnit p0 = unitOf(suite, 0);
  EvalCache cache;
  TuneReport report = tune(p0, kb, backend, cache, config, 2);
  require(report.backendCalls <= 216, "budget exceeded");

  std::vector<std::string> names;
  for (const PassId& id : report.bestSequence.passes)
    names.push_back(id.name);
  long long got =
      oracle::evalSynthetic(suite, suite.programs[0].second, names);
  long long want =
      oracle::exhaustiveBestCount(suite, suite.programs[0].second, 3);
  require(got == want, "tuned count " + std::to_string(got) +
                           " misses the exhaustive optimum " +
                           std::to_string(want));
}

//===----------------------------------------------------------------------===//
// 6. Ablation ordering on a planted 20-program benchmark.
//===----------------------------------------------------------------------===//

void criterion6() {
  TempDir dir("accept-ablate");
  std::ostringstream sink;

  SynthGenOptions gen;
  gen.passes = 10;
  gen.programs = 30;
  gen.prototypes = 3;
  gen.synergyPairs = 2;
  gen.seed = 2001;
  gen.outPath = dir.file("train.json");
  cmdSynthGen(gen, sink);
  gen.programs = 20;
  gen.seed = 2002;
  gen.outPath = dir.file("test.json");
  cmdSynthGen(gen, sink);

  BuildKbOptions build;
  build.backend.kind = BackendKind::synthetic;
  build.backend.jobs = 4;
  build.corpusPath = dir.file("train.json");
  build.outPath = dir.file("kb.json");
  build.build.prototypes = 3;
  build.build.seqLen = 8;
  build.build.seed = 42;
  build.build.ga.popSize = 16;
  build.build.ga.generations = 15;
  cmdBuildKb(build, sink);

  AblateOptions opts;
  opts.base.backend.kind = BackendKind::synthetic;
  opts.base.backend.jobs = 4;
  opts.base.kbPath = dir.file("kb.json");
  opts.base.testPath = dir.file("test.json");
  opts.base.ga.popSize = 16;
  opts.base.ga.generations = 100; // the 300-eval budget binds first
  opts.base.ga.evalBudget = 300;
  opts.base.ga.seed = 7;

  std::vector<EvalSummary> results = cmdAblate(opts, sink);
  require(results.size() == 5, "expected five ablation variants");
  double full = results[0].meanOverOz;
  double randomInit = results[1].meanOverOz;
  double noKc = results[2].meanOverOz;
  double noKm = results[3].meanOverOz;
  double noKnowledge = results[4].meanOverOz;

  auto fmt = [](double v) { return std::to_string(v); };
  require(full >= randomInit, "full (" + fmt(full) + ") < random-init (" +
                                  fmt(randomInit) + ")");
  require(full >= noKc,
          "full (" + fmt(full) + ") < no-kc (" + fmt(noKc) + ")");
  require(full >= noKm,
          "full (" + fmt(full) + ") < no-km (" + fmt(noKm) + ")");
  require(full > noKnowledge, "full (" + fmt(full) +
                                  ") not strictly above no-knowledge (" +
                                  fmt(noKnowledge) + ")");
}

//===----------------------------------------------------------------------===//
// 7. Byte-identical rebuilds and reruns under a fixed seed.
//===----------------------------------------------------------------------===//

void criterion7() {
  TempDir dir("accept-determinism");
  std::ostringstream sink;

  SynthGenOptions gen;
  gen.passes = 8;
  gen.programs = 12;
  gen.prototypes = 3;
  gen.synergyPairs = 2;
  gen.seed = 4001;
  gen.outPath = dir.file("suite.json");
  cmdSynthGen(gen, sink);

  BuildKbOptions build;
  build.backend.kind = BackendKind::synthetic;
  build.corpusPath = dir.file("suite.json");
  build.outPath = dir.file("kb1.json");
  build.build.prototypes = 3;
  build.build.seqLen = 6;
  build.build.seed = 42;
  build.build.ga.popSize = 10;
  build.build.ga.generations = 8;
  cmdBuildKb(build, sink);
  std::string kb1 = slurp(dir.file("kb1.json"));
  build.outPath = dir.file("kb2.json");
  cmdBuildKb(build, sink);
  require(kb1 == slurp(dir.file("kb2.json")),
          "knowledge base files differ between identical builds");

  TuneOptions tuneOpts;
  tuneOpts.backend.kind = BackendKind::synthetic;
  tuneOpts.kbPath = dir.file("kb1.json");
  tuneOpts.corpusPath = dir.file("suite.json");
  tuneOpts.programRef = "p00";
  tuneOpts.reportPath = dir.file("r1.json");
  tuneOpts.ga.popSize = 10;
  tuneOpts.ga.generations = 12;
  tuneOpts.ga.evalBudget = 120;
  tuneOpts.ga.seed = 9;
  cmdTune(tuneOpts, sink);
  std::string r1 = slurp(dir.file("r1.json"));
  tuneOpts.reportPath = dir.file("r2.json");
  cmdTune(tuneOpts, sink);
  require(r1 == slurp(dir.file("r2.json")),
          "tuning reports differ between identical runs");
}

//===----------------------------------------------------------------------===//
// 8. Trajectories are non-decreasing across randomized runs.
//===----------------------------------------------------------------------===//

void criterion8() {
  SyntheticSuite suite = sixPassSuite();
  SyntheticBackend backend(suite);
  EvalCache buildCache;
  BuildConfig build;
  build.prototypes = 2;
  build.seqLen = 4;
  build.seed = 42;
  build.ga.popSize = 8;
  build.ga.generations = 6;
  PassKnowledgeBase kb =
      buildKb(suite.programUnits(), backend, buildCache, build);

  Rng master(0xACCE55);
  for (int run = 0; run < 100; ++run) {
    GAConfig config;
    config.popSize = 6;
    config.generations = 6;
    config.topKInit = 2;
    config.evalBudget = 60;
    config.seed = master.nextU64();
    // Exercise all four operator configurations across runs.
    config.smartInit = run % 2 == 0;
    config.knowledgeCrossover = run % 3 != 0;
    config.knowledgeMutation = run % 5 != 0;

    ProgramUnit p = unitOf(suite, run % suite.programs.size());
    EvalCache cache;
    TuneReport report = tune(p, kb, backend, cache, config, 2);
    for (std::size_t i = 1; i < report.trajectory.size(); ++i)
      require(report.trajectory[i] >= report.trajectory[i - 1],
              "trajectory decreased in run " + std::to_string(run));
  }
}

//===----------------------------------------------------------------------===//
// 9. LLVM smoke test, skipped when opt is unavailable.
//===----------------------------------------------------------------------===//

void criterion9() {
  BackendConfig config;
  config.kind = BackendKind::llvm;
  std::string optPath = LlvmBackend::resolveOptPath(config);
  if (!LlvmBackend::optAvailable(optPath))
    throw Skipped("LLVM opt not found at '" + optPath +
                  "' (set PASSTUNE_OPT to enable)");

  TempDir dir("accept-llvm");
  std::string fixture = std::string(PASSTUNE_TEST_DIR) + "/fixtures/tiny.ll";
  ProgramUnit p = ProgramUnit::fromSource("tiny.ll", slurp(fixture));

  // A small universe keeps the offline stage to a few dozen opt runs.
  std::ofstream passList(dir.file("passes.txt"));
  passList << "-adce\n-dce\n-early-cse\n-gvn\n-instcombine\n-simplifycfg\n";
  passList.close();
  config.passListPath = dir.file("passes.txt");
  config.jobs = 4;

  PassUniverse universe = LlvmBackend::universeFromFile(config.passListPath);
  LlvmBackend backend(config, universe);

  long long baseline = backend.baselineCount(p);
  require(baseline > 0, "baseline count is zero");
  long long unopt = backend.evaluate(p, PassSequence{});
  require(unopt >= baseline, "unoptimized count below the baseline");

  EvalCache buildCache;
  BuildConfig build;
  build.prototypes = 1;
  build.seqLen = 4;
  build.seed = 42;
  build.pairBudget = 40;
  build.jobs = 4;
  build.ga.popSize = 6;
  build.ga.generations = 2;
  PassKnowledgeBase kb = buildKb({p}, backend, buildCache, build);

  GAConfig ga;
  ga.popSize = 6;
  ga.generations = 10;
  ga.topKInit = 1;
  ga.evalBudget = 50;
  ga.seed = 5;
  EvalCache cache;
  TuneReport report = tune(p, kb, backend, cache, ga, 4);
  require(report.backendCalls <= 50, "budget exceeded");
  require(report.bestFitness >= -100.0, "fitness below the sanity floor");
  require(!report.trajectory.empty(), "empty trajectory");
}

//===----------------------------------------------------------------------===//

struct Criterion {
  int id;
  const char* name;
  double limitSeconds;
  std::function<void()> run;
};

} // namespace

int main() {
  const Criterion criteria[] = {
      {1, "behavioral vectors match brute force (|delta| <= 1e-9)", 5.0,
       criterion1},
      {2, "synergy graph equals exhaustive enumeration, planted recall 1.0",
       10.0, criterion2},
      {3, "planted clusters recovered exactly; elbow finds 2 and 3", 5.0,
       criterion3},
      {4, "fitness/block-score/crossover-probability unit exactness", 5.0,
       criterion4},
      {5, "budget-216 tuning reaches the exhaustive optimum", 30.0,
       criterion5},
      {6, "ablation ordering: full >= variants, full > no-knowledge", 300.0,
       criterion6},
      {7, "byte-identical knowledge bases and reports under a fixed seed",
       60.0, criterion7},
      {8, "non-decreasing trajectories across 100 randomized runs", 60.0,
       criterion8},
      {9, "LLVM smoke: baseline, unoptimized count, budget-50 tune", 120.0,
       criterion9},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    try {
      c.run();
      double elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      if (elapsed > c.limitSeconds) {
        ++failures;
        std::printf("FAIL criterion-%d: %s (took %.2fs, limit %.0fs)\n", c.id,
                    c.name, elapsed, c.limitSeconds);
      } else {
        std::printf("PASS criterion-%d (%.2fs): %s\n", c.id, elapsed, c.name);
      }
    } catch (const Skipped& s) {
      std::printf("SKIP criterion-%d: %s -- %s\n", c.id, c.name, s.what());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL criterion-%d: %s -- %s\n", c.id, c.name, e.what());
    }
    std::fflush(stdout);
  }
  if (failures > 0)
    std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
