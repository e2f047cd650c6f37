//===-- Bench.cpp - Serial vs OpenMP kernel comparison --------------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Times the two data-parallel kernels against their serial reference paths:
// batch evaluation on a synthetic suite and the k-means assignment step.
// Usage: passtune-bench [jobs] [repeat]
//
//===----------------------------------------------------------------------===//

#include "passtune/Harness.h"
#include "passtune/SyntheticBackend.h"

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

using namespace passtune;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void report(const char* name, double serial, double parallel, int jobs) {
  std::printf("%-28s serial %8.3f ms   omp(%d) %8.3f ms   speedup %.2fx\n",
              name, serial * 1e3, jobs, parallel * 1e3,
              parallel > 0 ? serial / parallel : 0.0);
}

} // namespace

int main(int argc, char** argv) {
  int jobs = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  int repeat = argc > 2 ? std::atoi(argv[2]) : 3;
  if (jobs < 1)
    jobs = 1;

  SynthGenOptions gen;
  gen.passes = 12;
  gen.programs = 64;
  gen.prototypes = 4;
  gen.synergyPairs = 3;
  gen.seed = 7;
  SyntheticSuite suite = generateSuite(gen);
  SyntheticBackend backend(std::move(suite));
  std::vector<ProgramUnit> programs = backend.suite().programUnits();

  // Batch evaluation: every program x 2000 random sequences of length 16.
  Rng rng(11);
  std::vector<EvalItem> items;
  for (int s = 0; s < 2000; ++s) {
    PassSequence seq;
    for (int i = 0; i < 16; ++i)
      seq.passes.push_back(
          backend.universe().at(rng.nextBelow(backend.universe().size())));
    items.push_back({&programs[s % programs.size()], std::move(seq)});
  }

  for (int r = 0; r < repeat; ++r) {
    double tSerial, tParallel;
    {
      EvalCache cache;
      BatchEvaluator eval(backend, cache, 1);
      auto t0 = std::chrono::steady_clock::now();
      eval.evaluateBatchSerial(items);
      tSerial = seconds(t0);
    }
    {
      EvalCache cache;
      BatchEvaluator eval(backend, cache, jobs);
      auto t0 = std::chrono::steady_clock::now();
      eval.evaluateBatch(items);
      tParallel = seconds(t0);
    }
    report("evaluate_batch (2000 seqs)", tSerial, tParallel, jobs);
  }

  // K-means assignment: 20000 points, 26 dims, 16 centroids.
  std::vector<FeatureVector> points(20000, FeatureVector(26));
  for (FeatureVector& p : points)
    for (double& x : p)
      x = rng.nextDouble();
  std::vector<FeatureVector> centroids(points.begin(), points.begin() + 16);
  std::vector<int> labelsA, labelsB;
  std::vector<double> d2A, d2B;

  for (int r = 0; r < repeat; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    assignPointsSerial(points, centroids, labelsA, d2A);
    double tSerial = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    assignPointsParallel(points, centroids, labelsB, d2B);
    double tParallel = seconds(t0);
    if (labelsA != labelsB) {
      std::fprintf(stderr, "kernel mismatch between serial and parallel!\n");
      return 1;
    }
    report("kmeans_assign (20k x 16)", tSerial, tParallel,
           omp_get_max_threads());
  }
  return 0;
}
