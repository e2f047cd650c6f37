//===-- Pipeline.h - Offline knowledge-base construction --------*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// The full offline pipeline: featurize and cluster the corpus into program
// prototypes, measure per-pass behavioral vectors, group passes, mine the
// synergy graph, and evolve one sequence per prototype. Deterministic given
// (corpus digests, configuration, seed).
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_PIPELINE_H
#define PASSTUNE_PIPELINE_H

#include "passtune/Evolver.h"

namespace passtune {

struct BuildConfig {
  int prototypes = 0; // 0: elbow over [2, min(16, corpus size)]
  int seqLen = 32;
  std::uint64_t seed = 42;
  long long pairBudget = 0; // synergy (program, pair) checks; 0 = exhaustive
  bool protoPlainGa = false; // evolve prototypes with a plain GA instead
  GAConfig ga;               // knobs for the offline prototype GA
  int jobs = 1;
  bool stamp = false; // record a wall-clock timestamp in provenance
};

/// One GA per prototype over that prototype's training programs, reusing the
/// knowledge-guided operators with the freshly built knowledge components.
/// A prototype with no training programs inherits the best-scoring evolved
/// sequence and is flagged in provenance.
PrototypeLibrary
evolvePrototypeSequences(const std::vector<ProgramUnit>& corpus,
                         const std::vector<int>& labels, int prototypeCount,
                         const PassUniverse& universe,
                         const std::vector<BehavioralVector>& behavioral,
                         const PassGroups& groups, const SynergyGraph& synergy,
                         BatchEvaluator& eval, const BuildConfig& config,
                         std::vector<int>* backfilled = nullptr);

/// The complete offline build.
PassKnowledgeBase buildKb(const std::vector<ProgramUnit>& corpus,
                          const EvaluationBackend& backend, EvalCache& cache,
                          const BuildConfig& config);

/// Digest of a corpus: hash over (id, digest) pairs in id order.
std::string corpusDigest(const std::vector<ProgramUnit>& corpus);

} // namespace passtune

#endif // PASSTUNE_PIPELINE_H
