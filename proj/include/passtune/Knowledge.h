//===-- Knowledge.h - The four-part pass knowledge base ---------*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// The knowledge distilled offline from a program corpus:
//   1. behavioral vectors  - per pass, mean percent reduction per prototype
//   2. pass groups         - clusters of behaviorally similar passes
//   3. synergy graph       - ordered pass pairs that beat the second pass
//                            alone, weighted by corpus frequency
//   4. prototype sequences - one evolved sequence per program prototype
// plus the program-clustering model used to classify new programs.
// Serialized as one JSON document; schema in docs/kb-format.md.
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_KNOWLEDGE_H
#define PASSTUNE_KNOWLEDGE_H

#include "passtune/Backend.h"
#include "passtune/KMeans.h"

namespace passtune {

struct BehavioralVector {
  PassId pass;
  std::vector<double> values;     // percent reduction per prototype
  std::vector<long long> support; // programs averaged per prototype
};

struct PassGroups {
  std::map<PassId, int> groupOf; // every universe pass, exactly once
  int k = 0;
  std::vector<std::vector<double>> centroids;

  int groupIndex(const PassId& p) const;
  /// Universe passes belonging to group g, in universe order.
  std::vector<PassId> members(const PassUniverse& universe, int g) const;
};

struct SynergyEdge {
  long long count = 0;
  double weight = 0.0; // count / corpus size, in (0, 1]
};

struct SynergyGraph {
  std::map<std::pair<PassId, PassId>, SynergyEdge> edges;
  long long corpusSize = 0;

  /// Outgoing edges of `from` as (target, weight), in target name order.
  std::vector<std::pair<PassId, double>> successors(const PassId& from) const;
  /// Sum of outgoing edge weights per pass.
  double totalOutWeight(const PassId& from) const;
};

struct PrototypeLibrary {
  std::vector<PassSequence> sequences; // index = prototype
  std::vector<double> scores;          // mean reduction on training programs
};

struct KbProvenance {
  std::string corpusDigest;
  std::vector<std::string> programDigests;
  std::string configJson; // serialized build configuration
  std::uint64_t seed = 0;
  std::string builtAt; // empty unless stamping was requested (see --stamp)
  std::vector<int> backfilledPrototypes; // prototypes with no training data
};

struct PassKnowledgeBase {
  PassUniverse universe;
  KMeansModel progModel;
  std::vector<BehavioralVector> behavioral; // aligned with universe order
  PassGroups groups;
  SynergyGraph synergy;
  PrototypeLibrary prototypes;
  int seqLen = 0;
  KbProvenance provenance;

  int prototypeCount() const { return progModel.k; }

  /// Cross-component consistency; throws DataError with a description.
  void validate() const;
};

//===----------------------------------------------------------------------===//
// Offline construction primitives
//===----------------------------------------------------------------------===//

/// Mean percent single-pass reduction per prototype. A program whose
/// unoptimized count is zero is skipped (and logged); a failed evaluation
/// contributes a neutral 0 so one broken pass cannot poison the mean.
std::vector<BehavioralVector>
computeBehavioralVectors(const std::vector<ProgramUnit>& corpus,
                         const std::vector<int>& labels, int prototypeCount,
                         const PassUniverse& universe, BatchEvaluator& eval);

/// K-means over the (unnormalized) behavioral vectors; k chosen by the
/// elbow over [2, min(12, passes-1)]. Fewer than 3 passes form one group.
PassGroups computePassGroups(const std::vector<BehavioralVector>& behavioral,
                             std::uint64_t seed);

/// Records the ordered pair (a, b) for every program where applying <a, b>
/// strictly beats applying <b> alone, which in turn strictly beats doing
/// nothing. `pairBudget` > 0 caps the total number of (program, pair)
/// checks by uniform per-pair program sampling; 0 means full enumeration.
SynergyGraph mineSynergyGraph(const std::vector<ProgramUnit>& corpus,
                              const PassUniverse& universe,
                              BatchEvaluator& eval, long long pairBudget,
                              std::uint64_t seed);

//===----------------------------------------------------------------------===//
// Serialization
//===----------------------------------------------------------------------===//

std::string kbToJsonText(const PassKnowledgeBase& kb);
PassKnowledgeBase kbFromJsonText(const std::string& text);
void saveKb(const PassKnowledgeBase& kb, const std::string& path);
PassKnowledgeBase loadKb(const std::string& path);

} // namespace passtune

#endif // PASSTUNE_KNOWLEDGE_H
