//===-- Pipeline.cpp - Offline knowledge-base construction ----------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Pipeline.h"

#include "passtune/Featurizer.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iostream>

#include <json.hpp>

namespace passtune {

using nlohmann::json;

std::string corpusDigest(const std::vector<ProgramUnit>& corpus) {
  std::vector<std::pair<std::string, std::string>> entries;
  entries.reserve(corpus.size());
  for (const ProgramUnit& p : corpus)
    entries.emplace_back(p.id, p.digest);
  std::sort(entries.begin(), entries.end());
  std::string blob;
  for (const auto& [id, digest] : entries) {
    blob += id;
    blob += '\0';
    blob += digest;
    blob += '\n';
  }
  return fnv1aHex(blob);
}

PrototypeLibrary evolvePrototypeSequences(
    const std::vector<ProgramUnit>& corpus, const std::vector<int>& labels,
    int prototypeCount, const PassUniverse& universe,
    const std::vector<BehavioralVector>& behavioral, const PassGroups& groups,
    const SynergyGraph& synergy, BatchEvaluator& eval,
    const BuildConfig& config, std::vector<int>* backfilled) {
  PrototypeLibrary lib;
  lib.sequences.resize(prototypeCount);
  lib.scores.assign(prototypeCount, 0.0);
  std::vector<bool> evolved(prototypeCount, false);

  GAConfig ga = config.ga;
  // No prototype library exists yet, and the ablation flag swaps in a plain
  // GA for this offline stage without touching the online defaults.
  ga.smartInit = false;
  ga.topKInit = std::min(ga.topKInit, ga.popSize); // unused with random init
  if (config.protoPlainGa) {
    ga.knowledgeCrossover = false;
    ga.knowledgeMutation = false;
  }

  for (int proto = 0; proto < prototypeCount; ++proto) {
    std::vector<const ProgramUnit*> members;
    std::vector<long long> baselines;
    for (std::size_t j = 0; j < corpus.size(); ++j) {
      if (labels[j] != proto)
        continue;
      long long b = eval.baseline(corpus[j]);
      if (b == 0) {
        std::cerr << "[passtune] note: skipping " << corpus[j].id
                  << " in prototype " << proto << " (zero baseline)\n";
        continue;
      }
      members.push_back(&corpus[j]);
      baselines.push_back(b);
    }
    if (members.empty())
      continue; // backfilled below

    ProgramSetObjective objective(std::move(members), std::move(baselines),
                                  eval);
    KnowledgeView kv = KnowledgeView::fromParts(
        universe, behavioral, groups, synergy, proto, prototypeCount);
    Rng rng(subSeed(config.seed, 0x47a0 + static_cast<std::uint64_t>(proto)));
    GaResult result = runGa(objective, kv, ga, config.seqLen, {}, rng);
    lib.sequences[proto] = result.best.seq;
    lib.sequences[proto].origin = Origin::prototype;
    lib.scores[proto] = result.best.fitness;
    evolved[proto] = true;
  }

  // Empty prototypes inherit the globally best evolved sequence.
  int bestProto = -1;
  for (int proto = 0; proto < prototypeCount; ++proto)
    if (evolved[proto] &&
        (bestProto < 0 || lib.scores[proto] > lib.scores[bestProto]))
      bestProto = proto;
  if (bestProto < 0)
    throw BackendError("prototype evolution produced no sequences (all "
                       "prototypes empty or degenerate)");
  for (int proto = 0; proto < prototypeCount; ++proto) {
    if (evolved[proto])
      continue;
    lib.sequences[proto] = lib.sequences[bestProto];
    lib.scores[proto] = lib.scores[bestProto];
    if (backfilled)
      backfilled->push_back(proto);
    std::cerr << "[passtune] note: prototype " << proto
              << " has no training programs; reusing prototype " << bestProto
              << "'s sequence\n";
  }
  return lib;
}

namespace {

json buildConfigJson(const BuildConfig& c) {
  json j;
  j["prototypes"] = c.prototypes;
  j["seq_len"] = c.seqLen;
  j["seed"] = c.seed;
  j["pair_budget"] = c.pairBudget;
  j["proto_plain_ga"] = c.protoPlainGa;
  j["jobs"] = c.jobs;
  json ga;
  ga["pop_size"] = c.ga.popSize;
  ga["generations"] = c.ga.generations;
  ga["crossover_rate"] = c.ga.crossoverRate;
  ga["mutation_rate"] = c.ga.mutationRate;
  ga["candidate_blocks_q"] = c.ga.candidateBlocksQ;
  ga["elitism"] = c.ga.elitism;
  ga["tournament_size"] = c.ga.tournamentSize;
  j["ga"] = ga;
  return j;
}

} // namespace

PassKnowledgeBase buildKb(const std::vector<ProgramUnit>& corpus,
                          const EvaluationBackend& backend, EvalCache& cache,
                          const BuildConfig& config) {
  if (corpus.empty())
    throw DataError("empty corpus");
  if (config.seqLen < 1)
    throw UsageError("sequence length must be >= 1");

  BatchEvaluator eval(backend, cache, config.jobs);

  // 1. Features, normalized to proportional composition.
  std::vector<FeatureVector> points;
  points.reserve(corpus.size());
  for (const ProgramUnit& p : corpus)
    points.push_back(l1Normalize(backend.rawFeatures(p)));

  // 2. Program prototypes.
  std::uint64_t clusterSeed = subSeed(config.seed, 0x10);
  int n = config.prototypes;
  if (n <= 0) {
    int kMax = std::min<int>(16, static_cast<int>(points.size()));
    n = kMax < 2 ? 1 : (kMax == 2 ? 2 : elbowSelectK(points, 2, kMax,
                                                     clusterSeed));
  }
  if (static_cast<std::size_t>(n) > corpus.size())
    throw UsageError("more prototypes requested than corpus programs");
  auto [model, assignment] = kmeansFit(points, n, clusterSeed,
                                       backend.featureSchemaVersion());

  // 3. Behavioral vectors.
  std::vector<BehavioralVector> behavioral = computeBehavioralVectors(
      corpus, assignment.labels, n, backend.universe(), eval);

  // 4. Pass groups.
  PassGroups groups;
  if (backend.universe().size() < 2) {
    groups.k = 1;
    groups.groupOf[backend.universe().at(0)] = 0;
    groups.centroids = {behavioral[0].values};
  } else {
    groups = computePassGroups(behavioral, subSeed(config.seed, 0x11));
  }

  // 5. Synergy graph.
  SynergyGraph synergy =
      mineSynergyGraph(corpus, backend.universe(), eval, config.pairBudget,
                       config.seed);

  // 6. Prototype sequences.
  std::vector<int> backfilled;
  PrototypeLibrary prototypes = evolvePrototypeSequences(
      corpus, assignment.labels, n, backend.universe(), behavioral, groups,
      synergy, eval, config, &backfilled);

  PassKnowledgeBase kb;
  kb.universe = backend.universe();
  kb.progModel = std::move(model);
  kb.behavioral = std::move(behavioral);
  kb.groups = std::move(groups);
  kb.synergy = std::move(synergy);
  kb.prototypes = std::move(prototypes);
  kb.seqLen = config.seqLen;

  kb.provenance.corpusDigest = corpusDigest(corpus);
  for (const ProgramUnit& p : corpus)
    kb.provenance.programDigests.push_back(p.digest);
  std::sort(kb.provenance.programDigests.begin(),
            kb.provenance.programDigests.end());
  kb.provenance.configJson = buildConfigJson(config).dump();
  kb.provenance.seed = config.seed;
  kb.provenance.backfilledPrototypes = std::move(backfilled);
  if (config.stamp) {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    kb.provenance.builtAt = buf;
  }

  kb.validate();
  return kb;
}

} // namespace passtune
