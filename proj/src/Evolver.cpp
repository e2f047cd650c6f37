//===-- Evolver.cpp - Knowledge-guided genetic search ---------------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Evolver.h"

#include "passtune/Featurizer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace passtune {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kScoreShiftEpsilon = 1e-6;
} // namespace

void GAConfig::validate() const {
  if (popSize < 1)
    throw UsageError("population size must be >= 1");
  if (generations < 0)
    throw UsageError("generations must be >= 0");
  if (topKInit < 1 || topKInit > popSize)
    throw UsageError("top-k initialization size must be in [1, pop-size]");
  if (elitism < 0 || elitism >= popSize)
    throw UsageError("elitism must be in [0, pop-size)");
  if (tournamentSize < 1)
    throw UsageError("tournament size must be >= 1");
  if (candidateBlocksQ < 1)
    throw UsageError("mutation candidate count must be >= 1");
  if (crossoverRate < 0.0 || crossoverRate > 1.0 || mutationRate < 0.0 ||
      mutationRate > 1.0)
    throw UsageError("crossover/mutation rates must be in [0, 1]");
}

KnowledgeView KnowledgeView::of(const PassKnowledgeBase& kb,
                                int prototypeIndex) {
  return fromParts(kb.universe, kb.behavioral, kb.groups, kb.synergy,
                   prototypeIndex, kb.prototypeCount());
}

KnowledgeView
KnowledgeView::fromParts(const PassUniverse& universe,
                         const std::vector<BehavioralVector>& behavioral,
                         const PassGroups& groups, const SynergyGraph& synergy,
                         int prototypeIndex, int prototypeCount) {
  if (prototypeIndex < 0 || prototypeIndex >= prototypeCount)
    throw DataError("prototype index out of range");
  KnowledgeView kv;
  kv.universe = &universe;
  kv.groups = &groups;
  kv.synergy = &synergy;
  kv.prototypeIndex = prototypeIndex;
  for (const BehavioralVector& bv : behavioral)
    kv.behavioralByName_[bv.pass.name] = &bv;
  return kv;
}

double KnowledgeView::passScore(const PassId& p) const {
  auto it = behavioralByName_.find(p.name);
  if (it == behavioralByName_.end())
    throw DataError("no behavioral vector for pass '" + p.name +
                    "' (knowledge base/universe mismatch)");
  return it->second->values[static_cast<std::size_t>(prototypeIndex)];
}

double fitnessPercent(long long baseline, long long count) {
  if (baseline == 0)
    throw DataError("degenerate baseline");
  return (100.0 * static_cast<double>(baseline - count)) /
         static_cast<double>(baseline);
}

//===----------------------------------------------------------------------===//
// Objectives
//===----------------------------------------------------------------------===//

Objective::Batch Objective::fitnessBatch(const std::vector<PassSequence>& seqs) {
  Batch batch = compute(seqs);
  if (!seqs.empty()) {
    if (batch.allBackendFailures) {
      if (++consecutiveTotalFailures_ >= 3)
        throw BackendError(
            "backend failing: 3 consecutive evaluation batches failed "
            "completely");
    } else {
      consecutiveTotalFailures_ = 0;
    }
  }
  return batch;
}

SingleProgramObjective::SingleProgramObjective(const ProgramUnit& program,
                                               long long baseline,
                                               BatchEvaluator& eval)
    : program_(program), baseline_(baseline), eval_(eval) {
  if (baseline_ == 0)
    throw DataError("degenerate baseline");
}

Objective::Batch
SingleProgramObjective::compute(const std::vector<PassSequence>& seqs) {
  std::vector<EvalItem> items;
  items.reserve(seqs.size());
  for (const PassSequence& s : seqs)
    items.push_back({&program_, s});
  std::vector<EvalOutcome> results = eval_.evaluateBatch(items);

  Batch batch;
  batch.fitness.resize(seqs.size());
  bool allFail = !results.empty();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok())
      batch.fitness[i] = fitnessPercent(baseline_, results[i].count);
    else
      batch.fitness[i] = kNegInf;
    if (results[i].status != EvalStatus::backendError)
      allFail = false;
  }
  batch.allBackendFailures = allFail;
  return batch;
}

long long SingleProgramObjective::backendCalls() const {
  return eval_.backendCalls();
}
bool SingleProgramObjective::budgetExhausted() const {
  return eval_.budgetExhausted();
}

ProgramSetObjective::ProgramSetObjective(
    std::vector<const ProgramUnit*> programs,
    std::vector<long long> baselines, BatchEvaluator& eval)
    : programs_(std::move(programs)), baselines_(std::move(baselines)),
      eval_(eval) {
  if (programs_.empty() || programs_.size() != baselines_.size())
    throw DataError("program-set objective: bad program/baseline lists");
  for (long long b : baselines_)
    if (b == 0)
      throw DataError("degenerate baseline");
}

Objective::Batch
ProgramSetObjective::compute(const std::vector<PassSequence>& seqs) {
  std::vector<EvalItem> items;
  items.reserve(seqs.size() * programs_.size());
  for (const PassSequence& s : seqs)
    for (const ProgramUnit* p : programs_)
      items.push_back({p, s});
  std::vector<EvalOutcome> results = eval_.evaluateBatch(items);

  Batch batch;
  batch.fitness.resize(seqs.size());
  bool allFail = !results.empty();
  for (const EvalOutcome& r : results)
    if (r.status != EvalStatus::backendError)
      allFail = false;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    double sum = 0.0;
    for (std::size_t j = 0; j < programs_.size(); ++j) {
      const EvalOutcome& r = results[s * programs_.size() + j];
      sum += r.ok() ? fitnessPercent(baselines_[j], r.count) : kNegInf;
    }
    batch.fitness[s] = sum / static_cast<double>(programs_.size());
  }
  batch.allBackendFailures = allFail;
  return batch;
}

long long ProgramSetObjective::backendCalls() const {
  return eval_.backendCalls();
}
bool ProgramSetObjective::budgetExhausted() const {
  return eval_.budgetExhausted();
}

//===----------------------------------------------------------------------===//
// Segmentation and scoring
//===----------------------------------------------------------------------===//

std::vector<FunctionalBlock> segmentBlocks(const PassSequence& seq,
                                           const PassGroups& groups) {
  std::vector<FunctionalBlock> blocks;
  std::size_t i = 0;
  while (i < seq.size()) {
    int g = groups.groupIndex(seq.passes[i]);
    if (g < 0)
      throw DataError("pass '" + seq.passes[i].name +
                      "' has no group (knowledge base/universe mismatch)");
    std::size_t j = i + 1;
    while (j < seq.size() && groups.groupIndex(seq.passes[j]) == g)
      ++j;
    blocks.push_back({i, j, g, 0.0});
    i = j;
  }
  return blocks;
}

double blockScore(const FunctionalBlock& block, const PassSequence& seq,
                  const KnowledgeView& kv) {
  double score = 0.0;
  for (std::size_t i = block.start; i < block.end; ++i)
    score += kv.passScore(seq.passes[i]);
  return score;
}

double crossoverSelectProb(double scoreA, double scoreB) {
  double shift = std::min({scoreA, scoreB, 0.0});
  double a = scoreA - shift + kScoreShiftEpsilon;
  double b = scoreB - shift + kScoreShiftEpsilon;
  return a / (a + b);
}

//===----------------------------------------------------------------------===//
// Crossover
//===----------------------------------------------------------------------===//

namespace {

std::vector<FunctionalBlock> scoredBlocks(const PassSequence& seq,
                                          const KnowledgeView& kv) {
  std::vector<FunctionalBlock> blocks = segmentBlocks(seq, *kv.groups);
  for (FunctionalBlock& b : blocks)
    b.score = blockScore(b, seq, kv);
  return blocks;
}

void appendBlock(std::vector<PassId>& out, const PassSequence& parent,
                 const FunctionalBlock& block) {
  out.insert(out.end(), parent.passes.begin() + block.start,
             parent.passes.begin() + block.end);
}

// Group whose centroid is best for this prototype; pads short offspring.
int bestGroupFor(const KnowledgeView& kv) {
  const auto& centroids = kv.groups->centroids;
  int best = 0;
  double bestVal = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < centroids.size(); ++g) {
    double v = centroids[g][static_cast<std::size_t>(kv.prototypeIndex)];
    if (v > bestVal) {
      bestVal = v;
      best = static_cast<int>(g);
    }
  }
  return best;
}

} // namespace

PassSequence knowledgeCrossover(const PassSequence& a, const PassSequence& b,
                                const KnowledgeView& kv, Rng& rng) {
  if (a.size() != b.size())
    throw DataError("crossover parents must share one sequence length");
  const std::size_t seqLen = a.size();
  std::vector<FunctionalBlock> blocksA = scoredBlocks(a, kv);
  std::vector<FunctionalBlock> blocksB = scoredBlocks(b, kv);

  // Index-paired walk: while both parents have a j-th block, take one of
  // the two by scored coin flip; once the shorter block list runs out, the
  // longer parent's remaining blocks ride along unchanged. Length drift is
  // repaired afterwards: overlong children are cut at L, short ones are
  // padded from the pass group whose centroid is best for this prototype.
  std::vector<PassId> out;
  out.reserve(seqLen);
  std::size_t common = std::min(blocksA.size(), blocksB.size());
  for (std::size_t j = 0; j < common; ++j) {
    double pA = crossoverSelectProb(blocksA[j].score, blocksB[j].score);
    if (rng.nextDouble() < pA)
      appendBlock(out, a, blocksA[j]);
    else
      appendBlock(out, b, blocksB[j]);
  }
  for (std::size_t j = common; j < blocksA.size(); ++j)
    appendBlock(out, a, blocksA[j]);
  for (std::size_t j = common; j < blocksB.size(); ++j)
    appendBlock(out, b, blocksB[j]);

  if (out.size() > seqLen)
    out.resize(seqLen);
  if (out.size() < seqLen) {
    std::vector<PassId> members =
        kv.groups->members(*kv.universe, bestGroupFor(kv));
    if (members.empty())
      members = kv.universe->passes();
    while (out.size() < seqLen)
      out.push_back(members[rng.nextBelow(members.size())]);
  }

  PassSequence child;
  child.passes = std::move(out);
  child.origin = Origin::crossover;
  return child;
}

PassSequence singlePointCrossover(const PassSequence& a, const PassSequence& b,
                                  Rng& rng) {
  PassSequence child;
  child.origin = Origin::crossover;
  const std::size_t seqLen = a.size();
  if (seqLen < 2) {
    child.passes = a.passes;
    return child;
  }
  std::size_t cut = 1 + rng.nextBelow(seqLen - 1);
  child.passes.assign(a.passes.begin(), a.passes.begin() + cut);
  child.passes.insert(child.passes.end(), b.passes.begin() + cut,
                      b.passes.end());
  return child;
}

//===----------------------------------------------------------------------===//
// Mutation
//===----------------------------------------------------------------------===//

namespace {

struct WeightedPool {
  std::vector<std::pair<PassId, double>> entries; // deterministic order
  double total = 0.0;

  const PassId& sample(Rng& rng) const {
    double r = rng.nextDouble() * total;
    double cum = 0.0;
    for (const auto& [id, w] : entries) {
      cum += w;
      if (cum > r)
        return id;
    }
    return entries.back().first;
  }
};

} // namespace

std::vector<std::pair<PassId, double>>
mutationCandidatePool(const PassSequence& seq, const FunctionalBlock& worst,
                      const KnowledgeView& kv) {
  std::vector<std::pair<PassId, double>> entries;
  double total = 0.0;
  auto contains = [&entries](const PassId& p) {
    for (const auto& [id, w] : entries)
      if (id == p)
        return true;
    return false;
  };
  auto add = [&](const PassId& p, double w) {
    entries.emplace_back(p, w);
    total += w;
  };

  if (worst.start > 0) {
    const PassId& pred = seq.passes[worst.start - 1];
    for (const auto& [to, w] : kv.synergy->successors(pred))
      add(to, w);
  } else {
    // Top 5 passes by total outgoing synergy weight.
    std::vector<std::pair<double, const PassId*>> ranked;
    for (const PassId& p : kv.universe->passes()) {
      double w = kv.synergy->totalOutWeight(p);
      if (w > 0.0)
        ranked.emplace_back(w, &p);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) {
                       return x.first > y.first;
                     });
    for (std::size_t i = 0; i < ranked.size() && i < 5; ++i)
      add(*ranked[i].second, ranked[i].first);
  }

  double similarityWeight =
      entries.empty() ? 1.0 : total / static_cast<double>(entries.size());
  for (const PassId& p : kv.groups->members(*kv.universe, worst.group))
    if (!contains(p))
      add(p, similarityWeight);

  if (entries.empty()) {
    std::cerr << "[passtune] warning: empty mutation candidate pool; "
                 "sampling uniformly over the universe\n";
    for (const PassId& p : kv.universe->passes())
      add(p, 1.0);
  }
  return entries;
}

Individual restorativeMutation(const Individual& ind, const KnowledgeView& kv,
                               Objective& objective, int q, Rng& rng) {
  if (!ind.evaluated)
    throw DataError("restorative mutation requires an evaluated individual");
  std::vector<FunctionalBlock> blocks = scoredBlocks(ind.seq, kv);
  if (blocks.empty())
    return ind;

  std::size_t worstIdx = 0;
  for (std::size_t j = 1; j < blocks.size(); ++j)
    if (blocks[j].score < blocks[worstIdx].score) // ties keep the leftmost
      worstIdx = j;
  const FunctionalBlock& worst = blocks[worstIdx];

  WeightedPool pool;
  pool.entries = mutationCandidatePool(ind.seq, worst, kv);
  for (const auto& entry : pool.entries)
    pool.total += entry.second;

  std::vector<PassSequence> candidates;
  candidates.reserve(q);
  for (int r = 0; r < q; ++r) {
    PassSequence cand = ind.seq;
    cand.origin = Origin::mutation;
    for (std::size_t i = worst.start; i < worst.end; ++i)
      cand.passes[i] = pool.sample(rng);
    candidates.push_back(std::move(cand));
  }

  Objective::Batch batch = objective.fitnessBatch(candidates);
  std::size_t best = 0;
  for (std::size_t r = 1; r < candidates.size(); ++r)
    if (batch.fitness[r] > batch.fitness[best])
      best = r;

  if (batch.fitness[best] > ind.fitness)
    return {std::move(candidates[best]), batch.fitness[best], true};
  return ind;
}

Individual standardMutation(const Individual& ind,
                            const PassUniverse& universe, Objective& objective,
                            Rng& rng, bool acceptAlways) {
  if (!ind.evaluated)
    throw DataError("mutation requires an evaluated individual");
  if (ind.seq.size() == 0)
    return ind;
  PassSequence cand = ind.seq;
  cand.origin = Origin::mutation;
  std::size_t pos = rng.nextBelow(cand.size());
  cand.passes[pos] = universe.at(rng.nextBelow(universe.size()));

  Objective::Batch batch = objective.fitnessBatch({cand});
  if (acceptAlways || batch.fitness[0] > ind.fitness)
    return {std::move(cand), batch.fitness[0], true};
  return ind;
}

//===----------------------------------------------------------------------===//
// The GA loop
//===----------------------------------------------------------------------===//

namespace {

PassSequence randomSequence(const PassUniverse& universe, int seqLen,
                            Rng& rng) {
  PassSequence seq;
  seq.origin = Origin::random;
  seq.passes.reserve(seqLen);
  for (int i = 0; i < seqLen; ++i)
    seq.passes.push_back(universe.at(rng.nextBelow(universe.size())));
  return seq;
}

// Indices sorted by fitness descending; stable, so equal fitness keeps
// population order and the whole loop stays deterministic.
std::vector<std::size_t> rankByFitness(const std::vector<Individual>& pop) {
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return pop[a].fitness > pop[b].fitness;
  });
  return idx;
}

std::size_t tournamentPick(const std::vector<Individual>& pop,
                           int tournamentSize, Rng& rng) {
  std::size_t winner = rng.nextBelow(pop.size());
  for (int t = 1; t < tournamentSize; ++t) {
    std::size_t challenger = rng.nextBelow(pop.size());
    if (pop[challenger].fitness > pop[winner].fitness)
      winner = challenger;
  }
  return winner;
}

} // namespace

GaResult runGa(Objective& objective, const KnowledgeView& kv,
               const GAConfig& config, int seqLen,
               std::vector<PassSequence> seedPop, Rng& rng) {
  config.validate();
  if (seqLen < 1)
    throw DataError("sequence length must be >= 1");

  std::vector<Individual> pop;
  pop.reserve(config.popSize);
  for (PassSequence& s : seedPop) {
    if (static_cast<int>(pop.size()) >= config.popSize)
      break;
    if (static_cast<int>(s.size()) != seqLen)
      throw DataError("seed sequence length differs from run length");
    pop.push_back({std::move(s), 0.0, false});
  }
  while (static_cast<int>(pop.size()) < config.popSize)
    pop.push_back({randomSequence(*kv.universe, seqLen, rng), 0.0, false});

  auto evaluatePending = [&](std::vector<Individual>& group) {
    std::vector<std::size_t> pending;
    std::vector<PassSequence> seqs;
    for (std::size_t i = 0; i < group.size(); ++i)
      if (!group[i].evaluated) {
        pending.push_back(i);
        seqs.push_back(group[i].seq);
      }
    if (pending.empty())
      return;
    Objective::Batch batch = objective.fitnessBatch(seqs);
    for (std::size_t j = 0; j < pending.size(); ++j) {
      group[pending[j]].fitness = batch.fitness[j];
      group[pending[j]].evaluated = true;
    }
  };

  evaluatePending(pop);

  Individual best = pop[0];
  for (const Individual& ind : pop)
    if (ind.fitness > best.fitness)
      best = ind;

  GaResult result;
  result.trajectory.push_back(best.fitness);

  for (int gen = 1; gen <= config.generations; ++gen) {
    if (objective.budgetExhausted())
      break;

    std::vector<std::size_t> ranked = rankByFitness(pop);
    std::vector<Individual> next;
    next.reserve(config.popSize);
    for (int e = 0; e < config.elitism; ++e)
      next.push_back(pop[ranked[e]]);

    while (static_cast<int>(next.size()) < config.popSize) {
      std::size_t a = tournamentPick(pop, config.tournamentSize, rng);
      std::size_t b = tournamentPick(pop, config.tournamentSize, rng);
      if (rng.nextDouble() < config.crossoverRate) {
        PassSequence child =
            config.knowledgeCrossover
                ? knowledgeCrossover(pop[a].seq, pop[b].seq, kv, rng)
                : singlePointCrossover(pop[a].seq, pop[b].seq, rng);
        next.push_back({std::move(child), 0.0, false});
      } else {
        next.push_back({pop[a].seq, pop[a].fitness, pop[a].evaluated});
      }
    }

    evaluatePending(next);

    for (int i = config.elitism; i < config.popSize; ++i) {
      if (rng.nextDouble() < config.mutationRate) {
        next[i] = config.knowledgeMutation
                      ? restorativeMutation(next[i], kv, objective,
                                            config.candidateBlocksQ, rng)
                      : standardMutation(next[i], *kv.universe, objective,
                                         rng, config.mutationAcceptAlways);
      }
    }

    pop = std::move(next);
    for (const Individual& ind : pop)
      if (ind.fitness > best.fitness)
        best = ind;
    result.trajectory.push_back(best.fitness);
    result.generationsRun = gen;
  }

  result.best = std::move(best);
  return result;
}

std::vector<PassSequence> smartInit(const PrototypeLibrary& prototypes,
                                    Objective& objective, int topK) {
  if (prototypes.sequences.empty())
    return {};
  std::vector<PassSequence> seqs = prototypes.sequences;
  for (PassSequence& s : seqs)
    s.origin = Origin::prototype;
  Objective::Batch batch = objective.fitnessBatch(seqs);

  std::vector<std::size_t> idx(seqs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return batch.fitness[a] > batch.fitness[b];
  });

  std::vector<PassSequence> seeds;
  for (std::size_t j = 0; j < idx.size() && static_cast<int>(j) < topK; ++j)
    seeds.push_back(seqs[idx[j]]);
  return seeds;
}

TuneReport tune(const ProgramUnit& program, const PassKnowledgeBase& kb,
                const EvaluationBackend& backend, EvalCache& cache,
                const GAConfig& config, int jobs) {
  config.validate();
  auto start = std::chrono::steady_clock::now();

  if (!(kb.universe == backend.universe()))
    throw DataError("knowledge base universe does not match the backend's "
                    "pass universe");
  if (backend.featureSchemaVersion() != kb.progModel.schemaVersion)
    throw DataError("knowledge base was built with feature schema " +
                    std::to_string(kb.progModel.schemaVersion) +
                    " but the backend provides schema " +
                    std::to_string(backend.featureSchemaVersion()));

  FeatureVector features = l1Normalize(backend.rawFeatures(program));
  int prototype = classify(kb.progModel, features);

  BatchEvaluator eval(backend, cache, jobs);
  eval.setBudget(config.evalBudget);
  long long baseline = eval.baseline(program);
  if (baseline == 0)
    throw DataError("degenerate baseline: " + program.id);

  SingleProgramObjective objective(program, baseline, eval);
  KnowledgeView kv = KnowledgeView::of(kb, prototype);

  std::vector<PassSequence> seeds;
  if (config.smartInit) {
    if (kb.prototypes.sequences.empty())
      std::cerr << "[passtune] warning: empty prototype library; falling "
                   "back to random initialization\n";
    else
      seeds = smartInit(kb.prototypes, objective,
                        std::min(config.topKInit, config.popSize));
  }

  Rng rng(config.seed);
  GaResult ga = runGa(objective, kv, config, kb.seqLen, std::move(seeds), rng);

  TuneReport report;
  report.programId = program.id;
  report.prototype = prototype;
  report.bestSequence = ga.best.seq;
  report.bestFitness = ga.best.fitness;
  report.trajectory = std::move(ga.trajectory);
  report.backendCalls = eval.backendCalls();
  report.wallTimeSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

} // namespace passtune
