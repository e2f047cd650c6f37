//===-- Evolver.h - Knowledge-guided genetic search --------------*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// The online search: classify the program against the knowledge base's
// clustering model, seed the population from the prototype library, then
// evolve with two knowledge-infused operators:
//
//  * crossover recombines whole functional blocks (maximal same-group runs),
//    picking each block position with probability proportional to its
//    behavioral score for the program's prototype;
//  * mutation diagnoses the worst-scoring block, builds a candidate pool
//    from synergy successors of the preceding pass plus same-group passes,
//    samples q replacement blocks, validates them empirically, and accepts
//    only a strict improvement.
//
// Every operator can be switched off individually, which yields the
// standard-GA variants used by the ablation driver.
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_EVOLVER_H
#define PASSTUNE_EVOLVER_H

#include "passtune/Knowledge.h"
#include "passtune/Rng.h"

namespace passtune {

struct GAConfig {
  int popSize = 16;
  int generations = 20;
  int topKInit = 8;
  double crossoverRate = 0.9;
  double mutationRate = 0.3;
  int candidateBlocksQ = 4;
  int elitism = 2;
  int tournamentSize = 2;
  long long evalBudget = -1; // max backend calls; negative = unlimited
  std::uint64_t seed = 42;
  bool smartInit = true;
  bool knowledgeCrossover = true;
  bool knowledgeMutation = true;
  bool mutationAcceptAlways = false; // standard mutation only

  void validate() const;
};

/// Maximal run of same-group passes within a sequence; the unit the
/// knowledge operators reason over. Blocks partition [0, L).
struct FunctionalBlock {
  std::size_t start = 0; // half-open [start, end)
  std::size_t end = 0;
  int group = -1;
  double score = 0.0;
};

struct Individual {
  PassSequence seq;
  double fitness = 0.0;
  bool evaluated = false;
};

struct TuneReport {
  std::string programId;
  int prototype = -1;
  PassSequence bestSequence;
  double bestFitness = 0.0;
  std::vector<double> trajectory; // best-so-far per generation; non-decreasing
  long long backendCalls = 0;
  double wallTimeSeconds = 0.0;
  std::string configJson; // full run configuration echo
};

/// Everything the operators read from a knowledge base, plus the prototype
/// index of the program under optimization.
struct KnowledgeView {
  const PassUniverse* universe = nullptr;
  const PassGroups* groups = nullptr;
  const SynergyGraph* synergy = nullptr;
  int prototypeIndex = 0;

  static KnowledgeView of(const PassKnowledgeBase& kb, int prototypeIndex);
  /// For the offline pipeline, before the knowledge base is assembled.
  static KnowledgeView fromParts(const PassUniverse& universe,
                                 const std::vector<BehavioralVector>& behavioral,
                                 const PassGroups& groups,
                                 const SynergyGraph& synergy,
                                 int prototypeIndex, int prototypeCount);
  double passScore(const PassId& p) const; // behavioral value at the prototype

private:
  std::map<std::string, const BehavioralVector*> behavioralByName_;
};

//===----------------------------------------------------------------------===//
// Fitness
//===----------------------------------------------------------------------===//

/// Percent reduction relative to the baseline count; negative when the
/// sequence regresses. Computed as (100 * (baseline - count)) / baseline.
double fitnessPercent(long long baseline, long long count);

/// Batched sequence -> fitness map. Implementations own budget accounting;
/// failed or budget-starved evaluations yield -infinity. Three consecutive
/// batches failing completely with backend errors abort the search.
class Objective {
public:
  virtual ~Objective() = default;

  struct Batch {
    std::vector<double> fitness;
    bool allBackendFailures = false; // every item was a real backend error
  };
  Batch fitnessBatch(const std::vector<PassSequence>& seqs);
  virtual long long backendCalls() const = 0;
  virtual bool budgetExhausted() const = 0;

protected:
  virtual Batch compute(const std::vector<PassSequence>& seqs) = 0;

private:
  int consecutiveTotalFailures_ = 0;
};

/// Fitness of one program against its own baseline.
class SingleProgramObjective final : public Objective {
public:
  SingleProgramObjective(const ProgramUnit& program, long long baseline,
                         BatchEvaluator& eval);
  long long backendCalls() const override;
  bool budgetExhausted() const override;

protected:
  Batch compute(const std::vector<PassSequence>& seqs) override;

private:
  const ProgramUnit& program_;
  long long baseline_;
  BatchEvaluator& eval_;
};

/// Mean fitness over a program set, each against its own baseline; used for
/// evolving the offline prototype sequences.
class ProgramSetObjective final : public Objective {
public:
  ProgramSetObjective(std::vector<const ProgramUnit*> programs,
                      std::vector<long long> baselines, BatchEvaluator& eval);
  long long backendCalls() const override;
  bool budgetExhausted() const override;

protected:
  Batch compute(const std::vector<PassSequence>& seqs) override;

private:
  std::vector<const ProgramUnit*> programs_;
  std::vector<long long> baselines_;
  BatchEvaluator& eval_;
};

//===----------------------------------------------------------------------===//
// Operators
//===----------------------------------------------------------------------===//

/// Maximal same-group runs, in order. Every pass must be grouped.
std::vector<FunctionalBlock> segmentBlocks(const PassSequence& seq,
                                           const PassGroups& groups);

/// Sum of the block's per-pass behavioral values at the view's prototype.
double blockScore(const FunctionalBlock& block, const PassSequence& seq,
                  const KnowledgeView& kv);

/// Probability of taking the first parent's block under the positivity
/// shift: s' = s - min(sa, sb, 0) + 1e-6, p = sa' / (sa' + sb').
double crossoverSelectProb(double scoreA, double scoreB);

PassSequence knowledgeCrossover(const PassSequence& a, const PassSequence& b,
                                const KnowledgeView& kv, Rng& rng);
PassSequence singlePointCrossover(const PassSequence& a, const PassSequence& b,
                                  Rng& rng);

/// Weighted candidate pool for repairing `worst`: synergy successors of the
/// preceding pass, augmented with the worst block's group mates at the mean
/// synergy weight (or 1 when there are no synergy candidates). For a leading
/// block the synergy side falls back to the five strongest synergy sources
/// by total outgoing weight. An empty pool falls back to the whole universe.
std::vector<std::pair<PassId, double>>
mutationCandidatePool(const PassSequence& seq, const FunctionalBlock& worst,
                      const KnowledgeView& kv);

/// Diagnose-and-repair mutation; returns the individual unchanged when no
/// sampled replacement strictly improves it.
Individual restorativeMutation(const Individual& ind, const KnowledgeView& kv,
                               Objective& objective, int q, Rng& rng);

/// Uniform single-position replacement; same strict-improvement acceptance
/// unless acceptAlways is set.
Individual standardMutation(const Individual& ind, const PassUniverse& universe,
                            Objective& objective, Rng& rng, bool acceptAlways);

//===----------------------------------------------------------------------===//
// The GA loop
//===----------------------------------------------------------------------===//

struct GaResult {
  Individual best;
  std::vector<double> trajectory;
  int generationsRun = 0;
};

/// Generational loop with elitism and tournament selection. `seedPop` holds
/// pre-built sequences (e.g. from smart initialization); the population is
/// filled to popSize with uniformly random sequences.
GaResult runGa(Objective& objective, const KnowledgeView& kv,
               const GAConfig& config, int seqLen,
               std::vector<PassSequence> seedPop, Rng& rng);

/// Evaluates every prototype sequence on the program once and returns the
/// topK by fitness (ties toward the smaller prototype index).
std::vector<PassSequence> smartInit(const PrototypeLibrary& prototypes,
                                    Objective& objective, int topK);

/// The complete online phase for one program.
TuneReport tune(const ProgramUnit& program, const PassKnowledgeBase& kb,
                const EvaluationBackend& backend, EvalCache& cache,
                const GAConfig& config, int jobs);

} // namespace passtune

#endif // PASSTUNE_EVOLVER_H
