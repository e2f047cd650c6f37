//===-- Backend.h - Evaluation backends and the batch evaluator -*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// A backend is the compilation oracle: (program, pass sequence) -> IR
// instruction count. All search parallelism lives in BatchEvaluator, which
// fans unique work items out over an OpenMP worker pool; a serial reference
// path is kept alongside it for testing and benchmarking.
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_BACKEND_H
#define PASSTUNE_BACKEND_H

#include "passtune/Core.h"

#include <memory>
#include <mutex>

namespace passtune {

enum class BackendKind { llvm, synthetic };
enum class CountMethod { textualCount, instcountPass };
enum class PassSyntax { autoDetect, legacy, modern };

struct BackendConfig {
  BackendKind kind = BackendKind::synthetic;
  std::string optPath = "opt"; // PASSTUNE_OPT env var overrides
  CountMethod countMethod = CountMethod::textualCount;
  PassSyntax passSyntax = PassSyntax::autoDetect;
  double timeoutSeconds = 30.0;
  std::string baselineFlag = "-Oz";
  int jobs = 1;
  std::string passListPath; // llvm: optional file, one pass per line
  std::string suitePath;    // synthetic: suite JSON

  void validate() const;
};

const char* backendKindName(BackendKind k);
BackendKind backendKindFromName(const std::string& name);

/// The evaluation contract. Implementations must be deterministic and safe
/// to call concurrently (they hold no mutable evaluation state).
class EvaluationBackend {
public:
  virtual ~EvaluationBackend() = default;

  virtual const std::string& id() const = 0;
  virtual const PassUniverse& universe() const = 0;

  /// Instruction count of `p` after applying `seq` to the unoptimized
  /// program. The empty sequence yields the unoptimized count.
  virtual long long evaluate(const ProgramUnit& p,
                             const PassSequence& seq) const = 0;

  /// Instruction count under the backend's fixed baseline (e.g. -Oz).
  virtual long long baselineCount(const ProgramUnit& p) const = 0;

  /// Raw (unnormalized) static features of `p` in the backend's schema.
  virtual FeatureVector rawFeatures(const ProgramUnit& p) const = 0;
  virtual int featureSchemaVersion() const = 0;
};

enum class EvalStatus { ok, backendError, budgetExhausted };

struct EvalOutcome {
  EvalStatus status = EvalStatus::backendError;
  long long count = 0;
  std::string error;

  bool ok() const { return status == EvalStatus::ok; }
};

struct EvalItem {
  const ProgramUnit* program = nullptr;
  PassSequence seq;
};

/// Memoizing, budget-aware batch evaluator. Results are in input order and
/// identical to a sequential run; duplicate items within a batch cost one
/// backend invocation; cache hits are free and never count against the
/// budget. At most `jobs` backend invocations run concurrently.
class BatchEvaluator {
public:
  BatchEvaluator(const EvaluationBackend& backend, EvalCache& cache, int jobs);

  /// Caps total backend invocations (cache misses). Negative = unlimited.
  void setBudget(long long maxBackendCalls) { budget_ = maxBackendCalls; }
  long long budget() const { return budget_; }
  long long backendCalls() const;
  bool budgetExhausted() const;

  /// Memoized single evaluation. Propagates backend errors as exceptions.
  long long evaluateOne(const ProgramUnit& p, const PassSequence& seq);

  /// OpenMP-parallel batch evaluation; per-item errors are reported per
  /// index without aborting the batch. Cache poisoning is rethrown.
  std::vector<EvalOutcome> evaluateBatch(const std::vector<EvalItem>& items);

  /// Serial reference implementation with identical semantics; kept for
  /// testing and benchmarking against the parallel path.
  std::vector<EvalOutcome>
  evaluateBatchSerial(const std::vector<EvalItem>& items);

  /// Memoized baseline count. Not counted against the evaluation budget:
  /// the baseline is the fixed reference point, not part of the search.
  long long baseline(const ProgramUnit& p);

private:
  struct Plan;
  Plan planBatch(const std::vector<EvalItem>& items);

  const EvaluationBackend& backend_;
  EvalCache& cache_;
  int jobs_;
  long long budget_ = -1;
  mutable std::mutex mu_;
  long long calls_ = 0;
};

} // namespace passtune

#endif // PASSTUNE_BACKEND_H
