//===-- Backend.cpp - Batch evaluation over an OpenMP worker pool ---------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Backend.h"

#include <omp.h>

namespace passtune {

void BackendConfig::validate() const {
  if (timeoutSeconds <= 0)
    throw UsageError("backend timeout must be positive");
  if (jobs < 1)
    throw UsageError("jobs must be >= 1");
}

const char* backendKindName(BackendKind k) {
  return k == BackendKind::llvm ? "llvm" : "synthetic";
}

BackendKind backendKindFromName(const std::string& name) {
  if (name == "llvm")
    return BackendKind::llvm;
  if (name == "synthetic")
    return BackendKind::synthetic;
  throw UsageError("unknown backend '" + name + "' (expected llvm|synthetic)");
}

BatchEvaluator::BatchEvaluator(const EvaluationBackend& backend,
                               EvalCache& cache, int jobs)
    : backend_(backend), cache_(cache), jobs_(jobs < 1 ? 1 : jobs) {}

long long BatchEvaluator::backendCalls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

bool BatchEvaluator::budgetExhausted() const {
  std::lock_guard lock(mu_);
  return budget_ >= 0 && calls_ >= budget_;
}

long long BatchEvaluator::evaluateOne(const ProgramUnit& p,
                                      const PassSequence& seq) {
  std::string key = EvalCache::makeKey(p, seq, backend_.id());
  if (auto hit = cache_.lookup(key))
    return *hit;
  {
    std::lock_guard lock(mu_);
    if (budget_ >= 0 && calls_ >= budget_)
      throw BackendError("evaluation budget exhausted");
    ++calls_;
  }
  long long count = backend_.evaluate(p, seq);
  cache_.insert(key, count);
  return count;
}

long long BatchEvaluator::baseline(const ProgramUnit& p) {
  std::string key = EvalCache::makeBaselineKey(p, backend_.id());
  if (auto hit = cache_.lookup(key))
    return *hit;
  long long count = backend_.baselineCount(p);
  cache_.insert(key, count);
  return count;
}

// Shared batch front end: resolve cache hits, admit uncached unique keys
// under the budget, and leave the admitted jobs for the execution strategy.
struct BatchEvaluator::Plan {
  std::vector<std::string> keys;       // per item
  std::vector<std::size_t> firstOf;    // per item: index of first equal item
  std::vector<std::size_t> jobs;       // first-occurrence items to evaluate
  std::vector<EvalOutcome> uniqueOutcome; // per item, valid at first
};

BatchEvaluator::Plan BatchEvaluator::planBatch(
    const std::vector<EvalItem>& items) {
  Plan plan;
  plan.keys.resize(items.size());
  plan.firstOf.resize(items.size());
  plan.uniqueOutcome.resize(items.size());

  std::unordered_map<std::string, std::size_t> firstIndex;
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < items.size(); ++i) {
    plan.keys[i] = EvalCache::makeKey(*items[i].program, items[i].seq,
                                      backend_.id());
    auto [it, inserted] = firstIndex.try_emplace(plan.keys[i], i);
    plan.firstOf[i] = it->second;
    if (!inserted)
      continue;
    if (auto hit = cache_.lookup(plan.keys[i])) {
      plan.uniqueOutcome[i] = {EvalStatus::ok, *hit, {}};
    } else if (budget_ >= 0 && calls_ >= budget_) {
      plan.uniqueOutcome[i] = {EvalStatus::budgetExhausted, 0,
                               "evaluation budget exhausted"};
    } else {
      ++calls_; // an invocation is consumed even if it later fails
      plan.jobs.push_back(i);
    }
  }
  return plan;
}

std::vector<EvalOutcome>
BatchEvaluator::evaluateBatch(const std::vector<EvalItem>& items) {
  Plan plan = planBatch(items);

  bool poisoned = false;
  std::string poisonMessage;

#pragma omp parallel for schedule(dynamic) num_threads(jobs_)
  for (std::size_t j = 0; j < plan.jobs.size(); ++j) {
    std::size_t i = plan.jobs[j];
    try {
      long long count = backend_.evaluate(*items[i].program, items[i].seq);
      cache_.insert(plan.keys[i], count);
      plan.uniqueOutcome[i] = {EvalStatus::ok, count, {}};
    } catch (const CachePoisonError& e) {
#pragma omp critical(passtune_poison)
      {
        poisoned = true;
        poisonMessage = e.what();
      }
      plan.uniqueOutcome[i] = {EvalStatus::backendError, 0, e.what()};
    } catch (const std::exception& e) {
      plan.uniqueOutcome[i] = {EvalStatus::backendError, 0, e.what()};
    }
  }

  if (poisoned)
    throw CachePoisonError(poisonMessage);

  std::vector<EvalOutcome> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    out[i] = plan.uniqueOutcome[plan.firstOf[i]];
  return out;
}

std::vector<EvalOutcome>
BatchEvaluator::evaluateBatchSerial(const std::vector<EvalItem>& items) {
  Plan plan = planBatch(items);

  for (std::size_t i : plan.jobs) {
    try {
      long long count = backend_.evaluate(*items[i].program, items[i].seq);
      cache_.insert(plan.keys[i], count);
      plan.uniqueOutcome[i] = {EvalStatus::ok, count, {}};
    } catch (const CachePoisonError&) {
      throw;
    } catch (const std::exception& e) {
      plan.uniqueOutcome[i] = {EvalStatus::backendError, 0, e.what()};
    }
  }

  std::vector<EvalOutcome> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    out[i] = plan.uniqueOutcome[plan.firstOf[i]];
  return out;
}

} // namespace passtune
