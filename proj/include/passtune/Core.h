//===-- Core.h - Shared domain types for pass tuning ------------*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_CORE_H
#define PASSTUNE_CORE_H

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace passtune {

/// Bad command line or option combination. Exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// External tool or evaluation failure. Exit code 2.
struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Corrupt or inconsistent data (knowledge base, suite file, ...). Exit 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A deterministic backend returned two different counts for the same key.
struct CachePoisonError : BackendError {
  using BackendError::BackendError;
};

//===----------------------------------------------------------------------===//
// Passes and sequences
//===----------------------------------------------------------------------===//

/// Name of one optimization pass, e.g. "-simplifycfg" for the LLVM backend or
/// a single letter for synthetic suites.
struct PassId {
  std::string name;
  auto operator<=>(const PassId&) const = default;
};

/// Valid pass names are nonempty and contain no whitespace, no control
/// characters, and no '|' (the canonical-key separator).
bool isValidPassName(std::string_view name);

/// The ordered set of passes a backend can apply. Nonempty, duplicate-free.
class PassUniverse {
public:
  PassUniverse() = default;
  explicit PassUniverse(std::vector<PassId> passes);

  const std::vector<PassId>& passes() const { return passes_; }
  std::size_t size() const { return passes_.size(); }
  const PassId& at(std::size_t i) const { return passes_.at(i); }
  bool contains(const PassId& p) const { return indexOf(p) >= 0; }
  /// Index of `p` in declaration order, or -1.
  int indexOf(const PassId& p) const;

  bool operator==(const PassUniverse& other) const {
    return passes_ == other.passes_;
  }

private:
  std::vector<PassId> passes_;
  std::map<std::string, int> index_;
};

/// How a sequence entered the population.
enum class Origin { prototype, crossover, mutation, random, seed };
const char* originName(Origin o);

/// An ordered pass list; the genome of the search. Duplicates are allowed and
/// the empty sequence denotes the unoptimized program.
struct PassSequence {
  std::vector<PassId> passes;
  Origin origin = Origin::seed;

  std::size_t size() const { return passes.size(); }
  bool operator==(const PassSequence& other) const {
    return passes == other.passes;
  }
};

/// Order-sensitive, injective string form: names joined by '|'.
std::string canonicalKey(const PassSequence& seq);

//===----------------------------------------------------------------------===//
// Programs and features
//===----------------------------------------------------------------------===//

/// 64-bit FNV-1a of `bytes`, as 16 hex digits.
std::string fnv1aHex(std::string_view bytes);

/// One program in a corpus: opaque source bytes plus a content digest. For
/// the LLVM backend the source is textual IR; for the synthetic backend it is
/// a serialized synthetic state.
struct ProgramUnit {
  std::string id;
  std::string source;
  std::string digest;

  static ProgramUnit fromSource(std::string id, std::string source);
};

/// Fixed-order vector of static program features.
using FeatureVector = std::vector<double>;

/// One memoized evaluation result.
struct EvaluationRecord {
  std::string programDigest;
  PassSequence sequence;
  long long instructionCount = 0;
  std::string backendId;
};

//===----------------------------------------------------------------------===//
// Evaluation cache
//===----------------------------------------------------------------------===//

/// In-memory map (program digest, canonical sequence, backend id) ->
/// instruction count. Safe for concurrent lookup/insert from batch workers.
/// A key, once inserted, may never change value: backends are required to be
/// deterministic and a mismatch throws CachePoisonError.
class EvalCache {
public:
  static std::string makeKey(const ProgramUnit& p, const PassSequence& seq,
                             const std::string& backendId);
  /// Key for a program's baseline count; distinct from every sequence key.
  static std::string makeBaselineKey(const ProgramUnit& p,
                                     const std::string& backendId);

  std::optional<long long> lookup(const std::string& key) const;
  void insert(const std::string& key, long long value);
  std::size_t size() const;

private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, long long> entries_;
};

} // namespace passtune

#endif // PASSTUNE_CORE_H
