//===-- SyntheticBackend.h - Deterministic desk-scale oracle ----*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// A fully deterministic, integer-exact stand-in for the external optimizer.
// A synthetic program is a base count plus removable instruction pools per
// category; passes shrink their target pool at a fixed rate and may set or
// require flags, which plants order-sensitive pass interactions that small
// test oracles can verify exhaustively. File format in docs/synthetic.md.
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_SYNTHETIC_BACKEND_H
#define PASSTUNE_SYNTHETIC_BACKEND_H

#include "passtune/Backend.h"

#include <optional>
#include <set>

namespace passtune {

/// The fixed pool categories, in feature order.
const std::vector<std::string>& syntheticCategories();

struct SyntheticPassSpec {
  PassId id;
  std::string targetCategory; // one of syntheticCategories()
  double rate = 0.0;          // in (0, 1]
  std::optional<std::string> requiresFlag;
  std::optional<std::string> setsFlag;

  void validate() const;
};

struct SyntheticProgram {
  long long base = 0;
  std::map<std::string, long long> pools;
  std::set<std::string> flags; // starts empty; set by passes during a run

  long long instructionCount() const;

  /// Canonical JSON of the initial state (sorted keys, no flags).
  std::string serialize() const;
  static SyntheticProgram parse(std::string_view json);
};

/// One pass application: the target pool shrinks by floor(rate * pool), with
/// the rate doubled (capped at 1) when the required flag is already set.
SyntheticProgram applySyntheticPass(SyntheticProgram state,
                                    const SyntheticPassSpec& spec);

struct SyntheticSuite {
  std::string name;
  std::vector<SyntheticPassSpec> passes;
  std::vector<PassId> baseline; // the suite's declared baseline sequence
  std::vector<std::pair<std::string, SyntheticProgram>> programs;

  static SyntheticSuite load(const std::string& path);
  static SyntheticSuite fromJsonText(std::string_view text);
  std::string toJsonText() const;
  void save(const std::string& path) const;

  std::vector<ProgramUnit> programUnits() const;
  PassUniverse universe() const;
};

class SyntheticBackend final : public EvaluationBackend {
public:
  explicit SyntheticBackend(SyntheticSuite suite);

  const std::string& id() const override { return id_; }
  const PassUniverse& universe() const override { return universe_; }
  long long evaluate(const ProgramUnit& p,
                     const PassSequence& seq) const override;
  long long baselineCount(const ProgramUnit& p) const override;

  /// Features are [base, pool per category] in syntheticCategories() order.
  FeatureVector rawFeatures(const ProgramUnit& p) const override;
  int featureSchemaVersion() const override { return 2; }

  const SyntheticSuite& suite() const { return suite_; }

private:
  const SyntheticPassSpec& specFor(const PassId& id) const;

  SyntheticSuite suite_;
  PassUniverse universe_;
  std::map<std::string, const SyntheticPassSpec*> specs_;
  std::string id_;
};

} // namespace passtune

#endif // PASSTUNE_SYNTHETIC_BACKEND_H
