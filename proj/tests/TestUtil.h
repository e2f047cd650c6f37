//===-- TestUtil.h - Shared fixtures for the test suite ---------*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_TESTS_TESTUTIL_H
#define PASSTUNE_TESTS_TESTUTIL_H

#include "passtune/SyntheticBackend.h"

#include <atomic>
#include <filesystem>
#include <functional>
#include <initializer_list>

#include <unistd.h>

namespace passtune::test {

inline PassSequence seq(std::initializer_list<const char*> names) {
  PassSequence s;
  for (const char* n : names)
    s.passes.push_back({n});
  return s;
}

inline PassId pid(const char* name) { return PassId{name}; }

/// The worked two-pass example used throughout the suite: pass A halves the
/// dead pool and sets a flag; pass B quarters the branch pool but doubles up
/// once the flag is set. Program p0 starts at 10 + 8(dead) + 16(branch) = 34.
inline SyntheticSuite flagPairSuite() {
  SyntheticSuite suite;
  suite.name = "flag-pair";
  SyntheticPassSpec a;
  a.id = {"A"};
  a.targetCategory = "dead";
  a.rate = 0.5;
  a.setsFlag = "cfg-simplified";
  SyntheticPassSpec b;
  b.id = {"B"};
  b.targetCategory = "branch";
  b.rate = 0.25;
  b.requiresFlag = "cfg-simplified";
  suite.passes = {a, b};
  suite.baseline = {PassId{"A"}};
  SyntheticProgram p0;
  p0.base = 10;
  p0.pools = {{"dead", 8}, {"branch", 16}};
  suite.programs.emplace_back("p0", p0);
  return suite;
}

/// Six passes over the flag-pair program plus a mem/arith-heavy second
/// program; small enough for exhaustive L=3 search (216 sequences).
inline SyntheticSuite sixPassSuite() {
  SyntheticSuite suite = flagPairSuite();
  suite.name = "six-pass";
  SyntheticPassSpec c;
  c.id = {"C"};
  c.targetCategory = "branch";
  c.rate = 0.5;
  SyntheticPassSpec d;
  d.id = {"D"};
  d.targetCategory = "dead";
  d.rate = 0.25;
  SyntheticPassSpec e;
  e.id = {"E"};
  e.targetCategory = "mem";
  e.rate = 0.5;
  SyntheticPassSpec f;
  f.id = {"F"};
  f.targetCategory = "arith";
  f.rate = 0.5;
  suite.passes.insert(suite.passes.end(), {c, d, e, f});
  SyntheticProgram p1;
  p1.base = 6;
  p1.pools = {{"mem", 32}, {"arith", 20}, {"dead", 2}};
  suite.programs.emplace_back("p1", p1);
  return suite;
}

inline ProgramUnit unitOf(const SyntheticSuite& suite, std::size_t index) {
  const auto& [id, prog] = suite.programs.at(index);
  return ProgramUnit::fromSource(id, prog.serialize());
}

/// Scriptable backend for cache/batch tests; counts real invocations.
class FakeBackend final : public EvaluationBackend {
public:
  using EvalFn = std::function<long long(const ProgramUnit&,
                                         const PassSequence&)>;

  explicit FakeBackend(EvalFn fn, std::vector<PassId> passes = {{"A"}, {"B"}})
      : fn_(std::move(fn)), universe_(std::move(passes)), id_("fake") {}

  const std::string& id() const override { return id_; }
  const PassUniverse& universe() const override { return universe_; }
  long long evaluate(const ProgramUnit& p,
                     const PassSequence& s) const override {
    ++calls_;
    return fn_(p, s);
  }
  long long baselineCount(const ProgramUnit& p) const override {
    return evaluate(p, PassSequence{});
  }
  FeatureVector rawFeatures(const ProgramUnit&) const override {
    return {1.0};
  }
  int featureSchemaVersion() const override { return 99; }

  long long calls() const { return calls_.load(); }

private:
  EvalFn fn_;
  PassUniverse universe_;
  std::string id_;
  mutable std::atomic<long long> calls_{0};
};

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("passtune-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

} // namespace passtune::test

#endif // PASSTUNE_TESTS_TESTUTIL_H
