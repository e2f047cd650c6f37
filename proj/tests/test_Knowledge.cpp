//===-- test_Knowledge.cpp - Behavioral vectors, groups, synergy, KB I/O --===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Harness.h"

#include "Oracles.h"
#include "TestUtil.h"

#include <doctest.h>

#include <fstream>

#include <json.hpp>

using namespace passtune;
using namespace passtune::test;

namespace {

std::vector<BehavioralVector>
behavioralOf(const SyntheticSuite& suite, const std::vector<int>& labels,
             int prototypes) {
  SyntheticBackend backend(suite);
  EvalCache cache;
  BatchEvaluator eval(backend, cache, 2);
  std::vector<ProgramUnit> corpus = suite.programUnits();
  return computeBehavioralVectors(corpus, labels, prototypes,
                                  backend.universe(), eval);
}

} // namespace

TEST_CASE("behavioral vectors match the direct definition") {
  SyntheticSuite suite = sixPassSuite(); // p0 -> prototype 0, p1 -> 1
  std::vector<int> labels = {0, 1};
  std::vector<BehavioralVector> got = behavioralOf(suite, labels, 2);
  oracle::BehavioralTruth want = oracle::behavioralBruteForce(suite, labels, 2);

  REQUIRE(got.size() == suite.passes.size());
  for (const BehavioralVector& bv : got) {
    const std::vector<double>& expected = want.values.at(bv.pass.name);
    REQUIRE(bv.values.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      CHECK(bv.values[i] == expected[i]); // same formula, exact match
    CHECK(bv.support == want.support.at(bv.pass.name));
  }
}

TEST_CASE("worked example: single-program prototype component") {
  SyntheticSuite suite = flagPairSuite();
  std::vector<BehavioralVector> got = behavioralOf(suite, {0}, 1);
  // 34 -> 30 under either pass alone: 100 * 4 / 34.
  double expected = 100.0 * 4.0 / 34.0;
  CHECK(got[0].pass.name == "A");
  CHECK(got[0].values[0] == expected);
  CHECK(got[1].pass.name == "B");
  CHECK(got[1].values[0] == expected);
  CHECK(got[0].values[0] == doctest::Approx(11.7647).epsilon(1e-4));
}

TEST_CASE("25 percent single-program reduction example") {
  SyntheticSuite suite;
  suite.name = "quarter";
  SyntheticPassSpec x;
  x.id = {"X"};
  x.targetCategory = "dead";
  x.rate = 0.25;
  suite.passes = {x};
  suite.baseline = {};
  SyntheticProgram p;
  p.base = 0;
  p.pools = {{"dead", 200}};
  suite.programs.emplace_back("p", p);
  // before 200, after 150.
  std::vector<BehavioralVector> got = behavioralOf(suite, {0}, 1);
  CHECK(got[0].values[0] == 25.0);
}

TEST_CASE("a pass that never fires has an all-zero vector") {
  SyntheticSuite suite = flagPairSuite();
  SyntheticPassSpec noop;
  noop.id = {"N"};
  noop.targetCategory = "arith"; // no program has an arith pool
  noop.rate = 0.5;
  suite.passes.push_back(noop);
  std::vector<BehavioralVector> got = behavioralOf(suite, {0}, 1);
  CHECK(got[2].pass.name == "N");
  CHECK(got[2].values == std::vector<double>{0.0});
  CHECK(got[2].support == std::vector<long long>{1});
}

TEST_CASE("support per pass sums to the corpus size") {
  SynthGenOptions gen;
  gen.passes = 6;
  gen.programs = 15;
  gen.prototypes = 3;
  gen.synergyPairs = 1;
  gen.seed = 44;
  SyntheticSuite suite = generateSuite(gen);
  std::vector<int> labels;
  for (int j = 0; j < gen.programs; ++j)
    labels.push_back(j % 3);
  std::vector<BehavioralVector> got = behavioralOf(suite, labels, 3);
  for (const BehavioralVector& bv : got) {
    long long total = 0;
    for (long long s : bv.support)
      total += s;
    CHECK(total == gen.programs);
  }
}

TEST_CASE("failed pass evaluations contribute a neutral zero") {
  // Pass B fails outright; its vector must stay zero instead of poisoning
  // the means, and the program still counts toward support.
  FakeBackend backend(
      [](const ProgramUnit&, const PassSequence& s) -> long long {
        if (s.size() == 1 && s.passes[0].name == "B")
          throw BackendError("broken pass");
        return s.size() == 0 ? 100 : 80;
      });
  EvalCache cache;
  BatchEvaluator eval(backend, cache, 1);
  std::vector<ProgramUnit> corpus = {ProgramUnit::fromSource("p", "x")};
  std::vector<BehavioralVector> got =
      computeBehavioralVectors(corpus, {0}, 1, backend.universe(), eval);
  CHECK(got[0].pass.name == "A");
  CHECK(got[0].values[0] == 20.0);
  CHECK(got[1].pass.name == "B");
  CHECK(got[1].values[0] == 0.0);
  CHECK(got[1].support[0] == 1);
}

TEST_CASE("pass groups") {
  SUBCASE("identical specs land in the same group") {
    std::vector<BehavioralVector> behavioral(4);
    behavioral[0] = {{"A"}, {10.0, 0.0}, {1, 1}};
    behavioral[1] = {{"B"}, {10.0, 0.0}, {1, 1}};
    behavioral[2] = {{"C"}, {0.0, 9.0}, {1, 1}};
    behavioral[3] = {{"D"}, {0.0, 9.0}, {1, 1}};
    PassGroups groups = computePassGroups(behavioral, 42);
    CHECK(groups.groupOf.at({"A"}) == groups.groupOf.at({"B"}));
    CHECK(groups.groupOf.at({"C"}) == groups.groupOf.at({"D"}));
    CHECK(groups.groupOf.at({"A"}) != groups.groupOf.at({"C"}));
    CHECK(groups.k == 2);
  }
  SUBCASE("two passes collapse to a single group") {
    std::vector<BehavioralVector> behavioral(2);
    behavioral[0] = {{"A"}, {10.0}, {1}};
    behavioral[1] = {{"B"}, {-5.0}, {1}};
    PassGroups groups = computePassGroups(behavioral, 42);
    CHECK(groups.k == 1);
    CHECK(groups.groupOf.at({"A"}) == 0);
    CHECK(groups.groupOf.at({"B"}) == 0);
  }
  SUBCASE("fewer than two passes is an error") {
    std::vector<BehavioralVector> one(1);
    one[0] = {{"A"}, {1.0}, {1}};
    CHECK_THROWS_AS(computePassGroups(one, 42), DataError);
  }
  SUBCASE("well separated families are recovered from a real suite") {
    // Two dead-pool shrinkers and two branch-pool shrinkers over programs
    // that are dead-heavy (prototype 0) and branch-heavy (prototype 1).
    SyntheticSuite suite;
    suite.name = "families";
    for (int i = 0; i < 4; ++i) {
      SyntheticPassSpec spec;
      spec.id = {std::string(1, static_cast<char>('A' + i))};
      spec.targetCategory = i < 2 ? "dead" : "branch";
      spec.rate = i % 2 == 0 ? 0.5 : 0.375;
      suite.passes.push_back(spec);
    }
    suite.baseline = {PassId{"A"}};
    SyntheticProgram deadHeavy;
    deadHeavy.base = 10;
    deadHeavy.pools = {{"dead", 64}, {"branch", 2}};
    SyntheticProgram branchHeavy;
    branchHeavy.base = 10;
    branchHeavy.pools = {{"dead", 2}, {"branch", 64}};
    suite.programs.emplace_back("d", deadHeavy);
    suite.programs.emplace_back("b", branchHeavy);

    std::vector<BehavioralVector> behavioral = behavioralOf(suite, {0, 1}, 2);
    PassGroups groups = computePassGroups(behavioral, 42);
    CHECK(groups.k == 2);
    CHECK(groups.groupOf.at({"A"}) == groups.groupOf.at({"B"}));
    CHECK(groups.groupOf.at({"C"}) == groups.groupOf.at({"D"}));
    CHECK(groups.groupOf.at({"A"}) != groups.groupOf.at({"C"}));
  }
}

TEST_CASE("synergy graph equals brute-force enumeration") {
  SyntheticSuite suite = sixPassSuite();
  SyntheticBackend backend(suite);
  EvalCache cache;
  BatchEvaluator eval(backend, cache, 4);
  std::vector<ProgramUnit> corpus = suite.programUnits();

  SynergyGraph graph =
      mineSynergyGraph(corpus, backend.universe(), eval, 0, 42);
  auto want = oracle::synergyBruteForce(suite);

  CHECK(graph.corpusSize == 2);
  REQUIRE(graph.edges.size() == want.size());
  for (const auto& [key, count] : want) {
    auto it = graph.edges.find({PassId{key.first}, PassId{key.second}});
    REQUIRE(it != graph.edges.end());
    CHECK(it->second.count == count);
    CHECK(it->second.weight == double(count) / double(graph.corpusSize));
    CHECK(it->second.weight > 0.0);
    CHECK(it->second.weight <= 1.0);
  }

  SUBCASE("the planted flag-gated pair is present") {
    CHECK(graph.edges.count({PassId{"A"}, PassId{"B"}}) == 1);
  }
  SUBCASE("the reverse order also qualifies here, as the chain predicts") {
    // 26 < 30 < 34 holds for (B, A) on p0.
    CHECK(graph.edges.count({PassId{"B"}, PassId{"A"}}) == 1);
  }
}

TEST_CASE("strict inequality: a pass with no solo benefit gets no edges") {
  SyntheticSuite suite = flagPairSuite();
  suite.programs.clear();
  SyntheticProgram p;
  p.base = 10;
  p.pools = {{"dead", 8}}; // no branch pool: B alone is a no-op
  suite.programs.emplace_back("p", p);

  SyntheticBackend backend(suite);
  EvalCache cache;
  BatchEvaluator eval(backend, cache, 1);
  std::vector<ProgramUnit> corpus = suite.programUnits();
  SynergyGraph graph =
      mineSynergyGraph(corpus, backend.universe(), eval, 0, 42);
  CHECK(graph.edges.count({PassId{"A"}, PassId{"B"}}) == 0);
  CHECK(graph.edges.count({PassId{"B"}, PassId{"B"}}) == 0);
}

TEST_CASE("pair budget samples deterministically") {
  SynthGenOptions gen;
  gen.passes = 6;
  gen.programs = 10;
  gen.prototypes = 2;
  gen.synergyPairs = 1;
  gen.seed = 9;
  SyntheticSuite suite = generateSuite(gen);
  SyntheticBackend backend(suite);
  std::vector<ProgramUnit> corpus = suite.programUnits();

  auto mine = [&](long long budget, std::uint64_t seed) {
    EvalCache cache;
    BatchEvaluator eval(backend, cache, 2);
    return mineSynergyGraph(corpus, backend.universe(), eval, budget, seed);
  };

  SynergyGraph full = mine(0, 42);
  SynergyGraph generous = mine(1000000, 42);
  CHECK(full.edges.size() == generous.edges.size());

  SynergyGraph sampledA = mine(72, 42); // 2 programs per ordered pair
  SynergyGraph sampledB = mine(72, 42);
  CHECK(sampledA.edges.size() == sampledB.edges.size());
  for (const auto& [key, edge] : sampledA.edges) {
    auto it = sampledB.edges.find(key);
    REQUIRE(it != sampledB.edges.end());
    CHECK(it->second.count == edge.count);
    // A sampled count can never exceed the exhaustive count.
    CHECK(edge.count <= full.edges.at(key).count);
  }
}

TEST_CASE("knowledge base round-trip and validation") {
  TempDir dir("kb");
  SyntheticSuite suite = sixPassSuite();
  SyntheticBackend backend(suite);
  EvalCache cache;
  BuildConfig config;
  config.prototypes = 2;
  config.seqLen = 3;
  config.seed = 42;
  config.ga.popSize = 8;
  config.ga.generations = 6;
  PassKnowledgeBase kb = buildKb(suite.programUnits(), backend, cache, config);

  SUBCASE("save then load is lossless") {
    saveKb(kb, dir.file("kb.json"));
    PassKnowledgeBase loaded = loadKb(dir.file("kb.json"));
    CHECK(kbToJsonText(loaded) == kbToJsonText(kb));
    CHECK(loaded.prototypeCount() == 2);
    CHECK(loaded.seqLen == 3);
  }

  SUBCASE("rebuilding with the same seed is byte-identical") {
    EvalCache cache2;
    PassKnowledgeBase kb2 =
        buildKb(suite.programUnits(), backend, cache2, config);
    CHECK(kbToJsonText(kb) == kbToJsonText(kb2));
  }

  SUBCASE("truncated file is a clean error") {
    std::string text = kbToJsonText(kb);
    std::ofstream out(dir.file("trunc.json"));
    out << text.substr(0, text.size() / 2);
    out.close();
    CHECK_THROWS_AS(loadKb(dir.file("trunc.json")), DataError);
  }

  SUBCASE("unsupported schema version is rejected") {
    nlohmann::json j = nlohmann::json::parse(kbToJsonText(kb));
    j["schema_version"] = 99;
    std::ofstream out(dir.file("ver.json"));
    out << j.dump();
    out.close();
    CHECK_THROWS_AS(loadKb(dir.file("ver.json")), DataError);
  }

  SUBCASE("component/universe mismatch is rejected") {
    nlohmann::json j = nlohmann::json::parse(kbToJsonText(kb));
    j["behavioral"].erase(0);
    std::ofstream out(dir.file("mismatch.json"));
    out << j.dump();
    out.close();
    CHECK_THROWS_AS(loadKb(dir.file("mismatch.json")), DataError);
  }

  SUBCASE("missing file is a clean error") {
    CHECK_THROWS_AS(loadKb(dir.file("absent.json")), DataError);
  }
}
