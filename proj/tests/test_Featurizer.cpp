//===-- test_Featurizer.cpp - IR scanning and normalization ---------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Featurizer.h"

#include "passtune/Rng.h"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace passtune;

namespace {

std::string readFixture(const std::string& name) {
  std::ifstream in(std::string(PASSTUNE_TEST_DIR) + "/fixtures/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("schema is frozen at 26 features") {
  const FeatureSchema& s = irFeatureSchema();
  CHECK(s.version == 1);
  CHECK(s.dim() == 26);
  CHECK(s.names.front() == "total_insts");
  CHECK(s.names.back() == "max_block_size");
}

TEST_CASE("minimal module: one define, two br, three instructions") {
  const char* ir = R"(define void @f() {
entry:
  br label %a
a:
  br label %b
b:
  ret void
}
)";
  ProgramUnit p = ProgramUnit::fromSource("mini", ir);
  FeatureVector v = extractIrFeatures(p);
  const FeatureSchema& s = irFeatureSchema();
  auto at = [&](const char* name) {
    for (std::size_t i = 0; i < s.names.size(); ++i)
      if (s.names[i] == name)
        return v[i];
    FAIL("unknown feature");
    return 0.0;
  };
  CHECK(at("functions") == 1);
  CHECK(at("br") == 2);
  CHECK(at("total_insts") == 3);
  CHECK(at("condbr") == 0);
  CHECK(at("basic_blocks") == 3);
}

TEST_CASE("fixture vector matches the manual token count") {
  ProgramUnit p = ProgramUnit::fromSource("tiny.ll", readFixture("tiny.ll"));
  FeatureVector v = extractIrFeatures(p);
  // Hand count of tests/fixtures/tiny.ll, feature by feature in schema
  // order: f() has blocks entry(5), then(5), done(2); g() has start(2).
  FeatureVector expected = {
      14,  // total_insts
      2,   // br
      1,   // condbr
      0,   // switch
      2,   // ret
      1,   // call
      1,   // phi
      0,   // select
      1,   // load
      2,   // store
      1,   // alloca
      1,   // getelementptr
      1,   // icmp
      0,   // fcmp
      1,   // add
      0,   // sub
      1,   // mul
      0,   // div
      0,   // logic
      0,   // shift
      0,   // ext
      0,   // bitcast
      4,   // basic_blocks
      2,   // functions
      3.5, // mean_block_size
      5,   // max_block_size
  };
  REQUIRE(v.size() == expected.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    INFO("feature " << irFeatureSchema().names[i]);
    CHECK(v[i] == expected[i]);
  }
}

TEST_CASE("switch tables spanning lines count as one instruction") {
  const char* ir = R"(define i32 @s(i32 %x) {
e:
  switch i32 %x, label %d [
    i32 0, label %a
    i32 1, label %b
  ]
a:
  ret i32 0
b:
  ret i32 1
d:
  ret i32 2
}
)";
  IrScanCounts c = scanIr(ir);
  CHECK(c.switchInsts == 1);
  CHECK(c.totalInsts == 4);
  CHECK(c.basicBlocks == 4);
}

TEST_CASE("tail calls and division/logic/shift/ext buckets") {
  const char* ir = R"(define i64 @b(i64 %x, i64 %y) {
e:
  %q = sdiv i64 %x, %y
  %m = and i64 %q, 7
  %s = shl i64 %m, 2
  %t = trunc i64 %s to i32
  %u = zext i32 %t to i64
  %r = tail call i64 @b(i64 %u, i64 1)
  ret i64 %r
}
)";
  IrScanCounts c = scanIr(ir);
  CHECK(c.div == 1);
  CHECK(c.logic == 1);
  CHECK(c.shift == 1);
  CHECK(c.ext == 2);
  CHECK(c.call == 1);
  CHECK(c.totalInsts == 7);
}

TEST_CASE("empty or instruction-free source is an error") {
  CHECK_THROWS_AS(extractIrFeatures(ProgramUnit::fromSource("e", "")),
                  DataError);
  CHECK_THROWS_AS(extractIrFeatures(ProgramUnit::fromSource(
                      "no-insts", "; just a comment\ndeclare void @x()\n")),
                  DataError);
}

TEST_CASE("extraction is a pure function of the source bytes") {
  std::string ir = readFixture("tiny.ll");
  FeatureVector a = extractIrFeatures(ProgramUnit::fromSource("a", ir));
  FeatureVector b = extractIrFeatures(ProgramUnit::fromSource("b", ir));
  CHECK(a == b);
}

TEST_CASE("l1 normalization") {
  SUBCASE("proportions") {
    FeatureVector v = l1Normalize({2, 2, 4});
    CHECK(v == FeatureVector{0.25, 0.25, 0.5});
  }
  SUBCASE("zero vector unchanged") {
    CHECK(l1Normalize({0, 0, 0}) == FeatureVector{0, 0, 0});
  }
  SUBCASE("single dimension") { CHECK(l1Normalize({5}) == FeatureVector{1.0}); }
  SUBCASE("negative component rejected") {
    CHECK_THROWS_AS(l1Normalize({1, -1}), DataError);
  }
  SUBCASE("output sums to one") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      FeatureVector v(8);
      for (double& x : v)
        x = static_cast<double>(rng.nextBelow(1000));
      bool allZero = true;
      for (double x : v)
        allZero &= x == 0.0;
      if (allZero)
        continue;
      FeatureVector n = l1Normalize(v);
      double sum = 0.0;
      for (double x : n)
        sum += x;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("scale invariance: power-of-two scaling is exact") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      FeatureVector v(6);
      for (double& x : v)
        x = static_cast<double>(1 + rng.nextBelow(500));
      double c = std::pow(2.0, 1 + static_cast<int>(rng.nextBelow(8)));
      FeatureVector scaled(v.size());
      for (std::size_t i = 0; i < v.size(); ++i)
        scaled[i] = c * v[i];
      CHECK(l1Normalize(scaled) == l1Normalize(v));
    }
  }
  SUBCASE("scale invariance: arbitrary positive scaling within 1e-9") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      FeatureVector v(6);
      for (double& x : v)
        x = static_cast<double>(1 + rng.nextBelow(500));
      double c = 0.1 + rng.nextDouble() * 9.9;
      FeatureVector scaled(v.size());
      for (std::size_t i = 0; i < v.size(); ++i)
        scaled[i] = c * v[i];
      FeatureVector a = l1Normalize(scaled), b = l1Normalize(v);
      for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
    }
  }
}
