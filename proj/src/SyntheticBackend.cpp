//===-- SyntheticBackend.cpp - Deterministic desk-scale oracle ------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/SyntheticBackend.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace passtune {

using nlohmann::json;

const std::vector<std::string>& syntheticCategories() {
  static const std::vector<std::string> cats = {"arith", "branch", "dead",
                                                "mem"};
  return cats;
}

void SyntheticPassSpec::validate() const {
  if (!isValidPassName(id.name))
    throw DataError("invalid synthetic pass id: '" + id.name + "'");
  const auto& cats = syntheticCategories();
  if (std::find(cats.begin(), cats.end(), targetCategory) == cats.end())
    throw DataError("pass '" + id.name + "': unknown category '" +
                    targetCategory + "'");
  if (!(rate > 0.0 && rate <= 1.0))
    throw DataError("pass '" + id.name + "': rate must be in (0, 1]");
}

long long SyntheticProgram::instructionCount() const {
  long long total = base;
  for (const auto& [cat, n] : pools)
    total += n;
  return total;
}

std::string SyntheticProgram::serialize() const {
  json j;
  j["base"] = base;
  json p = json::object();
  for (const auto& [cat, n] : pools)
    if (n != 0)
      p[cat] = n;
  j["pools"] = p;
  return j.dump();
}

SyntheticProgram SyntheticProgram::parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad synthetic program: ") + e.what());
  }
  SyntheticProgram p;
  p.base = j.value("base", 0LL);
  if (p.base < 0)
    throw DataError("synthetic program: base must be >= 0");
  if (j.contains("pools")) {
    for (auto& [cat, n] : j.at("pools").items()) {
      long long v = n.get<long long>();
      if (v < 0)
        throw DataError("synthetic program: pool '" + cat +
                        "' must be >= 0");
      p.pools[cat] = v;
    }
  }
  return p;
}

SyntheticProgram applySyntheticPass(SyntheticProgram state,
                                    const SyntheticPassSpec& spec) {
  double rate = spec.rate;
  if (spec.requiresFlag && state.flags.count(*spec.requiresFlag))
    rate = std::min(1.0, 2.0 * rate);
  auto it = state.pools.find(spec.targetCategory);
  if (it != state.pools.end() && it->second > 0) {
    long long removed = static_cast<long long>(
        std::floor(rate * static_cast<double>(it->second)));
    it->second -= removed;
  }
  if (spec.setsFlag)
    state.flags.insert(*spec.setsFlag);
  return state;
}

SyntheticSuite SyntheticSuite::fromJsonText(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad suite file: ") + e.what());
  }
  try {
    SyntheticSuite suite;
    suite.name = j.value("name", "");
    for (const json& pj : j.at("passes")) {
      SyntheticPassSpec spec;
      spec.id.name = pj.at("id").get<std::string>();
      spec.targetCategory = pj.at("target").get<std::string>();
      spec.rate = pj.at("rate").get<double>();
      if (pj.contains("requires_flag"))
        spec.requiresFlag = pj.at("requires_flag").get<std::string>();
      if (pj.contains("sets_flag"))
        spec.setsFlag = pj.at("sets_flag").get<std::string>();
      spec.validate();
      suite.passes.push_back(std::move(spec));
    }
    for (const json& b : j.at("baseline"))
      suite.baseline.push_back({b.get<std::string>()});
    for (const json& pj : j.at("programs")) {
      SyntheticProgram prog;
      prog.base = pj.at("base").get<long long>();
      if (pj.contains("pools"))
        for (auto& [cat, n] : pj.at("pools").items())
          prog.pools[cat] = n.get<long long>();
      suite.programs.emplace_back(pj.at("id").get<std::string>(),
                                  std::move(prog));
    }
    return suite;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad suite file: ") + e.what());
  }
}

SyntheticSuite SyntheticSuite::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open suite file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fromJsonText(ss.str());
}

std::string SyntheticSuite::toJsonText() const {
  json j;
  j["schema_version"] = 1;
  j["name"] = name;
  json passesJson = json::array();
  for (const SyntheticPassSpec& spec : passes) {
    json pj;
    pj["id"] = spec.id.name;
    pj["target"] = spec.targetCategory;
    pj["rate"] = spec.rate;
    if (spec.requiresFlag)
      pj["requires_flag"] = *spec.requiresFlag;
    if (spec.setsFlag)
      pj["sets_flag"] = *spec.setsFlag;
    passesJson.push_back(pj);
  }
  j["passes"] = passesJson;
  json baselineJson = json::array();
  for (const PassId& p : baseline)
    baselineJson.push_back(p.name);
  j["baseline"] = baselineJson;
  json programsJson = json::array();
  for (const auto& [id, prog] : programs) {
    json pj;
    pj["id"] = id;
    pj["base"] = prog.base;
    json pools = json::object();
    for (const auto& [cat, n] : prog.pools)
      pools[cat] = n;
    pj["pools"] = pools;
    programsJson.push_back(pj);
  }
  j["programs"] = programsJson;
  return j.dump(2) + "\n";
}

void SyntheticSuite::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write suite file: " + path);
  out << toJsonText();
}

std::vector<ProgramUnit> SyntheticSuite::programUnits() const {
  std::vector<ProgramUnit> units;
  units.reserve(programs.size());
  for (const auto& [id, prog] : programs)
    units.push_back(ProgramUnit::fromSource(id, prog.serialize()));
  return units;
}

PassUniverse SyntheticSuite::universe() const {
  std::vector<PassId> ids;
  ids.reserve(passes.size());
  for (const SyntheticPassSpec& spec : passes)
    ids.push_back(spec.id);
  return PassUniverse(std::move(ids));
}

SyntheticBackend::SyntheticBackend(SyntheticSuite suite)
    : suite_(std::move(suite)), universe_(suite_.universe()),
      id_("synthetic:" + fnv1aHex(suite_.toJsonText())) {
  for (const SyntheticPassSpec& spec : suite_.passes)
    specs_[spec.id.name] = &spec;
  for (const PassId& p : suite_.baseline)
    specFor(p); // baseline passes must exist
}

const SyntheticPassSpec& SyntheticBackend::specFor(const PassId& id) const {
  auto it = specs_.find(id.name);
  if (it == specs_.end())
    throw BackendError("unknown pass '" + id.name + "' for synthetic suite '" +
                       suite_.name + "'");
  return *it->second;
}

long long SyntheticBackend::evaluate(const ProgramUnit& p,
                                     const PassSequence& seq) const {
  SyntheticProgram state = SyntheticProgram::parse(p.source);
  for (const PassId& pass : seq.passes)
    state = applySyntheticPass(std::move(state), specFor(pass));
  return state.instructionCount();
}

long long SyntheticBackend::baselineCount(const ProgramUnit& p) const {
  PassSequence seq;
  seq.passes = suite_.baseline;
  return evaluate(p, seq);
}

FeatureVector SyntheticBackend::rawFeatures(const ProgramUnit& p) const {
  SyntheticProgram state = SyntheticProgram::parse(p.source);
  FeatureVector v;
  v.push_back(static_cast<double>(state.base));
  for (const std::string& cat : syntheticCategories()) {
    auto it = state.pools.find(cat);
    v.push_back(it == state.pools.end() ? 0.0
                                        : static_cast<double>(it->second));
  }
  return v;
}

} // namespace passtune
