//===-- Knowledge.cpp - The four-part pass knowledge base -----------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Knowledge.h"

#include "passtune/Rng.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace passtune {

using nlohmann::json;

namespace {
constexpr int kKbSchemaVersion = 1;
}

int PassGroups::groupIndex(const PassId& p) const {
  auto it = groupOf.find(p);
  return it == groupOf.end() ? -1 : it->second;
}

std::vector<PassId> PassGroups::members(const PassUniverse& universe,
                                        int g) const {
  std::vector<PassId> out;
  for (const PassId& p : universe.passes())
    if (groupIndex(p) == g)
      out.push_back(p);
  return out;
}

std::vector<std::pair<PassId, double>>
SynergyGraph::successors(const PassId& from) const {
  std::vector<std::pair<PassId, double>> out;
  // Edges are keyed (from, to) in name order, so the range scan is ordered.
  for (auto it = edges.lower_bound({from, PassId{""}});
       it != edges.end() && it->first.first == from; ++it)
    out.emplace_back(it->first.second, it->second.weight);
  return out;
}

double SynergyGraph::totalOutWeight(const PassId& from) const {
  double total = 0.0;
  for (auto it = edges.lower_bound({from, PassId{""}});
       it != edges.end() && it->first.first == from; ++it)
    total += it->second.weight;
  return total;
}

void PassKnowledgeBase::validate() const {
  if (universe.size() == 0)
    throw DataError("knowledge base: empty pass universe");
  const std::size_t n = static_cast<std::size_t>(progModel.k);
  if (progModel.centroids.size() != n || progModel.k < 1)
    throw DataError("knowledge base: malformed program model");
  if (behavioral.size() != universe.size())
    throw DataError("knowledge base: behavioral vectors do not cover the "
                    "pass universe");
  for (const BehavioralVector& bv : behavioral) {
    if (!universe.contains(bv.pass))
      throw DataError("knowledge base: behavioral vector for unknown pass '" +
                      bv.pass.name + "'");
    if (bv.values.size() != n || bv.support.size() != n)
      throw DataError("knowledge base: behavioral vector for '" +
                      bv.pass.name + "' has wrong dimension");
    for (double v : bv.values)
      if (!std::isfinite(v))
        throw DataError("knowledge base: non-finite behavioral value for '" +
                        bv.pass.name + "'");
  }
  if (groups.groupOf.size() != universe.size())
    throw DataError("knowledge base: pass groups do not partition the "
                    "universe");
  for (const auto& [pass, g] : groups.groupOf) {
    if (!universe.contains(pass))
      throw DataError("knowledge base: grouped pass '" + pass.name +
                      "' not in universe");
    if (g < 0 || g >= groups.k)
      throw DataError("knowledge base: group index out of range for '" +
                      pass.name + "'");
  }
  for (const auto& [key, edge] : synergy.edges) {
    if (!universe.contains(key.first) || !universe.contains(key.second))
      throw DataError("knowledge base: synergy edge over unknown pass");
    if (edge.count < 1)
      throw DataError("knowledge base: synergy edge with count < 1");
    if (!(edge.weight > 0.0 && edge.weight <= 1.0))
      throw DataError("knowledge base: synergy weight outside (0, 1]");
  }
  if (prototypes.sequences.size() != n || prototypes.scores.size() != n)
    throw DataError("knowledge base: prototype library does not cover all "
                    "prototypes");
  for (const PassSequence& seq : prototypes.sequences) {
    if (static_cast<int>(seq.size()) != seqLen)
      throw DataError("knowledge base: prototype sequence length differs "
                      "from seq_len");
    for (const PassId& p : seq.passes)
      if (!universe.contains(p))
        throw DataError("knowledge base: prototype sequence uses unknown "
                        "pass '" + p.name + "'");
  }
}

//===----------------------------------------------------------------------===//
// Behavioral vectors
//===----------------------------------------------------------------------===//

std::vector<BehavioralVector>
computeBehavioralVectors(const std::vector<ProgramUnit>& corpus,
                         const std::vector<int>& labels, int prototypeCount,
                         const PassUniverse& universe, BatchEvaluator& eval) {
  if (labels.size() != corpus.size())
    throw DataError("behavioral vectors: assignment does not cover corpus");
  const std::size_t m = corpus.size();
  const std::size_t np = universe.size();

  // One batch: unoptimized counts, then every (program, single pass) pair.
  std::vector<EvalItem> items;
  items.reserve(m * (np + 1));
  for (const ProgramUnit& p : corpus)
    items.push_back({&p, PassSequence{}});
  for (std::size_t pi = 0; pi < np; ++pi) {
    PassSequence single;
    single.passes = {universe.at(pi)};
    for (const ProgramUnit& p : corpus)
      items.push_back({&p, single});
  }
  std::vector<EvalOutcome> results = eval.evaluateBatch(items);

  std::vector<BehavioralVector> out(np);
  for (std::size_t pi = 0; pi < np; ++pi) {
    BehavioralVector& bv = out[pi];
    bv.pass = universe.at(pi);
    bv.values.assign(prototypeCount, 0.0);
    bv.support.assign(prototypeCount, 0);

    std::vector<double> sum(prototypeCount, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const EvalOutcome& before = results[j];
      const EvalOutcome& after = results[m * (pi + 1) + j];
      int proto = labels[j];
      if (!before.ok()) {
        std::cerr << "[passtune] warning: unoptimized count failed for "
                  << corpus[j].id << ": " << before.error << "\n";
        continue;
      }
      if (before.count == 0) {
        std::cerr << "[passtune] note: skipping " << corpus[j].id
                  << " (zero unoptimized count)\n";
        continue;
      }
      double reduction = 0.0; // failed pass evaluations stay neutral
      if (after.ok()) {
        reduction = 100.0 *
                    static_cast<double>(before.count - after.count) /
                    static_cast<double>(before.count);
      } else {
        std::cerr << "[passtune] warning: pass " << bv.pass.name
                  << " failed on " << corpus[j].id << ": " << after.error
                  << "\n";
      }
      sum[proto] += reduction;
      ++bv.support[proto];
    }
    for (int i = 0; i < prototypeCount; ++i)
      if (bv.support[i] > 0)
        bv.values[i] = sum[i] / static_cast<double>(bv.support[i]);
  }
  return out;
}

//===----------------------------------------------------------------------===//
// Pass groups
//===----------------------------------------------------------------------===//

PassGroups computePassGroups(const std::vector<BehavioralVector>& behavioral,
                             std::uint64_t seed) {
  if (behavioral.size() < 2)
    throw DataError("pass groups: need at least 2 passes");

  std::vector<FeatureVector> points;
  points.reserve(behavioral.size());
  for (const BehavioralVector& bv : behavioral)
    points.push_back(bv.values); // magnitudes matter here: no normalization

  PassGroups groups;
  const int npass = static_cast<int>(behavioral.size());
  int k;
  if (npass < 3) {
    k = 1;
  } else {
    int kMin = 2;
    int kMax = std::min(12, npass - 1);
    k = kMin >= kMax ? kMax : elbowSelectK(points, kMin, kMax, seed);
  }

  auto [model, assignment] = kmeansFit(points, k, seed);
  groups.k = k;
  groups.centroids = model.centroids;
  for (std::size_t i = 0; i < behavioral.size(); ++i)
    groups.groupOf[behavioral[i].pass] = assignment.labels[i];
  return groups;
}

//===----------------------------------------------------------------------===//
// Synergy graph
//===----------------------------------------------------------------------===//

SynergyGraph mineSynergyGraph(const std::vector<ProgramUnit>& corpus,
                              const PassUniverse& universe,
                              BatchEvaluator& eval, long long pairBudget,
                              std::uint64_t seed) {
  const std::size_t m = corpus.size();
  const std::size_t np = universe.size();
  SynergyGraph graph;
  graph.corpusSize = static_cast<long long>(m);
  if (m == 0 || np == 0)
    return graph;

  // Self-pairs are included: a pass may enable a second application of
  // itself. Under a budget, each ordered pair checks a uniform sample of
  // programs; otherwise every program.
  const long long totalPairs = static_cast<long long>(np * np);
  long long perPair = static_cast<long long>(m);
  if (pairBudget > 0)
    perPair = std::max<long long>(1, pairBudget / totalPairs);

  Rng rng(subSeed(seed, 0x53594e)); // sampling stream
  std::vector<std::size_t> sample(m);

  struct PairJob {
    std::size_t a, b;
    std::vector<std::size_t> programs;
  };
  std::vector<PairJob> pairJobs;
  pairJobs.reserve(np * np);
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = 0; b < np; ++b) {
      PairJob job{a, b, {}};
      if (perPair >= static_cast<long long>(m)) {
        job.programs.resize(m);
        for (std::size_t j = 0; j < m; ++j)
          job.programs[j] = j;
      } else {
        // Partial Fisher-Yates over program indices.
        for (std::size_t j = 0; j < m; ++j)
          sample[j] = j;
        for (long long j = 0; j < perPair; ++j) {
          std::size_t pick = j + rng.nextBelow(m - j);
          std::swap(sample[j], sample[pick]);
          job.programs.push_back(sample[j]);
        }
      }
      pairJobs.push_back(std::move(job));
    }
  }

  // Single-pass and unoptimized counts are shared with the behavioral-vector
  // stage through the cache, so this batch mostly adds only the pair runs.
  std::vector<EvalItem> items;
  for (const ProgramUnit& p : corpus)
    items.push_back({&p, PassSequence{}});
  for (std::size_t b = 0; b < np; ++b) {
    PassSequence single;
    single.passes = {universe.at(b)};
    for (const ProgramUnit& p : corpus)
      items.push_back({&p, single});
  }
  std::size_t pairBase = items.size();
  for (const PairJob& job : pairJobs) {
    PassSequence pair;
    pair.passes = {universe.at(job.a), universe.at(job.b)};
    for (std::size_t j : job.programs)
      items.push_back({&corpus[j], pair});
  }
  std::vector<EvalOutcome> results = eval.evaluateBatch(items);

  auto emptyCount = [&](std::size_t j) { return results[j]; };
  auto singleCount = [&](std::size_t b, std::size_t j) {
    return results[m * (b + 1) + j];
  };

  std::size_t cursor = pairBase;
  for (const PairJob& job : pairJobs) {
    for (std::size_t j : job.programs) {
      const EvalOutcome& pairR = results[cursor++];
      const EvalOutcome& bAlone = singleCount(job.b, j);
      const EvalOutcome& nothing = emptyCount(j);
      if (!pairR.ok() || !bAlone.ok() || !nothing.ok()) {
        std::cerr << "[passtune] warning: synergy check skipped for ("
                  << universe.at(job.a).name << ", "
                  << universe.at(job.b).name << ") on " << corpus[j].id
                  << "\n";
        continue;
      }
      if (pairR.count < bAlone.count && bAlone.count < nothing.count) {
        SynergyEdge& e =
            graph.edges[{universe.at(job.a), universe.at(job.b)}];
        ++e.count;
      }
    }
  }
  for (auto& [key, edge] : graph.edges)
    edge.weight =
        static_cast<double>(edge.count) / static_cast<double>(m);
  return graph;
}

//===----------------------------------------------------------------------===//
// Serialization
//===----------------------------------------------------------------------===//

std::string kbToJsonText(const PassKnowledgeBase& kb) {
  json j;
  j["schema_version"] = kKbSchemaVersion;

  json universe = json::array();
  for (const PassId& p : kb.universe.passes())
    universe.push_back(p.name);
  j["universe"] = universe;
  j["seq_len"] = kb.seqLen;

  json model;
  model["k"] = kb.progModel.k;
  model["seed"] = kb.progModel.seed;
  model["inertia"] = kb.progModel.inertia;
  model["schema_version"] = kb.progModel.schemaVersion;
  model["centroids"] = kb.progModel.centroids;
  j["prog_model"] = model;

  json behavioral = json::array();
  for (const BehavioralVector& bv : kb.behavioral) {
    json b;
    b["pass"] = bv.pass.name;
    b["values"] = bv.values;
    b["support"] = bv.support;
    behavioral.push_back(b);
  }
  j["behavioral"] = behavioral;

  json groups;
  groups["k"] = kb.groups.k;
  groups["centroids"] = kb.groups.centroids;
  json groupOf = json::object();
  for (const auto& [pass, g] : kb.groups.groupOf)
    groupOf[pass.name] = g;
  groups["group_of"] = groupOf;
  j["groups"] = groups;

  json synergy;
  synergy["corpus_size"] = kb.synergy.corpusSize;
  json edges = json::array();
  for (const auto& [key, edge] : kb.synergy.edges) {
    json e;
    e["from"] = key.first.name;
    e["to"] = key.second.name;
    e["count"] = edge.count;
    e["weight"] = edge.weight;
    edges.push_back(e);
  }
  synergy["edges"] = edges;
  j["synergy"] = synergy;

  json prototypes;
  json seqs = json::array();
  for (const PassSequence& seq : kb.prototypes.sequences) {
    json s = json::array();
    for (const PassId& p : seq.passes)
      s.push_back(p.name);
    seqs.push_back(s);
  }
  prototypes["sequences"] = seqs;
  prototypes["scores"] = kb.prototypes.scores;
  j["prototypes"] = prototypes;

  json prov;
  prov["corpus_digest"] = kb.provenance.corpusDigest;
  prov["program_digests"] = kb.provenance.programDigests;
  prov["config"] =
      kb.provenance.configJson.empty()
          ? json::object()
          : json::parse(kb.provenance.configJson);
  prov["seed"] = kb.provenance.seed;
  prov["built_at"] = kb.provenance.builtAt;
  prov["backfilled_prototypes"] = kb.provenance.backfilledPrototypes;
  j["provenance"] = prov;

  return j.dump(2) + "\n";
}

PassKnowledgeBase kbFromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt knowledge base: ") + e.what());
  }
  try {
    int version = j.at("schema_version").get<int>();
    if (version != kKbSchemaVersion)
      throw DataError("knowledge base schema version " +
                      std::to_string(version) + " is not supported (expected " +
                      std::to_string(kKbSchemaVersion) + ")");

    PassKnowledgeBase kb;
    std::vector<PassId> passes;
    for (const json& p : j.at("universe"))
      passes.push_back({p.get<std::string>()});
    kb.universe = PassUniverse(std::move(passes));
    kb.seqLen = j.at("seq_len").get<int>();

    const json& model = j.at("prog_model");
    kb.progModel.k = model.at("k").get<int>();
    kb.progModel.seed = model.at("seed").get<std::uint64_t>();
    kb.progModel.inertia = model.at("inertia").get<double>();
    kb.progModel.schemaVersion = model.at("schema_version").get<int>();
    kb.progModel.centroids =
        model.at("centroids").get<std::vector<FeatureVector>>();

    for (const json& b : j.at("behavioral")) {
      BehavioralVector bv;
      bv.pass.name = b.at("pass").get<std::string>();
      bv.values = b.at("values").get<std::vector<double>>();
      bv.support = b.at("support").get<std::vector<long long>>();
      kb.behavioral.push_back(std::move(bv));
    }

    const json& groups = j.at("groups");
    kb.groups.k = groups.at("k").get<int>();
    kb.groups.centroids =
        groups.at("centroids").get<std::vector<std::vector<double>>>();
    for (auto& [name, g] : groups.at("group_of").items())
      kb.groups.groupOf[PassId{name}] = g.get<int>();

    const json& synergy = j.at("synergy");
    kb.synergy.corpusSize = synergy.at("corpus_size").get<long long>();
    for (const json& e : synergy.at("edges")) {
      SynergyEdge edge;
      edge.count = e.at("count").get<long long>();
      edge.weight = e.at("weight").get<double>();
      kb.synergy.edges[{PassId{e.at("from").get<std::string>()},
                        PassId{e.at("to").get<std::string>()}}] = edge;
    }

    const json& prototypes = j.at("prototypes");
    for (const json& s : prototypes.at("sequences")) {
      PassSequence seq;
      seq.origin = Origin::prototype;
      for (const json& p : s)
        seq.passes.push_back({p.get<std::string>()});
      kb.prototypes.sequences.push_back(std::move(seq));
    }
    kb.prototypes.scores =
        prototypes.at("scores").get<std::vector<double>>();

    const json& prov = j.at("provenance");
    kb.provenance.corpusDigest = prov.at("corpus_digest").get<std::string>();
    kb.provenance.programDigests =
        prov.at("program_digests").get<std::vector<std::string>>();
    kb.provenance.configJson = prov.at("config").dump();
    kb.provenance.seed = prov.at("seed").get<std::uint64_t>();
    kb.provenance.builtAt = prov.at("built_at").get<std::string>();
    kb.provenance.backfilledPrototypes =
        prov.at("backfilled_prototypes").get<std::vector<int>>();

    kb.validate();
    return kb;
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt knowledge base: ") + e.what());
  }
}

void saveKb(const PassKnowledgeBase& kb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write knowledge base: " + path);
  out << kbToJsonText(kb);
}

PassKnowledgeBase loadKb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open knowledge base: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return kbFromJsonText(ss.str());
}

} // namespace passtune
