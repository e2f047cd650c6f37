//===-- Harness.cpp - Command implementations behind the CLI --------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Harness.h"

#include "passtune/Featurizer.h"
#include "passtune/LlvmBackend.h"
#include "passtune/SyntheticBackend.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace passtune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string readFileOrThrow(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFileOrThrow(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write " + path);
  out << bytes;
}

json backendConfigJson(const BackendConfig& c) {
  json j;
  j["kind"] = backendKindName(c.kind);
  j["opt_path"] = c.optPath;
  j["count_method"] = c.countMethod == CountMethod::textualCount
                          ? "textual-count"
                          : "instcount-pass";
  j["pass_syntax"] = c.passSyntax == PassSyntax::autoDetect
                         ? "auto"
                         : (c.passSyntax == PassSyntax::legacy ? "legacy"
                                                               : "modern");
  j["timeout_s"] = c.timeoutSeconds;
  j["baseline_flag"] = c.baselineFlag;
  j["jobs"] = c.jobs;
  j["pass_list"] = c.passListPath;
  return j;
}

json gaConfigJson(const GAConfig& c) {
  json j;
  j["pop_size"] = c.popSize;
  j["generations"] = c.generations;
  j["top_k_init"] = c.topKInit;
  j["crossover_rate"] = c.crossoverRate;
  j["mutation_rate"] = c.mutationRate;
  j["candidate_blocks_q"] = c.candidateBlocksQ;
  j["elitism"] = c.elitism;
  j["tournament_size"] = c.tournamentSize;
  j["eval_budget"] = c.evalBudget;
  j["seed"] = c.seed;
  j["smart_init"] = c.smartInit;
  j["knowledge_crossover"] = c.knowledgeCrossover;
  j["knowledge_mutation"] = c.knowledgeMutation;
  j["mutation_accept_always"] = c.mutationAcceptAlways;
  return j;
}

// JSON has no infinity; failed searches serialize their fitness as null.
json fitnessJson(double f) {
  if (std::isfinite(f))
    return f;
  return nullptr;
}

std::string csvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

} // namespace

//===----------------------------------------------------------------------===//
// Backend opening and corpus loading
//===----------------------------------------------------------------------===//

BackendBundle openBackend(const BackendConfig& config,
                          const std::string& corpusPath) {
  BackendBundle bundle;
  if (config.kind == BackendKind::synthetic) {
    std::string path = corpusPath.empty() ? config.suitePath : corpusPath;
    if (path.empty())
      throw UsageError("synthetic backend needs a suite file (--corpus or "
                       "--suite)");
    SyntheticSuite suite = SyntheticSuite::load(path);
    auto backend = std::make_unique<SyntheticBackend>(std::move(suite));
    bundle.programs = backend->suite().programUnits();
    bundle.backend = std::move(backend);
    return bundle;
  }

  PassUniverse universe = config.passListPath.empty()
                              ? LlvmBackend::defaultUniverse()
                              : LlvmBackend::universeFromFile(
                                    config.passListPath);
  std::string optPath = LlvmBackend::resolveOptPath(config);
  if (!LlvmBackend::optAvailable(optPath))
    throw BackendError("LLVM opt not found at '" + optPath +
                       "' (set --opt or the PASSTUNE_OPT environment "
                       "variable)");
  bundle.backend = std::make_unique<LlvmBackend>(config, std::move(universe));

  if (!corpusPath.empty()) {
    if (!fs::is_directory(corpusPath))
      throw UsageError("llvm corpus must be a directory of .ll files: " +
                       corpusPath);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(corpusPath))
      if (entry.is_regular_file() && entry.path().extension() == ".ll")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files)
      bundle.programs.push_back(ProgramUnit::fromSource(
          f.filename().string(), readFileOrThrow(f.string())));
    if (bundle.programs.empty())
      throw DataError("no .ll files under " + corpusPath);
  }
  return bundle;
}

//===----------------------------------------------------------------------===//
// build-kb
//===----------------------------------------------------------------------===//

PassKnowledgeBase cmdBuildKb(const BuildKbOptions& opts, std::ostream& out) {
  BackendBundle bundle = openBackend(opts.backend, opts.corpusPath);
  if (bundle.programs.empty())
    throw DataError("empty corpus");

  BuildConfig build = opts.build;
  build.jobs = opts.backend.jobs;
  EvalCache cache;
  PassKnowledgeBase kb = buildKb(bundle.programs, *bundle.backend, cache,
                                 build);
  if (!opts.outPath.empty())
    saveKb(kb, opts.outPath);

  out << "knowledge base: " << kb.prototypeCount() << " prototypes, "
      << kb.groups.k << " pass groups, " << kb.synergy.edges.size()
      << " synergy edges over " << kb.universe.size() << " passes\n";
  out << "prototype scores:";
  for (double s : kb.prototypes.scores)
    out << " " << s;
  out << "\n";
  if (!opts.outPath.empty())
    out << "wrote " << opts.outPath << "\n";
  return kb;
}

//===----------------------------------------------------------------------===//
// tune
//===----------------------------------------------------------------------===//

namespace {

// Synthetic programs may be named by suite id or by a standalone JSON file.
ProgramUnit resolveProgram(const BackendBundle& bundle,
                           const BackendConfig& config,
                           const std::string& ref) {
  if (ref.empty())
    throw UsageError("missing --program");
  for (const ProgramUnit& p : bundle.programs)
    if (p.id == ref)
      return p;
  if (config.kind == BackendKind::synthetic) {
    if (!fs::exists(ref))
      throw UsageError("program '" + ref +
                       "' is neither a suite program id nor a file");
    json j = json::parse(readFileOrThrow(ref), nullptr, false);
    if (j.is_discarded())
      throw DataError("bad program file: " + ref);
    SyntheticProgram prog;
    prog.base = j.value("base", 0LL);
    if (j.contains("pools"))
      for (auto& [cat, n] : j.at("pools").items())
        prog.pools[cat] = n.get<long long>();
    std::string id = j.value("id", fs::path(ref).stem().string());
    return ProgramUnit::fromSource(id, prog.serialize());
  }
  return ProgramUnit::fromSource(fs::path(ref).filename().string(),
                                 readFileOrThrow(ref));
}

} // namespace

std::string tuneReportToJson(const TuneReport& report, bool includeTiming) {
  json j;
  j["program_id"] = report.programId;
  j["prototype"] = report.prototype;
  json seq = json::array();
  for (const PassId& p : report.bestSequence.passes)
    seq.push_back(p.name);
  j["best_sequence"] = seq;
  j["best_fitness"] = fitnessJson(report.bestFitness);
  json traj = json::array();
  for (double f : report.trajectory)
    traj.push_back(fitnessJson(f));
  j["trajectory"] = traj;
  j["backend_calls"] = report.backendCalls;
  if (includeTiming)
    j["wall_time_s"] = report.wallTimeSeconds;
  j["config"] = report.configJson.empty() ? json::object()
                                          : json::parse(report.configJson);
  return j.dump(2) + "\n";
}

TuneReport cmdTune(const TuneOptions& opts, std::ostream& out) {
  if (opts.kbPath.empty())
    throw UsageError("missing --kb");
  PassKnowledgeBase kb = loadKb(opts.kbPath);
  BackendBundle bundle = openBackend(opts.backend, opts.corpusPath);
  ProgramUnit program = resolveProgram(bundle, opts.backend, opts.programRef);

  EvalCache cache;
  TuneReport report = tune(program, kb, *bundle.backend, cache, opts.ga,
                           opts.backend.jobs);

  json config;
  config["kb"] = opts.kbPath;
  config["corpus"] = opts.corpusPath;
  config["program"] = opts.programRef;
  config["backend"] = backendConfigJson(opts.backend);
  config["ga"] = gaConfigJson(opts.ga);
  report.configJson = config.dump();

  out << "program " << report.programId << ": prototype "
      << report.prototype << ", best fitness " << report.bestFitness
      << " over " << report.backendCalls << " backend calls in "
      << std::fixed << std::setprecision(3) << report.wallTimeSeconds
      << "s\n";
  out.unsetf(std::ios::fixed);
  if (!opts.reportPath.empty()) {
    writeFileOrThrow(opts.reportPath, tuneReportToJson(report, opts.timing));
    out << "wrote " << opts.reportPath << "\n";
  }
  return report;
}

//===----------------------------------------------------------------------===//
// evaluate / ablate
//===----------------------------------------------------------------------===//

double summaryMean(const std::vector<EvalRow>& rows) {
  double sum = 0.0;
  long long n = 0;
  for (const EvalRow& r : rows) {
    if (r.flagged)
      continue;
    sum += r.overOz;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

namespace {

json summaryJson(const EvalSummary& summary) {
  json j;
  j["method"] = summary.method;
  j["mean_overoz"] = fitnessJson(summary.meanOverOz);
  j["excluded_rows"] = summary.excludedRows;
  json rows = json::array();
  for (const EvalRow& r : summary.rows) {
    json row;
    row["id"] = r.id;
    row["baseline"] = r.baseline;
    row["tuned"] = r.tuned;
    row["overoz"] = fitnessJson(r.overOz);
    row["time_s"] = r.timeSeconds;
    row["evals"] = r.evals;
    row["flagged"] = r.flagged;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["config"] = summary.configJson.empty() ? json::object()
                                           : json::parse(summary.configJson);
  return j;
}

std::string summaryCsv(const EvalSummary& summary) {
  std::ostringstream csv;
  csv << "id,baseline,tuned,overoz,time_s,evals,flagged\n";
  for (const EvalRow& r : summary.rows) {
    csv << csvEscape(r.id) << ',' << r.baseline << ',' << r.tuned << ','
        << r.overOz << ',' << r.timeSeconds << ',' << r.evals << ','
        << (r.flagged ? 1 : 0) << '\n';
  }
  return csv.str();
}

} // namespace

EvalSummary cmdEvaluate(const EvaluateOptions& opts, std::ostream& out) {
  if (opts.kbPath.empty())
    throw UsageError("missing --kb");
  PassKnowledgeBase kb = loadKb(opts.kbPath);
  BackendBundle bundle = openBackend(opts.backend, opts.testPath);
  if (bundle.programs.empty())
    throw DataError("empty test set");

  // Results on training programs overstate generalization.
  std::set<std::string> trainDigests(kb.provenance.programDigests.begin(),
                                     kb.provenance.programDigests.end());
  for (const ProgramUnit& p : bundle.programs)
    if (trainDigests.count(p.digest))
      out << "warning: test program " << p.id
          << " also appears in the knowledge-base corpus\n";

  EvalSummary summary;
  summary.method = opts.method;

  for (const ProgramUnit& p : bundle.programs) {
    EvalRow row;
    row.id = p.id;

    EvalCache cache;
    BatchEvaluator probe(*bundle.backend, cache, opts.backend.jobs);
    row.baseline = probe.baseline(p);
    if (row.baseline == 0) {
      row.flagged = true;
      summary.rows.push_back(row);
      ++summary.excludedRows;
      out << "warning: " << p.id << " has a zero baseline; excluded\n";
      continue;
    }

    auto start = std::chrono::steady_clock::now();
    TuneReport report =
        tune(p, kb, *bundle.backend, cache, opts.ga, opts.backend.jobs);
    row.timeSeconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    row.overOz = report.bestFitness;
    row.evals = report.backendCalls;
    row.tuned = probe.evaluateOne(p, report.bestSequence); // cache hit
    summary.rows.push_back(row);
  }
  summary.meanOverOz = summaryMean(summary.rows);

  json config;
  config["kb"] = opts.kbPath;
  config["test_set"] = opts.testPath;
  config["method"] = opts.method;
  config["backend"] = backendConfigJson(opts.backend);
  config["ga"] = gaConfigJson(opts.ga);
  summary.configJson = config.dump();

  out << "method " << summary.method << ": mean OverOz "
      << summary.meanOverOz << "% over "
      << (summary.rows.size() - summary.excludedRows) << " programs";
  if (summary.excludedRows > 0)
    out << " (" << summary.excludedRows << " excluded)";
  out << "\n";

  if (!opts.outPrefix.empty()) {
    writeFileOrThrow(opts.outPrefix + ".csv", summaryCsv(summary));
    writeFileOrThrow(opts.outPrefix + ".json",
                     summaryJson(summary).dump(2) + "\n");
    out << "wrote " << opts.outPrefix << ".csv and " << opts.outPrefix
        << ".json\n";
  }
  return summary;
}

std::vector<EvalSummary> cmdAblate(const AblateOptions& opts,
                                   std::ostream& out) {
  struct Variant {
    const char* name;
    bool smartInit, kc, km;
  };
  static const Variant variants[] = {
      {"full", true, true, true},        {"random-init", false, true, true},
      {"no-kc", true, false, true},      {"no-km", true, true, false},
      {"no-knowledge", false, false, false}};

  std::vector<EvalSummary> results;
  for (const Variant& v : variants) {
    EvaluateOptions vo = opts.base;
    vo.method = v.name;
    vo.ga.smartInit = v.smartInit;
    vo.ga.knowledgeCrossover = v.kc;
    vo.ga.knowledgeMutation = v.km;
    // Ablating the restorative mutation removes both its targeting and its
    // empirical validation: the replacement is a conventional mutation that
    // accepts unconditionally. Keeping strict acceptance there would hand
    // the ablated variant the validated-repair mechanism back.
    if (!v.km)
      vo.ga.mutationAcceptAlways = true;
    vo.outPrefix = opts.base.outPrefix.empty()
                       ? ""
                       : opts.base.outPrefix + "-" + v.name;
    results.push_back(cmdEvaluate(vo, out));
  }

  out << "\nvariant          mean OverOz (%)\n";
  for (const EvalSummary& s : results) {
    out << std::left << std::setw(17) << s.method << s.meanOverOz << "\n";
  }

  if (!opts.base.outPrefix.empty()) {
    std::ostringstream csv;
    csv << "variant,mean_overoz,programs,excluded\n";
    for (const EvalSummary& s : results)
      csv << s.method << ',' << s.meanOverOz << ','
          << (s.rows.size() - s.excludedRows) << ',' << s.excludedRows
          << '\n';
    writeFileOrThrow(opts.base.outPrefix + "-ablation.csv", csv.str());
    out << "wrote " << opts.base.outPrefix << "-ablation.csv\n";
  }
  return results;
}

//===----------------------------------------------------------------------===//
// synth-gen
//===----------------------------------------------------------------------===//

namespace {

std::string passName(int index) {
  // A..Z, then A1, B1, ... (stays short and readable in graphs).
  std::string name(1, static_cast<char>('A' + index % 26));
  if (index >= 26)
    name += std::to_string(index / 26);
  return name;
}

} // namespace

SyntheticSuite generateSuite(const SynthGenOptions& opts,
                             SyntheticTruth* truth) {
  if (opts.passes < 1 || opts.programs < 1 || opts.prototypes < 1)
    throw UsageError("passes, programs, and prototypes must be >= 1");
  if (opts.prototypes > opts.programs)
    throw UsageError("more prototypes than programs");
  if (opts.synergyPairs < 0 || 2 * opts.synergyPairs > opts.passes)
    throw UsageError("not enough passes for the requested synergy pairs "
                     "(need 2 per pair)");

  const auto& cats = syntheticCategories();
  // Pair categories cycle over the categories that actually dominate some
  // archetype, so every planted pair fires on at least one program.
  const int liveCats =
      std::max(1, std::min<int>(opts.prototypes,
                                static_cast<int>(cats.size())));

  std::uint64_t programSeed =
      opts.programSeed == 0 ? opts.seed : opts.programSeed;
  Rng programRng(subSeed(programSeed, 0x5052));
  SyntheticSuite suite;
  suite.name = "synth-P" + std::to_string(opts.passes) + "-M" +
               std::to_string(opts.programs) + "-K" +
               std::to_string(opts.prototypes) + "-S" +
               std::to_string(opts.synergyPairs) + "-seed" +
               std::to_string(opts.seed) + "-prog" +
               std::to_string(programSeed);

  // Planted pairs: the gated pass doubles its rate once its setter has
  // run, so the ordered pair is worth far more than its halves and the
  // mined graph carries a real signal for the repair operator.
  SyntheticTruth localTruth;
  for (int i = 0; i < opts.synergyPairs; ++i) {
    SyntheticPassSpec setter;
    setter.id = {passName(2 * i)};
    setter.targetCategory = cats[i % liveCats];
    setter.rate = 0.25;
    setter.setsFlag = "f" + std::to_string(i);
    SyntheticPassSpec gated;
    gated.id = {passName(2 * i + 1)};
    gated.targetCategory = cats[(i + 1) % liveCats];
    gated.rate = 0.25;
    gated.requiresFlag = "f" + std::to_string(i);
    localTruth.plantedPairs.emplace_back(setter.id.name, gated.id.name);
    localTruth.passCategory[setter.id.name] = setter.targetCategory;
    localTruth.passCategory[gated.id.name] = gated.targetCategory;
    suite.passes.push_back(std::move(setter));
    suite.passes.push_back(std::move(gated));
  }

  // Regular passes: the first three bands hold one pass per category at
  // graded rates, so each category offers strictly better and worse
  // alternatives to tell apart; every further pass is a weak distractor
  // removing floor(pool/128) == 0 at desk-scale pool sizes. The useful
  // universe stays small and graded while the distractor share grows with
  // the pass count, which is what starves uninformed search.
  static const double gradedRates[] = {0.25, 0.1875, 0.125};
  for (int i = 2 * opts.synergyPairs; i < opts.passes; ++i) {
    int slot = i - 2 * opts.synergyPairs;
    int band = slot / static_cast<int>(cats.size());
    SyntheticPassSpec spec;
    spec.id = {passName(i)};
    spec.targetCategory = cats[slot % cats.size()];
    spec.rate = band < 3 ? gradedRates[band] : 1.0 / 128.0;
    localTruth.passCategory[spec.id.name] = spec.targetCategory;
    suite.passes.push_back(std::move(spec));
  }

  // Baseline: the strongest ungated pass of every category, applied twice
  // over (a generic, knowledge-free pipeline). Random sequences rarely beat
  // it; doing better takes a deliberate allocation plus the gated pairs.
  {
    std::map<std::string, const SyntheticPassSpec*> strongest;
    for (const SyntheticPassSpec& spec : suite.passes) {
      if (spec.requiresFlag)
        continue;
      auto [it, inserted] = strongest.try_emplace(spec.targetCategory, &spec);
      if (!inserted && spec.rate > it->second->rate)
        it->second = &spec;
    }
    for (int round = 0; round < 2; ++round)
      for (const std::string& cat : cats)
        if (auto it = strongest.find(cat); it != strongest.end())
          suite.baseline.push_back(it->second->id);
    if (suite.baseline.empty())
      suite.baseline.push_back(suite.passes.front().id);
  }

  // Pools form a per-archetype size gradient (dominant, secondary,
  // tertiary, trace), so a good sequence must allocate its slots across
  // categories in proportion instead of spamming one family.
  int idWidth = opts.programs > 100 ? 3 : 2;
  const int nc = static_cast<int>(cats.size());
  for (int j = 0; j < opts.programs; ++j) {
    int archetype = j % opts.prototypes;
    SyntheticProgram prog;
    prog.base = 5 + static_cast<long long>(programRng.nextBelow(16));
    for (int rank = 0; rank < nc; ++rank) {
      const std::string& cat = cats[(archetype + rank) % nc];
      long long size = 0;
      switch (rank) {
      case 0:
        size = 48 + static_cast<long long>(programRng.nextBelow(49));
        break;
      case 1:
        size = 16 + static_cast<long long>(programRng.nextBelow(17));
        break;
      case 2:
        size = 8 + static_cast<long long>(programRng.nextBelow(9));
        break;
      default:
        size = static_cast<long long>(programRng.nextBelow(7));
        break;
      }
      prog.pools[cat] = size;
    }
    const std::string& dominant = cats[archetype % nc];
    std::ostringstream id;
    id << "p" << std::setw(idWidth) << std::setfill('0') << j;
    localTruth.archetypeOf[id.str()] = archetype;
    localTruth.dominantCategory[archetype] = dominant;
    suite.programs.emplace_back(id.str(), std::move(prog));
  }

  if (truth)
    *truth = std::move(localTruth);
  return suite;
}

void cmdSynthGen(const SynthGenOptions& opts, std::ostream& out) {
  if (opts.outPath.empty())
    throw UsageError("missing --out");
  SyntheticTruth truth;
  SyntheticSuite suite = generateSuite(opts, &truth);
  suite.save(opts.outPath);

  json t;
  json pairs = json::array();
  for (const auto& [from, to] : truth.plantedPairs)
    pairs.push_back(json::array({from, to}));
  t["planted_pairs"] = pairs;
  t["archetype_of"] = truth.archetypeOf;
  t["pass_category"] = truth.passCategory;
  json dominant = json::object();
  for (const auto& [arch, cat] : truth.dominantCategory)
    dominant[std::to_string(arch)] = cat;
  t["dominant_category"] = dominant;
  std::string truthPath = opts.outPath + ".truth.json";
  writeFileOrThrow(truthPath, t.dump(2) + "\n");

  out << "wrote " << opts.outPath << " (" << suite.passes.size()
      << " passes, " << suite.programs.size() << " programs) and "
      << truthPath << "\n";
}

SyntheticTruth loadTruth(const std::string& path) {
  json t = json::parse(readFileOrThrow(path));
  SyntheticTruth truth;
  for (const json& pair : t.at("planted_pairs"))
    truth.plantedPairs.emplace_back(pair.at(0).get<std::string>(),
                                    pair.at(1).get<std::string>());
  for (auto& [id, a] : t.at("archetype_of").items())
    truth.archetypeOf[id] = a.get<int>();
  for (auto& [pass, cat] : t.at("pass_category").items())
    truth.passCategory[pass] = cat.get<std::string>();
  for (auto& [arch, cat] : t.at("dominant_category").items())
    truth.dominantCategory[std::stoi(arch)] = cat.get<std::string>();
  return truth;
}

//===----------------------------------------------------------------------===//
// analyze
//===----------------------------------------------------------------------===//

void cmdAnalyzeFeatures(const std::string& irPath, std::ostream& out) {
  ProgramUnit p = ProgramUnit::fromSource(fs::path(irPath).filename().string(),
                                          readFileOrThrow(irPath));
  FeatureVector v = extractIrFeatures(p);
  const FeatureSchema& schema = irFeatureSchema();
  out << "feature,value\n";
  for (std::size_t i = 0; i < schema.names.size(); ++i)
    out << schema.names[i] << ',' << v[i] << '\n';
}

void cmdAnalyzeKb(const std::string& kbPath, const std::string& outDir,
                  std::ostream& out) {
  PassKnowledgeBase kb = loadKb(kbPath);
  fs::create_directories(outDir);
  const int n = kb.prototypeCount();

  // Behavioral vectors, one row per pass in universe order.
  {
    std::ostringstream csv;
    csv << "pass";
    for (int i = 0; i < n; ++i)
      csv << ",proto_" << i;
    for (int i = 0; i < n; ++i)
      csv << ",support_" << i;
    csv << "\n";
    for (const BehavioralVector& bv : kb.behavioral) {
      csv << csvEscape(bv.pass.name);
      for (double v : bv.values)
        csv << ',' << v;
      for (long long s : bv.support)
        csv << ',' << s;
      csv << '\n';
    }
    writeFileOrThrow((fs::path(outDir) / "behavioral.csv").string(),
                     csv.str());
  }

  // Variance ranking: high-variance passes are the risky, context-dependent
  // ones worth a close look.
  {
    struct Row {
      const BehavioralVector* bv;
      double mean, variance;
    };
    std::vector<Row> rows;
    for (const BehavioralVector& bv : kb.behavioral) {
      double mean = 0.0;
      for (double v : bv.values)
        mean += v;
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (double v : bv.values)
        var += (v - mean) * (v - mean);
      var /= static_cast<double>(n);
      rows.push_back({&bv, mean, var});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.variance > b.variance;
    });
    std::ostringstream csv;
    csv << "pass,variance,mean\n";
    for (const Row& r : rows)
      csv << csvEscape(r.bv->pass.name) << ',' << r.variance << ',' << r.mean
          << '\n';
    writeFileOrThrow((fs::path(outDir) / "variance.csv").string(), csv.str());
  }

  // Synergy edges by descending weight.
  {
    std::vector<std::pair<std::pair<PassId, PassId>, SynergyEdge>> edges(
        kb.synergy.edges.begin(), kb.synergy.edges.end());
    std::stable_sort(edges.begin(), edges.end(),
                     [](const auto& a, const auto& b) {
                       return a.second.weight > b.second.weight;
                     });
    std::ostringstream csv;
    csv << "from,to,count,weight\n";
    for (const auto& [key, edge] : edges)
      csv << csvEscape(key.first.name) << ',' << csvEscape(key.second.name)
          << ',' << edge.count << ',' << edge.weight << '\n';
    writeFileOrThrow((fs::path(outDir) / "synergy.csv").string(), csv.str());
  }

  // Group membership in universe order.
  {
    std::ostringstream csv;
    csv << "pass,group\n";
    for (const PassId& p : kb.universe.passes())
      csv << csvEscape(p.name) << ',' << kb.groups.groupIndex(p) << '\n';
    writeFileOrThrow((fs::path(outDir) / "groups.csv").string(), csv.str());
  }

  out << "wrote behavioral.csv, variance.csv, synergy.csv, groups.csv under "
      << outDir << "\n";
}

} // namespace passtune
