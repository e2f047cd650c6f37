//===-- LlvmBackend.cpp - Evaluation via the external opt tool ------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/LlvmBackend.h"

#include "passtune/Featurizer.h"
#include "passtune/Subprocess.h"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <unistd.h>

namespace passtune {

namespace fs = std::filesystem;

namespace {

std::string readFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw BackendError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw BackendError("cannot write " + path.string());
  out << bytes;
}

std::string excerpt(const std::string& text, std::size_t limit = 400) {
  if (text.size() <= limit)
    return text;
  return text.substr(0, limit) + "...";
}

// "-simplifycfg" -> "simplifycfg" for the -passes= form.
std::string stripDash(const std::string& name) {
  return name.size() > 1 && name[0] == '-' ? name.substr(1) : name;
}

std::string newPmBaselinePipeline(const std::string& flag) {
  static const char* levels[] = {"-O0", "-O1", "-O2", "-O3", "-Os", "-Oz"};
  for (const char* l : levels)
    if (flag == l)
      return std::string("default<") + (l + 1) + ">";
  throw BackendError("baseline flag '" + flag +
                     "' has no new pass-manager equivalent");
}

} // namespace

std::string LlvmBackend::resolveOptPath(const BackendConfig& config) {
  if (const char* env = std::getenv("PASSTUNE_OPT"); env && *env)
    return env;
  return config.optPath;
}

bool LlvmBackend::optAvailable(const std::string& optPath) {
  try {
    CommandResult r = runCommand({optPath, "--version"}, 10.0);
    return r.ok();
  } catch (const BackendError&) {
    return false;
  }
}

PassSyntax LlvmBackend::detectPassSyntax(const std::string& optPath) {
  CommandResult r = runCommand({optPath, "--version"}, 10.0);
  if (!r.ok())
    throw BackendError("cannot probe '" + optPath +
                       "': " + excerpt(r.stderrText));
  std::smatch m;
  static const std::regex versionRe("LLVM version ([0-9]+)");
  if (std::regex_search(r.stdoutText, m, versionRe)) {
    int major = std::stoi(m[1].str());
    return major >= 13 ? PassSyntax::modern : PassSyntax::legacy;
  }
  return PassSyntax::modern;
}

PassUniverse LlvmBackend::defaultUniverse() {
  // Classic scalar/IPO passes present in every LLVM era under these names.
  static const char* names[] = {
      "-adce",          "-always-inline", "-argpromotion",
      "-bdce",          "-dce",           "-deadargelim",
      "-dse",           "-early-cse",     "-globaldce",
      "-globalopt",     "-gvn",           "-indvars",
      "-inline",        "-instcombine",   "-instsimplify",
      "-ipsccp",        "-jump-threading","-lcssa",
      "-licm",          "-loop-deletion", "-loop-rotate",
      "-loop-simplify", "-loop-unroll",   "-lower-expect",
      "-mem2reg",       "-memcpyopt",     "-mergefunc",
      "-mldst-motion",  "-reassociate",   "-sccp",
      "-simplifycfg",   "-sink",          "-sroa",
      "-strip-dead-prototypes",           "-tailcallelim"};
  std::vector<PassId> passes;
  for (const char* n : names)
    passes.push_back({n});
  return PassUniverse(std::move(passes));
}

PassUniverse LlvmBackend::universeFromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open pass list: " + path);
  std::vector<PassId> passes;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b])))
      ++b;
    line.erase(0, b);
    if (!line.empty())
      passes.push_back({line});
  }
  return PassUniverse(std::move(passes));
}

LlvmBackend::LlvmBackend(BackendConfig config, PassUniverse universe)
    : config_(std::move(config)), universe_(std::move(universe)) {
  config_.validate();
  optPath_ = resolveOptPath(config_);
  syntax_ = config_.passSyntax == PassSyntax::autoDetect
                ? detectPassSyntax(optPath_)
                : config_.passSyntax;
  id_ = std::string("llvm:") + optPath_ + ":" +
        (syntax_ == PassSyntax::legacy ? "legacy" : "modern") + ":" +
        (config_.countMethod == CountMethod::textualCount ? "text"
                                                          : "instcount");
  workDir_ = fs::temp_directory_path() /
             ("passtune-" + std::to_string(::getpid()) + "-" +
              fnv1aHex(id_).substr(0, 8));
  fs::create_directories(workDir_);
}

LlvmBackend::~LlvmBackend() {
  std::error_code ec;
  fs::remove_all(workDir_, ec);
}

std::vector<std::string>
LlvmBackend::buildEvalCommand(const std::string& inputPath,
                              const std::string& outputPath,
                              const PassSequence& seq) const {
  std::vector<std::string> argv{optPath_};
  bool wantStats = config_.countMethod == CountMethod::instcountPass;
  if (syntax_ == PassSyntax::legacy) {
    for (const PassId& p : seq.passes)
      argv.push_back(p.name);
    if (wantStats)
      argv.push_back("-instcount");
  } else {
    std::string pipeline;
    for (const PassId& p : seq.passes) {
      if (!pipeline.empty())
        pipeline += ',';
      pipeline += stripDash(p.name);
    }
    if (wantStats) {
      if (!pipeline.empty())
        pipeline += ',';
      pipeline += "instcount";
    }
    if (!pipeline.empty())
      argv.push_back("-passes=" + pipeline);
  }
  if (wantStats)
    argv.push_back("-stats");
  argv.push_back(inputPath);
  argv.push_back("-S");
  argv.push_back("-o");
  argv.push_back(outputPath);
  return argv;
}

std::vector<std::string>
LlvmBackend::buildBaselineCommand(const std::string& inputPath,
                                  const std::string& outputPath) const {
  std::vector<std::string> argv{optPath_};
  bool wantStats = config_.countMethod == CountMethod::instcountPass;
  if (syntax_ == PassSyntax::legacy) {
    argv.push_back(config_.baselineFlag);
    if (wantStats)
      argv.push_back("-instcount");
  } else {
    std::string pipeline = newPmBaselinePipeline(config_.baselineFlag);
    if (wantStats)
      pipeline += ",instcount";
    argv.push_back("-passes=" + pipeline);
  }
  if (wantStats)
    argv.push_back("-stats");
  argv.push_back(inputPath);
  argv.push_back("-S");
  argv.push_back("-o");
  argv.push_back(outputPath);
  return argv;
}

long long LlvmBackend::parseInstcountStats(const std::string& stderrText) {
  // e.g. "  42 instcount - Number of instructions (of all types)"
  static const std::regex statRe(
      "([0-9]+)\\s+instcount\\s*-\\s*Number of instructions");
  std::smatch m;
  if (std::regex_search(stderrText, m, statRe))
    return std::stoll(m[1].str());
  throw BackendError("no instcount statistic in opt output: " +
                     excerpt(stderrText));
}

long long LlvmBackend::runAndCount(const ProgramUnit& p,
                                   const std::vector<std::string>& argv,
                                   const std::string& outputPath,
                                   const std::string& what) const {
  CommandResult r = runCommand(argv, config_.timeoutSeconds);
  if (r.timedOut)
    throw BackendError(what + " timed out after " +
                       std::to_string(config_.timeoutSeconds) + "s on " +
                       p.id);
  if (r.exitCode != 0)
    throw BackendError(what + " failed (exit " + std::to_string(r.exitCode) +
                       ") on " + p.id + ": " + excerpt(r.stderrText));
  if (config_.countMethod == CountMethod::instcountPass)
    return parseInstcountStats(r.stderrText);
  return countInstructions(readFile(outputPath));
}

long long LlvmBackend::evaluate(const ProgramUnit& p,
                                const PassSequence& seq) const {
  for (const PassId& pass : seq.passes)
    if (!universe_.contains(pass))
      throw BackendError("unknown pass '" + pass.name + "'");
  std::uint64_t n = serial_++;
  fs::path in = workDir_ / ("in-" + std::to_string(n) + ".ll");
  fs::path out = workDir_ / ("out-" + std::to_string(n) + ".ll");
  writeFile(in, p.source);
  long long count;
  try {
    count = runAndCount(p, buildEvalCommand(in.string(), out.string(), seq),
                        out.string(), "opt");
  } catch (...) {
    std::error_code ec;
    fs::remove(in, ec);
    fs::remove(out, ec);
    throw;
  }
  std::error_code ec;
  fs::remove(in, ec);
  fs::remove(out, ec);
  return count;
}

long long LlvmBackend::baselineCount(const ProgramUnit& p) const {
  std::uint64_t n = serial_++;
  fs::path in = workDir_ / ("base-in-" + std::to_string(n) + ".ll");
  fs::path out = workDir_ / ("base-out-" + std::to_string(n) + ".ll");
  writeFile(in, p.source);
  long long count;
  try {
    count =
        runAndCount(p, buildBaselineCommand(in.string(), out.string()),
                    out.string(), "opt " + config_.baselineFlag);
  } catch (...) {
    std::error_code ec;
    fs::remove(in, ec);
    fs::remove(out, ec);
    throw;
  }
  std::error_code ec;
  fs::remove(in, ec);
  fs::remove(out, ec);
  return count;
}

FeatureVector LlvmBackend::rawFeatures(const ProgramUnit& p) const {
  return extractIrFeatures(p);
}

int LlvmBackend::featureSchemaVersion() const {
  return irFeatureSchema().version;
}

} // namespace passtune
