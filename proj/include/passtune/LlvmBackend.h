//===-- LlvmBackend.h - Evaluation via the external opt tool ----*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_LLVM_BACKEND_H
#define PASSTUNE_LLVM_BACKEND_H

#include "passtune/Backend.h"

#include <atomic>
#include <filesystem>

namespace passtune {

/// Runs `opt` as a subprocess over textual IR and counts instructions in the
/// optimized output. Works with both pass-flag syntaxes: legacy
/// (`-simplifycfg -gvn`) and the newer pass-manager form
/// (`-passes=simplifycfg,gvn`), selected explicitly or probed from
/// `opt --version` (major >= 13 uses the new form).
class LlvmBackend final : public EvaluationBackend {
public:
  LlvmBackend(BackendConfig config, PassUniverse universe);
  ~LlvmBackend() override;

  const std::string& id() const override { return id_; }
  const PassUniverse& universe() const override { return universe_; }
  long long evaluate(const ProgramUnit& p,
                     const PassSequence& seq) const override;
  long long baselineCount(const ProgramUnit& p) const override;
  FeatureVector rawFeatures(const ProgramUnit& p) const override;
  int featureSchemaVersion() const override;

  /// Resolved opt path: PASSTUNE_OPT env var wins over the config value.
  static std::string resolveOptPath(const BackendConfig& config);
  /// True if `opt --version` runs successfully at this path.
  static bool optAvailable(const std::string& optPath);
  static PassSyntax detectPassSyntax(const std::string& optPath);

  /// Built-in universe of classic, broadly available passes.
  static PassUniverse defaultUniverse();
  /// One pass per line; '#' comments and blank lines ignored.
  static PassUniverse universeFromFile(const std::string& path);

  // Exposed for tests: exact argv for one evaluation or baseline run.
  std::vector<std::string> buildEvalCommand(const std::string& inputPath,
                                            const std::string& outputPath,
                                            const PassSequence& seq) const;
  std::vector<std::string>
  buildBaselineCommand(const std::string& inputPath,
                       const std::string& outputPath) const;

  PassSyntax effectiveSyntax() const { return syntax_; }

private:
  long long runAndCount(const ProgramUnit& p,
                        const std::vector<std::string>& argv,
                        const std::string& outputPath,
                        const std::string& what) const;
  static long long parseInstcountStats(const std::string& stderrText);

  BackendConfig config_;
  PassUniverse universe_;
  std::string optPath_;
  PassSyntax syntax_;
  std::string id_;
  std::filesystem::path workDir_;
  mutable std::atomic<std::uint64_t> serial_{0};
};

} // namespace passtune

#endif // PASSTUNE_LLVM_BACKEND_H
