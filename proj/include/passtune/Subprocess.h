//===-- Subprocess.h - Run external tools with a deadline -------*- C++ -*-===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef PASSTUNE_SUBPROCESS_H
#define PASSTUNE_SUBPROCESS_H

#include <string>
#include <vector>

namespace passtune {

struct CommandResult {
  int exitCode = -1;
  bool timedOut = false;
  std::string stdoutText;
  std::string stderrText;

  bool ok() const { return !timedOut && exitCode == 0; }
};

/// Runs argv[0] with the given arguments, capturing stdout and stderr. On
/// deadline expiry the child is killed with SIGKILL and `timedOut` is set.
/// Throws BackendError only when the process cannot be spawned at all.
CommandResult runCommand(const std::vector<std::string>& argv,
                         double timeoutSeconds);

} // namespace passtune

#endif // PASSTUNE_SUBPROCESS_H
