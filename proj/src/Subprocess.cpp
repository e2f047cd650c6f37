//===-- Subprocess.cpp - Run external tools with a deadline ---------------===//
//
// Part of the passtune project, under the Apache License v2.0 with LLVM
// Exceptions. See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "passtune/Subprocess.h"

#include "passtune/Core.h"

#include <cerrno>
#include <chrono>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace passtune {

namespace {

void closeFd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

// Drains whatever is ready on fd into out; returns false on EOF.
bool drain(int fd, std::string& out) {
  char buf[4096];
  for (;;) {
    ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n > 0) {
      out.append(buf, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0)
      return false;
    if (errno == EAGAIN || errno == EWOULDBLOCK)
      return true;
    if (errno == EINTR)
      continue;
    return false;
  }
}

} // namespace

CommandResult runCommand(const std::vector<std::string>& argv,
                         double timeoutSeconds) {
  if (argv.empty())
    throw BackendError("empty command");

  int outPipe[2], errPipe[2];
  if (::pipe(outPipe) != 0 || ::pipe(errPipe) != 0)
    throw BackendError("pipe() failed: " + std::string(std::strerror(errno)));

  pid_t pid = ::fork();
  if (pid < 0) {
    throw BackendError("fork() failed: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    ::dup2(outPipe[1], STDOUT_FILENO);
    ::dup2(errPipe[1], STDERR_FILENO);
    ::close(outPipe[0]);
    ::close(outPipe[1]);
    ::close(errPipe[0]);
    ::close(errPipe[1]);
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const std::string& a : argv)
      cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    ::execvp(cargv[0], cargv.data());
    // Reached only if exec failed.
    ::_exit(127);
  }

  ::close(outPipe[1]);
  ::close(errPipe[1]);
  int outFd = outPipe[0];
  int errFd = errPipe[0];
  ::fcntl(outFd, F_SETFL, O_NONBLOCK);
  ::fcntl(errFd, F_SETFL, O_NONBLOCK);

  CommandResult result;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration<double>(timeoutSeconds);

  bool outOpen = true, errOpen = true;
  while (outOpen || errOpen) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timedOut = true;
      ::kill(pid, SIGKILL);
      break;
    }
    int waitMs = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
            .count());
    waitMs = waitMs < 1 ? 1 : (waitMs > 200 ? 200 : waitMs);

    struct pollfd fds[2];
    nfds_t nfds = 0;
    if (outOpen)
      fds[nfds++] = {outFd, POLLIN, 0};
    if (errOpen)
      fds[nfds++] = {errFd, POLLIN, 0};
    int rc = ::poll(fds, nfds, waitMs);
    if (rc < 0 && errno != EINTR)
      break;
    if (outOpen && !drain(outFd, result.stdoutText))
      outOpen = false;
    if (errOpen && !drain(errFd, result.stderrText))
      errOpen = false;
  }

  // Final non-blocking drain after the child exits or is killed.
  int status = 0;
  for (;;) {
    pid_t w = ::waitpid(pid, &status, 0);
    if (w >= 0 || errno != EINTR)
      break;
  }
  drain(outFd, result.stdoutText);
  drain(errFd, result.stderrText);
  closeFd(outFd);
  closeFd(errFd);

  if (WIFEXITED(status))
    result.exitCode = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    result.exitCode = 128 + WTERMSIG(status);
  return result;
}

} // namespace passtune
