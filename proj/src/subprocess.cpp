#include "irsmith/subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace irsmith {

namespace {

int open_for_write(const std::filesystem::path& p) {
  int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw SubprocessError(fmt::format("cannot open '{}': {}", p.string(), std::strerror(errno)));
  }
  return fd;
}

}  // namespace

ProcessResult run_shell(const std::string& command, const std::filesystem::path& stdout_path,
                        const std::filesystem::path& stderr_path, double timeout_seconds) {
  const int out_fd = open_for_write(stdout_path);
  int err_fd;
  try {
    err_fd = open_for_write(stderr_path);
  } catch (...) {
    ::close(out_fd);
    throw;
  }
  const int null_fd = ::open("/dev/null", O_RDONLY | O_CLOEXEC);

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(out_fd);
    ::close(err_fd);
    if (null_fd >= 0) ::close(null_fd);
    throw SubprocessError(fmt::format("fork failed: {}", std::strerror(errno)));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    if (null_fd >= 0) ::dup2(null_fd, STDIN_FILENO);
    ::dup2(out_fd, STDOUT_FILENO);
    ::dup2(err_fd, STDERR_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  // Also set from the parent so a kill cannot race the child's setpgid.
  ::setpgid(pid, pid);
  ::close(out_fd);
  ::close(err_fd);
  if (null_fd >= 0) ::close(null_fd);

  ProcessResult r;
  const auto deadline = start + std::chrono::duration<double>(timeout_seconds);
  int status = 0;
  auto delay = std::chrono::microseconds(200);
  for (;;) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) {
      throw SubprocessError(fmt::format("waitpid failed: {}", std::strerror(errno)));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      r.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(delay);
    delay = std::min(delay * 2, std::chrono::microseconds(20000));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) r.signal = WTERMSIG(status);
  if (r.timed_out) {
    r.exit_code = -1;
    r.signal = 0;
  }
  return r;
}

}  // namespace irsmith
