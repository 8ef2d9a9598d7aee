#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace irsmith {

class SubprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProcessResult {
  /// Exit status when the process exited normally, else -1.
  int exit_code = -1;
  /// Terminating signal, 0 if none.
  int signal = 0;
  bool timed_out = false;
  double seconds = 0;

  bool ok() const { return !timed_out && signal == 0 && exit_code == 0; }
};

/// Runs `command` through `/bin/sh -c` in its own process group with stdout
/// and stderr redirected to the given files. On timeout the whole group is
/// killed. Throws SubprocessError when the process cannot be started.
ProcessResult run_shell(const std::string& command, const std::filesystem::path& stdout_path,
                        const std::filesystem::path& stderr_path, double timeout_seconds);

}  // namespace irsmith
