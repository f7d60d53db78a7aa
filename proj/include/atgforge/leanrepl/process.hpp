#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/types.h>

#include "atgforge/prover/prover.hpp"

namespace atgforge::lean {

class ReplCrashed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplTimeout : public ProverTimeout {
 public:
  using ProverTimeout::ProverTimeout;
};

/// A child process whose stdin/stdout are one end of a socket pair. Replies
/// are framed by a blank line. stderr goes to /dev/null.
class ReplProcess {
 public:
  /// Throws BackendUnavailable if the executable cannot be started.
  explicit ReplProcess(const std::vector<std::string>& argv);
  ~ReplProcess();

  ReplProcess(const ReplProcess&) = delete;
  ReplProcess& operator=(const ReplProcess&) = delete;

  /// Writes `line` plus a newline. ReplCrashed if the child is gone.
  void send_line(const std::string& line);

  /// Next blank-line-terminated reply, without the terminator.
  std::string read_reply(std::chrono::milliseconds timeout);

  bool alive();
  pid_t pid() const { return pid_; }

  /// SIGKILL and reap; idempotent.
  void kill();

 private:
  int fd_ = -1;
  pid_t pid_ = -1;
  bool reaped_ = false;
  std::string buffer_;
};

}  // namespace atgforge::lean
