#include "atgforge/leanrepl/process.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace atgforge::lean {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

ReplProcess::ReplProcess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw BackendUnavailable("no REPL command configured");
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) throw BackendUnavailable(errno_text("socketpair"));
  // Reports exec failure back to the parent; closes on successful exec.
  int status_pipe[2];
  if (::pipe2(status_pipe, O_CLOEXEC) != 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    throw BackendUnavailable(errno_text("pipe"));
  }

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) {
    int err = errno;
    for (int fd : {sv[0], sv[1], status_pipe[0], status_pipe[1]}) ::close(fd);
    errno = err;
    throw BackendUnavailable(errno_text("fork"));
  }
  if (pid_ == 0) {
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    ::execvp(args[0], args.data());
    int err = errno;
    [[maybe_unused]] auto n = ::write(status_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(sv[1]);
  ::close(status_pipe[1]);
  fd_ = sv[0];

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(status_pipe[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(status_pipe[0]);
  if (n == static_cast<ssize_t>(sizeof child_errno)) {
    kill();
    errno = child_errno;
    throw BackendUnavailable(errno_text(("cannot start " + argv[0]).c_str()));
  }
}

ReplProcess::~ReplProcess() {
  kill();
  if (fd_ >= 0) ::close(fd_);
}

void ReplProcess::send_line(const std::string& line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ReplCrashed(errno_text("REPL write failed"));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string ReplProcess::read_reply(std::chrono::milliseconds timeout) {
  using clock = std::chrono::steady_clock;
  auto deadline = clock::now() + timeout;
  for (;;) {
    // Leading blank lines are keep-alive noise, not empty replies.
    while (buffer_.rfind("\n", 0) == 0) buffer_.erase(0, 1);
    std::size_t end = buffer_.find("\n\n");
    if (end != std::string::npos) {
      std::string reply = buffer_.substr(0, end);
      buffer_.erase(0, end + 2);
      return reply;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (left.count() <= 0) throw ReplTimeout("REPL did not answer within " + std::to_string(timeout.count()) + " ms");
    pollfd p{fd_, POLLIN, 0};
    int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ReplCrashed(errno_text("poll"));
    }
    if (rc == 0) continue;
    char chunk[65536];
    ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ReplCrashed(errno_text("REPL read failed"));
    }
    if (n == 0) {
      // A final reply may arrive without its blank line before exit.
      if (!buffer_.empty() && buffer_.back() == '\n') {
        std::string reply = buffer_.substr(0, buffer_.size() - 1);
        buffer_.clear();
        return reply;
      }
      throw ReplCrashed("REPL exited");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

bool ReplProcess::alive() {
  if (reaped_ || pid_ <= 0) return false;
  int status = 0;
  pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) reaped_ = true;
  return r == 0;
}

void ReplProcess::kill() {
  if (pid_ <= 0 || reaped_) return;
  ::kill(pid_, SIGKILL);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  reaped_ = true;
}

}  // namespace atgforge::lean
