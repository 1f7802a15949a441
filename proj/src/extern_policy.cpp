#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <charconv>
#include <chrono>
#include <cstring>

#include "ksat/policy.hpp"

namespace ksat {

namespace {

void ignore_sigpipe_once() {
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

}  // namespace

ExternPolicy::ExternPolicy(std::string command, int timeout_ms) : timeout_ms_(timeout_ms) {
  ignore_sigpipe_once();
  alive_ = start(command);
  if (alive_) {
    if (!write_line("HELLO keytrace-sat 1")) {
      shutdown();
    } else {
      auto ready = read_line();
      if (!ready || *ready != "READY") shutdown();
    }
  }
}

ExternPolicy::~ExternPolicy() { shutdown(); }

bool ExternPolicy::start(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) return false;
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    return false;
  }
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    return false;
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  to_child_ = to_child[1];
  from_child_ = from_child[0];
  pid_ = pid;
  return true;
}

void ExternPolicy::shutdown() {
  alive_ = false;
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 20; ++i) {
      if (::waitpid(static_cast<pid_t>(pid_), &status, WNOHANG) != 0) {
        pid_ = -1;
        return;
      }
      ::usleep(10000);
    }
    ::kill(static_cast<pid_t>(pid_), SIGKILL);
    ::waitpid(static_cast<pid_t>(pid_), &status, 0);
    pid_ = -1;
  }
}

bool ExternPolicy::write_line(const std::string& line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> ExternPolicy::read_line() {
  using Clock = std::chrono::steady_clock;
  auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms_);
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) return std::nullopt;
    struct pollfd pfd{from_child_, POLLIN, 0};
    int pr = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (pr <= 0) return std::nullopt;  // timeout or poll failure
    char chunk[4096];
    ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n <= 0) return std::nullopt;  // EOF: child exited
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::optional<Literal> ExternPolicy::query(const Formula& f, const KeyTrace& k) {
  std::lock_guard<std::mutex> lock(mu_);
  if (!alive_) {
    ++failures_;
    return std::nullopt;
  }
  std::string request =
      "QUERY " + std::to_string(f.num_vars) + " | " + serialize_text(f, k);
  if (!write_line(request)) {
    ++failures_;
    shutdown();
    return std::nullopt;
  }
  auto response = read_line();
  if (!response) {
    ++failures_;
    shutdown();  // timeout or crash: the child is out of sync, stop using it
    return std::nullopt;
  }
  if (*response == "PASS") return std::nullopt;
  if (response->rfind("DECIDE ", 0) == 0) {
    std::string_view num{response->data() + 7, response->size() - 7};
    int v = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec == std::errc() && ptr == num.data() + num.size() && v != 0) return Literal(v);
  }
  ++failures_;  // malformed response
  return std::nullopt;
}

}  // namespace ksat
