#include "contrastex/classifier/subprocess_classifier.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <json.hpp>

#include "contrastex/util/base64.hpp"

namespace contrastex {

SubprocessClassifier::SubprocessClassifier(std::string command, std::chrono::milliseconds timeout,
                                           std::optional<InputSize> size, bool concurrency_safe)
    : command_(std::move(command)), timeout_(timeout), size_(size), concurrency_safe_(concurrency_safe) {
  if (command_.empty()) fail(ErrorKind::Config, "subprocess classifier needs a command");
}

SubprocessClassifier::~SubprocessClassifier() { shutdown(); }

void SubprocessClassifier::spawn() const {
  int fds[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    fail(ErrorKind::SubprocessFailure, std::string("socketpair: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    fail(ErrorKind::SubprocessFailure, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDIN_FILENO);
    dup2(fds[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  setpgid(pid, pid);
  pid_ = pid;
  fd_ = fds[0];
  buffer_.clear();
}

void SubprocessClassifier::shutdown() const noexcept {
  if (fd_ >= 0) {
    close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    // Give the child a moment to exit on EOF before forcing it.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) {
        kill(-pid_, SIGKILL);
        pid_ = -1;
        return;
      }
      usleep(2000);
    }
    kill(-pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

void SubprocessClassifier::die(const std::string& why) const {
  std::string detail = why;
  if (pid_ > 0) {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      if (WIFEXITED(status)) detail += " (exit status " + std::to_string(WEXITSTATUS(status)) + ")";
      if (WIFSIGNALED(status)) detail += " (killed by signal " + std::to_string(WTERMSIG(status)) + ")";
    }
  }
  shutdown();
  fail(ErrorKind::SubprocessFailure, detail);
}

std::string SubprocessClassifier::read_line() const {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) die("timed out waiting for the classifier");
    pollfd p{fd_, POLLIN, 0};
    const int ready = poll(&p, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      die(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t got = read(fd_, chunk, sizeof chunk);
    if (got < 0) {
      if (errno == EINTR) continue;
      die(std::string("read: ") + std::strerror(errno));
    }
    if (got == 0) {
      // EOF: wait briefly so that the exit status can be reported.
      for (int i = 0; i < 100 && pid_ > 0; ++i) {
        int status = 0;
        if (waitpid(pid_, &status, WNOHANG) == pid_) {
          pid_ = -1;
          close(fd_);
          fd_ = -1;
          std::string msg = "classifier closed its output";
          if (WIFEXITED(status)) msg += " (exit status " + std::to_string(WEXITSTATUS(status)) + ")";
          fail(ErrorKind::SubprocessFailure, msg);
        }
        usleep(2000);
      }
      die("classifier closed its output");
    }
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

double SubprocessClassifier::probability(const Image& image) const {
  std::lock_guard lock(mutex_);
  if (fd_ < 0) spawn();

  const long id = next_id_++;
  const nlohmann::json request = {{"id", id},
                                  {"width", image.width()},
                                  {"height", image.height()},
                                  {"pixels_b64", encode_f32_le(image.values())}};
  const std::string line = request.dump() + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      die(std::string("write to classifier failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }

  const std::string reply = read_line();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::exception&) {
    die("malformed reply: " + reply.substr(0, 200));
  }
  if (!j.is_object() || !j.contains("id") || !j.contains("probability") || !j["probability"].is_number()) {
    die("reply lacks id/probability: " + reply.substr(0, 200));
  }
  if (j["id"] != id) die("reply id does not match request id " + std::to_string(id));
  const double p = j["probability"].get<double>();
  if (!(p >= 0.0 && p <= 1.0)) die("probability outside [0,1]");
  return p;
}

}  // namespace contrastex
