#pragma once

#include <chrono>
#include <mutex>
#include <string>

#include "contrastex/classifier/classifier.hpp"

namespace contrastex {

// Bridges to an external model over a line-delimited JSON protocol. The
// command runs under /bin/sh; for every request the adapter writes
//
//   {"id":k,"width":w,"height":h,"pixels_b64":"<row-major f32 LE, base64>"}
//
// to the child's stdin and expects {"id":k,"probability":p} on stdout.
// A timeout, a nonzero exit, EOF or a malformed reply raise SubprocessFailure.
// The child is started lazily and kept alive for the lifetime of the adapter;
// calls are serialised.
class SubprocessClassifier final : public Classifier {
 public:
  explicit SubprocessClassifier(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(30),
                                std::optional<InputSize> size = std::nullopt, bool concurrency_safe = false);
  ~SubprocessClassifier() override;

  SubprocessClassifier(const SubprocessClassifier&) = delete;
  SubprocessClassifier& operator=(const SubprocessClassifier&) = delete;

  double probability(const Image& image) const override;
  ClassifierKind kind() const override { return ClassifierKind::Subprocess; }
  std::string description() const override { return "subprocess: " + command_; }
  bool concurrency_safe() const override { return concurrency_safe_; }
  std::optional<InputSize> input_size() const override { return size_; }

 private:
  void spawn() const;
  void shutdown() const noexcept;
  [[noreturn]] void die(const std::string& why) const;
  std::string read_line() const;

  std::string command_;
  std::chrono::milliseconds timeout_;
  std::optional<InputSize> size_;
  bool concurrency_safe_;

  mutable std::mutex mutex_;
  mutable int pid_ = -1;
  mutable int fd_ = -1;
  mutable long next_id_ = 0;
  mutable std::string buffer_;
};

}  // namespace contrastex
