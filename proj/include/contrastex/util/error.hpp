#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace contrastex {

// Every failure the library reports carries one of these kinds so that the
// CLI can map it to an exit code without string matching.
enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  DegenerateHistogram,
  UnknownSegmentId,
  InvalidSpec,
  SubprocessFailure,
  SingleClassTraining,
  OverlappingRegions,
  NoSegmentsFound,
  LengthMismatch,
  IncompleteEnumeration,
  NotPositiveClass,
  EmptyTargets,
  ZeroSaliency,
  InsufficientData,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace contrastex
