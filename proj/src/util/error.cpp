#include "contrastex/util/error.hpp"

namespace contrastex {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateHistogram: return "DegenerateHistogram";
    case ErrorKind::UnknownSegmentId: return "UnknownSegmentId";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::SubprocessFailure: return "SubprocessFailure";
    case ErrorKind::SingleClassTraining: return "SingleClassTraining";
    case ErrorKind::OverlappingRegions: return "OverlappingRegions";
    case ErrorKind::NoSegmentsFound: return "NoSegmentsFound";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::IncompleteEnumeration: return "IncompleteEnumeration";
    case ErrorKind::NotPositiveClass: return "NotPositiveClass";
    case ErrorKind::EmptyTargets: return "EmptyTargets";
    case ErrorKind::ZeroSaliency: return "ZeroSaliency";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace contrastex
