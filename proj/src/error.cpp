#include "qpat/error.hpp"

namespace qpat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::InvalidBar: return "InvalidBar";
    case ErrorCode::IntervalMismatch: return "IntervalMismatch";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::WrongWindowLength: return "WrongWindowLength";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::EmptySide: return "EmptySide";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::MalformedArtifact: return "MalformedArtifact";
    case ErrorCode::LibraryTrainOverlap: return "LibraryTrainOverlap";
    case ErrorCode::NotADistribution: return "NotADistribution";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::EmptyLibrary: return "EmptyLibrary";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnsortedInput: return "UnsortedInput";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::KTooLarge:
      return ErrorClass::Config;
    case ErrorCode::UnsortedInput:
    case ErrorCode::InvariantViolation:
      return ErrorClass::Invariant;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace qpat
