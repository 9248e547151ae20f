#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpat {

enum class ErrorCode {
  // input data
  MalformedLine,
  NonMonotonicTimestamp,
  InvalidBar,
  IntervalMismatch,
  SeriesTooShort,
  WrongWindowLength,
  EmptySeries,
  EmptySide,
  MissingArtifact,
  MalformedArtifact,
  LibraryTrainOverlap,
  // numerical preconditions
  NotADistribution,
  DimensionMismatch,
  KTooLarge,
  EmptyInput,
  TooFewPoints,
  SingularCovariance,
  EmptyLibrary,
  // configuration
  InvalidConfig,
  // pipeline invariants
  UnsortedInput,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code);

/// Coarse grouping used by the command line front-end to pick an exit status.
enum class ErrorClass { Config, Data, Invariant };

ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qpat
