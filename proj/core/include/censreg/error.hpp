#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace censreg {

enum class ErrorCode {
  InvalidArgument,
  // data problems
  ParseError,
  InvariantViolation,
  AllSameLabel,
  TooFewUncensored,
  InfeasibleObservation,
  // numerical problems
  RankDeficient,
  Separation,
  NonPositiveVariance,
  NonPDCovariance,
  DegenerateDirection,
  DegenerateTruncation,
  BracketFailure,
  TooManyFailures,
  AcceptanceTooLow,
};

/// Stable machine-readable name, e.g. "RankDeficient".
std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying an ErrorCode; every library failure is reported this way.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace censreg
