#pragma once

#include <stdexcept>
#include <string>

namespace lgmcheck {

enum class ErrorCode {
  InvalidArgument,
  InvalidDimension,
  DimensionMismatch,
  NotPositiveDefinite,
  IsolatedNode,
  RhoOutOfRange,
  ParseError,
  IoError,
  NonPositiveH,
  NoConvergence,
  NumericalBreakdown,
  UnsupportedDirection,
  UnknownTarget,
  ImproperPrior,
  MissingPosterior,
  SingularStructure,
  TooFewDraws,
  NonFiniteLoglik,
  DegenerateReference,
  NegativeInformation,
  WeightMismatch,
  ConfigError,
};

[[nodiscard]] const char* error_name(ErrorCode code) noexcept;

// Numeric failures map to CLI exit code 3, everything else to 2.
[[nodiscard]] bool is_numeric_failure(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lgmcheck
