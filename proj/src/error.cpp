#include "lgmcheck/error.hpp"

namespace lgmcheck {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::IsolatedNode: return "IsolatedNode";
    case ErrorCode::RhoOutOfRange: return "RhoOutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NonPositiveH: return "NonPositiveH";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::UnsupportedDirection: return "UnsupportedDirection";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::ImproperPrior: return "ImproperPrior";
    case ErrorCode::MissingPosterior: return "MissingPosterior";
    case ErrorCode::SingularStructure: return "SingularStructure";
    case ErrorCode::TooFewDraws: return "TooFewDraws";
    case ErrorCode::NonFiniteLoglik: return "NonFiniteLoglik";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::NegativeInformation: return "NegativeInformation";
    case ErrorCode::WeightMismatch: return "WeightMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Error";
}

bool is_numeric_failure(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::NoConvergence:
    case ErrorCode::NumericalBreakdown:
    case ErrorCode::SingularStructure:
    case ErrorCode::NonFiniteLoglik:
    case ErrorCode::DegenerateReference:
    case ErrorCode::NegativeInformation:
      return true;
    default:
      return false;
  }
}

}  // namespace lgmcheck
