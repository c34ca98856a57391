#include "optdiff/errors.hpp"

namespace optdiff {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SeriesDivergence: return "SeriesDivergence";
    case ErrorCode::PoleAtC: return "PoleAtC";
    case ErrorCode::NonPositiveValues: return "NonPositiveValues";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::MomentDivergence: return "MomentDivergence";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::NormalizationFailure: return "NormalizationFailure";
    case ErrorCode::DegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::BoundaryViolation: return "BoundaryViolation";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::InsufficientDecay: return "InsufficientDecay";
    case ErrorCode::BeyondDiscreteSpectrum: return "BeyondDiscreteSpectrum";
    case ErrorCode::RowMismatch: return "RowMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidInterval:
    case ErrorCode::OutOfSupport:
    case ErrorCode::MomentDivergence:
    case ErrorCode::SupportMismatch:
    case ErrorCode::BadWeights:
    case ErrorCode::ParamOutOfRange:
    case ErrorCode::NormalizationFailure:
    case ErrorCode::DegenerateDistribution:
    case ErrorCode::GridTooCoarse:
    case ErrorCode::BeyondDiscreteSpectrum:
    case ErrorCode::ParseError:
      return true;
    default:
      return false;
  }
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace optdiff
