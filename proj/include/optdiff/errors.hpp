#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optdiff {

enum class ErrorCode {
  InvalidArgument,
  InvalidInterval,
  NonConvergence,
  ConvergenceFailure,
  SeriesDivergence,
  PoleAtC,
  NonPositiveValues,
  OutOfSupport,
  MomentDivergence,
  SupportMismatch,
  BadWeights,
  ParamOutOfRange,
  NormalizationFailure,
  DegenerateDistribution,
  NumericalFailure,
  GridTooCoarse,
  ZeroDenominator,
  UnstableStep,
  BoundaryViolation,
  NonFiniteState,
  InsufficientDecay,
  BeyondDiscreteSpectrum,
  RowMismatch,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Input-side failures (bad parameters, parse errors) vs. numerical ones;
// the CLI maps these to exit codes 2 and 3.
bool is_input_error(ErrorCode code);

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace optdiff
