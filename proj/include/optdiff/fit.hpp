#pragma once

#include <span>
#include <utility>

namespace optdiff {

// Fitted exponential decay rate values ~ A exp(-rate * t).
struct RateEstimate {
  double rate = 0.0;
  double std_error = 0.0;
  std::pair<double, double> fit_window{0.0, 0.0};
};

// Least-squares slope of ln(values) against times; rate = -slope with the
// usual regression standard error.  Needs >= 4 strictly increasing times and
// strictly positive values (NonPositiveValues otherwise).
RateEstimate fit_exponential_decay(std::span<const double> times, std::span<const double> values);

}  // namespace optdiff
