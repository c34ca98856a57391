#include "optdiff/fit.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "optdiff/errors.hpp"

namespace optdiff {

RateEstimate fit_exponential_decay(std::span<const double> times, std::span<const double> values) {
  const std::size_t n = times.size();
  if (values.size() != n) fail(ErrorCode::InvalidArgument, "times and values differ in length");
  if (n < 4) fail(ErrorCode::InvalidArgument, fmt::format("need at least 4 points, got {}", n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0))
      fail(ErrorCode::NonPositiveValues, fmt::format("value[{}] = {} is not positive", i, values[i]));
    if (i > 0 && !(times[i] > times[i - 1]))
      fail(ErrorCode::InvalidArgument, "times must be strictly increasing");
  }

  double tbar = 0.0, ybar = 0.0;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::log(values[i]);
    tbar += times[i];
    ybar += y[i];
  }
  tbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (times[i] - tbar) * (times[i] - tbar);
    sxy += (times[i] - tbar) * (y[i] - ybar);
  }
  const double slope = sxy / sxx;
  const double intercept = ybar - slope * tbar;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (intercept + slope * times[i]);
    sse += r * r;
  }
  RateEstimate est;
  est.rate = -slope;
  est.std_error = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  est.fit_window = {times.front(), times.back()};
  return est;
}

}  // namespace optdiff
