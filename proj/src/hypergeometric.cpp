#include "optdiff/hypergeometric.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "optdiff/errors.hpp"

namespace optdiff {
namespace {

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

// Number of terms before a numerator parameter hits zero, or SIZE_MAX.
std::size_t termination_index(double p) {
  if (!is_nonpositive_integer(p)) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(-std::llround(p)) + 1;
}

void check_pole(double c, std::size_t n_terms) {
  if (!is_nonpositive_integer(c)) return;
  // (c)_r vanishes for r > -c; harmless only if the series stops first.
  const auto pole = static_cast<std::size_t>(-std::llround(c));
  if (n_terms > pole + 1 || n_terms == std::numeric_limits<std::size_t>::max())
    fail(ErrorCode::PoleAtC, fmt::format("c = {} is a nonpositive integer", c));
}

}  // namespace

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::round(x); }

double hyp2f1(double a, double b, double c, double z) {
  const std::size_t stop = std::min(termination_index(a), termination_index(b));
  const bool terminating = stop != std::numeric_limits<std::size_t>::max();
  check_pole(c, stop);
  if (!terminating && !(std::abs(z) < 1.0))
    fail(ErrorCode::SeriesDivergence, fmt::format("|z| = {} >= 1 for a non-terminating series", std::abs(z)));
  if (terminating && stop > kSeriesTermBudget)
    fail(ErrorCode::NonConvergence, "terminating series longer than the term budget");

  CompensatedSum sum;
  double term = 1.0;
  sum.add(term);
  for (std::size_t r = 0; r + 1 < kSeriesTermBudget; ++r) {
    const double rr = static_cast<double>(r);
    const double num = (a + rr) * (b + rr);
    if (num == 0.0) return sum.value();
    term *= num / ((c + rr) * (rr + 1.0)) * z;
    if (term == 0.0) return sum.value();
    sum.add(term);
    // The ratio must have dropped below one before the tail is negligible.
    if (!terminating && std::abs((a + rr + 1.0) * (b + rr + 1.0) * z) < std::abs((c + rr + 1.0) * (rr + 2.0)) &&
        std::abs(term) < 1e-15 * std::abs(sum.value()))
      return sum.value();
    if (!std::isfinite(term)) fail(ErrorCode::NumericalFailure, "2F1 series overflowed");
  }
  if (terminating) return sum.value();
  fail(ErrorCode::NonConvergence, "2F1 series did not converge within the term budget");
}

double hyp1f1(double a, double c, double z) {
  const std::size_t stop = termination_index(a);
  const bool terminating = stop != std::numeric_limits<std::size_t>::max();
  check_pole(c, stop);
  if (terminating && stop > kSeriesTermBudget)
    fail(ErrorCode::NonConvergence, "terminating series longer than the term budget");

  CompensatedSum sum;
  double term = 1.0;
  sum.add(term);
  for (std::size_t r = 0; r + 1 < kSeriesTermBudget; ++r) {
    const double rr = static_cast<double>(r);
    if (a + rr == 0.0) return sum.value();
    term *= (a + rr) / ((c + rr) * (rr + 1.0)) * z;
    if (term == 0.0) return sum.value();
    sum.add(term);
    // The ratio must have dropped below one before the tail is negligible.
    if (!terminating && std::abs((a + rr + 1.0) * z) < std::abs((c + rr + 1.0) * (rr + 2.0)) &&
        std::abs(term) < 1e-15 * std::abs(sum.value()))
      return sum.value();
    if (!std::isfinite(term)) fail(ErrorCode::NumericalFailure, "1F1 series overflowed");
  }
  if (terminating) return sum.value();
  fail(ErrorCode::NonConvergence, "1F1 series did not converge within the term budget");
}

double hyp2f0_terminating(double a, double b, double z) {
  const std::size_t stop = std::min(termination_index(a), termination_index(b));
  if (stop == std::numeric_limits<std::size_t>::max())
    fail(ErrorCode::SeriesDivergence, "2F0 is only evaluated as a terminating polynomial");
  CompensatedSum sum;
  double term = 1.0;
  sum.add(term);
  for (std::size_t r = 0; r + 1 < stop; ++r) {
    const double rr = static_cast<double>(r);
    term *= ((a + rr) * (b + rr)) / (rr + 1.0) * z;
    sum.add(term);
  }
  return sum.value();
}

}  // namespace optdiff
