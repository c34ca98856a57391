#pragma once

#include <cstddef>

namespace optdiff {

inline constexpr std::size_t kSeriesTermBudget = 10'000;

// Gauss series 2F1(a, b; c; z) = sum (a)_r (b)_r z^r / ((c)_r r!).
// Summation stops once |term| < 1e-15 |partial sum| (or the series
// terminates).  Non-terminating series need |z| < 1 (SeriesDivergence
// otherwise); c in {0, -1, -2, ...} is PoleAtC unless the series terminates
// before the pole is reached.  Symmetric in (a, b) bit for bit.
double hyp2f1(double a, double b, double c, double z);

// Kummer series 1F1(a; c; z), same truncation contract.
double hyp1f1(double a, double c, double z);

// 2F0(a, b; ; z); only the terminating case (a or b a nonpositive integer).
double hyp2f0_terminating(double a, double b, double z);

bool is_nonpositive_integer(double x);

}  // namespace optdiff
