#pragma once

#include <cstddef>
#include <functional>

namespace optdiff {

using RealFn = std::function<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_evaluations = 400'000;
};

enum class EndpointSingularity { None, Lower, Upper, Both };

// Globally adaptive Gauss-Kronrod (7/15) bisection.  Converged when the summed
// error estimate is below max(abs_tol, rel_tol*|value|), or at the rounding
// floor of the integrand.  Throws InvalidInterval for a >= b, NonConvergence
// when the evaluation budget runs out.
QuadratureResult integrate(const RealFn& f, double a, double b, double tol);
QuadratureResult integrate(const RealFn& f, double a, double b, const QuadratureOptions& opts);

// Same, after x = a + u^2 (and/or x = b - u^2) on the half next to each flagged
// endpoint.  Tames x^p singularities with p > -1.
QuadratureResult integrate(const RealFn& f, double a, double b, EndpointSingularity sing,
                           const QuadratureOptions& opts);

// Semi-infinite integrals via z = a + scale*(1/u^2 - 1), u in (0, 1].
QuadratureResult integrate_to_infinity(const RealFn& f, double a, double scale,
                                       const QuadratureOptions& opts);
QuadratureResult integrate_from_minus_infinity(const RealFn& f, double b, double scale,
                                               const QuadratureOptions& opts);

// Fixed n-point Gauss-Legendre rule, n in {1..8}; exact for degree 2n-1.
double gauss_legendre(const RealFn& f, double a, double b, int n);

}  // namespace optdiff
