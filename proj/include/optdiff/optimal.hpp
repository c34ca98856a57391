#pragma once

#include <functional>
#include <memory>
#include <span>

#include "optdiff/distributions.hpp"
#include "optdiff/grid.hpp"

namespace optdiff {

struct LinearFn {
  double slope = 0.0;
  double intercept = 0.0;
  double operator()(double x) const { return slope * x + intercept; }
};

enum class VariancePath { Auto, ClosedForm, Quadrature };

namespace detail {
struct OptimalState;
}

// The fastest-relaxing diffusion with stationary density pi and mean
// half-variance E_pi[sigma^2/2] fixed.  Immutable; copies share state.
class OptimalProcess {
 public:
  double lambda1() const;
  double tau() const;
  LinearFn phi1() const;
  LinearFn drift() const;  // lambda1 (m1 - x)
  double sigma_hat_sq_half() const;
  const DistributionSpec& source() const;
  const MomentSummary& moments() const;
  VariancePath path() const;  // ClosedForm or Quadrature, never Auto
  bool has_closed_form() const;

  // sigma^2(x)/2 by the selected path.  Finite support ends give the
  // limiting value; OutOfSupport outside the closed support.
  double variance_at(double x) const;
  double variance_closed(double x) const;      // InvalidArgument if no closed form
  double variance_quadrature(double x) const;  // (lambda1/pi) int (m1 - z) pi(z) dz
  double operator()(double x) const { return variance_at(x); }

 private:
  explicit OptimalProcess(std::shared_ptr<const detail::OptimalState> s) : s_(std::move(s)) {}
  friend OptimalProcess synthesize(const DistributionSpec&, double, VariancePath);
  std::shared_ptr<const detail::OptimalState> s_;
};

OptimalProcess synthesize(const DistributionSpec& spec, double sigma_hat_sq_half,
                          VariancePath path = VariancePath::Auto);

// A generic one-dimensional diffusion, for checks that should also accept
// processes that did not come out of synthesize().
struct Diffusion {
  Support support;
  std::function<double(double)> drift;
  std::function<double(double)> half_variance;
  std::function<double(double)> density;

  static Diffusion from(const OptimalProcess& proc);
};

// max_i |mu(x_i) - (1/pi) d/dx (sigma^2/2 * pi)(x_i)| with centred differences
// of step h.  Every x_i +- h must lie in the open support.
double verify_detailed_balance(const Diffusion& d, const Grid& grid, double h = 1e-4);
double verify_detailed_balance(const OptimalProcess& proc, const Grid& grid, double h = 1e-4);

struct PositivityReport {
  bool positive;
  double min_value;
  double argmin;
};

// sigma^2/2 at n interior Chebyshev points of the effective support.
PositivityReport check_variance_positivity(const OptimalProcess& proc, int n_points = 64);

// int sigma^2/2 pi dx, which should reproduce sigma_hat_sq_half.
double check_variance_mean(const OptimalProcess& proc);

struct TauPair {
  double tau_mix;
  double tau_avg;
};

TauPair mixture_tau_concavity(std::span<const DistributionSpec> specs, std::span<const double> weights,
                              double sigma_hat_sq_half);

// phi1 = (x - m1)/sqrt(m2 - m1^2); DegenerateDistribution if m2 <= m1^2.
LinearFn phi1_from_moments(double m1, double m2);

}  // namespace optdiff
