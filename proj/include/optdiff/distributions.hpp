#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "optdiff/quadrature.hpp"

namespace optdiff {

// Interval (lower, upper); either end may be infinite.
struct Support {
  double lower;
  double upper;

  bool contains(double x) const { return x >= lower && x <= upper; }  // closure
  bool interior(double x) const { return x > lower && x < upper; }
  bool lower_finite() const;
  bool upper_finite() const;
  bool compact() const { return lower_finite() && upper_finite(); }
  bool operator==(const Support&) const = default;
};

struct MomentSummary {
  double m1;
  double m2;
  double variance;  // m2 - m1*m1, computed exactly that way
};

enum class DistributionKind {
  Beta,             // x^a (1-x)^b / B(a+1, b+1) on [0, 1]
  Jacobi,           // (1-x)^a (1+x)^b / (2^(a+b+1) B(a+1, b+1)) on [-1, 1]
  Gamma,            // x^a e^-x / Gamma(a+1) on [0, inf)
  Normal,           // N(x0, sigma^2)
  StudentCauchy,    // (1+x^2)^-(a+1/2) / B(a, 1/2)
  InverseGamma,     // x^-(2a+1) e^(-1/x) / Gamma(2a) on [0, inf)
  FisherSnedecor,   // F(nu1, nu2) on [0, inf)
  Hyperexponential, // p1 eta1 e^(-eta1 x) + p2 eta2 e^(-eta2 x) on [0, inf)
  CubicPearson,     // x^(a-1) (1-x)^(b-1) (1 - c x)^-(a+b+1), normalised, on [0, 1]
  Custom,           // tabulated pdf or finite mixture
};

std::string_view to_string(DistributionKind kind);
DistributionKind parse_kind(std::string_view name);

namespace detail {
class DensityModel;
}

// Immutable stationary density.  Copies share the underlying model.
struct DensityAccess;

class DistributionSpec {
 public:
  static DistributionSpec beta(double alpha, double beta);
  static DistributionSpec jacobi(double alpha, double beta);
  static DistributionSpec gamma(double alpha);
  static DistributionSpec normal(double x0, double sigma);
  static DistributionSpec student(double alpha);
  static DistributionSpec inverse_gamma(double alpha);
  static DistributionSpec fisher_snedecor(double nu1, double nu2);
  static DistributionSpec hyperexponential(double p1, double p2, double eta1, double eta2);
  static DistributionSpec cubic_pearson(double alpha, double beta, double a);
  // Tabulated pdf on increasing knots; support is [grid.front(), grid.back()].
  // The monotone-cubic interpolant is rescaled to unit mass.
  static DistributionSpec custom(std::vector<double> grid, std::vector<double> pdf);
  // Catalog kinds by name with a parameter map (spec-file path).
  static DistributionSpec from_params(DistributionKind kind, const std::map<std::string, double>& params);

  DistributionKind kind() const;
  std::string_view kind_name() const { return to_string(kind()); }
  const Support& support() const;
  const std::map<std::string, double>& params() const;
  double param(const std::string& name) const;

  // Throws OutOfSupport outside the closed support.
  double pdf(double x) const;
  double cdf(double x) const;

  // Closed form where the catalog has one, otherwise quadrature.
  MomentSummary moments() const;
  MomentSummary moments_by_quadrature() const;

  // Location/spread used for tail mappings and truncation searches.
  double center() const;
  double scale() const;
  EndpointSingularity singular_endpoints() const;

  // Finite window where pdf >= rel * max pdf (finite ends kept as is).
  Support effective_support(double rel = 1e-14) const;

  // integral of g(x) pi(x) over [a, b], a subset of the support whose ends may
  // be infinite.  Infinite ends use a 1/u^2 map.  Singular finite support
  // ends use x = end +- u^2, with the distance to the end passed to the density
  // exactly so that (1 - x)^beta near x = 1 keeps its precision.
  QuadratureResult integrate(const RealFn& g, double a, double b, const QuadratureOptions& opts) const;

  bool is_mixture() const;
  std::span<const DistributionSpec> components() const;
  std::span<const double> weights() const;

 private:
  explicit DistributionSpec(std::shared_ptr<const detail::DensityModel> model);
  friend struct DensityAccess;
  friend DistributionSpec mixture(std::span<const DistributionSpec>, std::span<const double>);

  std::shared_ptr<const detail::DensityModel> model_;
};

// Convex combination sum_i w_i pi_i.  Components must share the same support
// (SupportMismatch) and weights must be nonnegative summing to 1 within 1e-12
// (BadWeights).  m1 = sum w_i m1_i, m2 = sum w_i m2_i.
DistributionSpec mixture(std::span<const DistributionSpec> specs, std::span<const double> weights);

// Default tolerances for density integrals.
QuadratureOptions density_quadrature();

}  // namespace optdiff
