#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "optdiff/distributions.hpp"
#include "optdiff/optimal.hpp"

namespace optdiff {

enum class PearsonFamily { Beta, Jacobi, Gamma, OrnsteinUhlenbeck, Student, ReciprocalGamma, FisherSnedecor };

std::string_view to_string(PearsonFamily f);
PearsonFamily parse_family(std::string_view name);

// One optimal Pearson diffusion: mu = a0 + a1 x, sigma^2/2 = b0 + b1 x + b2 x^2.
struct PearsonRow {
  PearsonFamily family;
  std::map<std::string, double> params;
  LinearFn drift;                  // intercept a0, slope a1
  std::array<double, 3> variance;  // b0, b1, b2
  double sigma_hat_sq_half;
  double m1;
  double var;
  double lambda1;
  std::optional<int> n_max_discrete;  // empty: the whole spectrum is discrete

  // -n a1 - n(n-1) b2; BeyondDiscreteSpectrum past n_max_discrete.
  double lambda(int n) const;
  double variance_at(double x) const { return variance[0] + x * (variance[1] + x * variance[2]); }
  DistributionSpec distribution() const;
};

PearsonRow row(PearsonFamily family, const std::map<std::string, double>& params);

// The seven default rows used by `optdiff table`.
std::vector<PearsonRow> default_rows();

// Unnormalised phi_n(x); phi_0 = 1.  Polynomial families use the terminating
// hypergeometric series; Student and reciprocal Gamma use the Rodrigues
// polynomial without its constant.
double eigenfunction(const PearsonRow& r, int n, double x);

// int pi phi_n^2 by quadrature.
double eigenfunction_norm_sq(const PearsonRow& r, int n);

struct RowReport {
  double lambda_deviation;
  double variance_deviation;
  double drift_deviation;
};

// Synthesises the row's density through the quadrature path and compares
// lambda1 (1e-10), sigma^2/2 on 200 points (1e-7) and the drift (1e-10).
// Throws RowMismatch with the deviations when any of them fails.
RowReport verify_row_against_synthesis(const PearsonRow& r);

struct CubicExample {
  DistributionSpec spec;
  LinearFn drift;
  std::function<double(double)> variance;  // x(1-x)(1-ax)
  double sigma_hat_sq_half;
  double m1;
  double m2;
};

CubicExample cubic_example(double alpha, double beta, double a);

struct HyperexponentialExample {
  DistributionSpec spec;
  std::function<double(double x, double sigma_hat_sq_half)> variance;
  std::function<double(double sigma_hat_sq_half)> lambda1;
};

HyperexponentialExample hyperexponential(double p1, double p2, double eta1, double eta2);

}  // namespace optdiff
