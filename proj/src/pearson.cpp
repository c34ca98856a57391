#include "optdiff/pearson.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "optdiff/errors.hpp"
#include "optdiff/grid.hpp"
#include "optdiff/hypergeometric.hpp"
#include "optdiff/polynomial.hpp"

namespace optdiff {

namespace {

double need(const std::map<std::string, double>& p, PearsonFamily f, const char* name) {
  auto it = p.find(name);
  if (it == p.end()) fail(ErrorCode::ParamOutOfRange, fmt::format("{} row needs '{}'", to_string(f), name));
  if (!std::isfinite(it->second))
    fail(ErrorCode::ParamOutOfRange, fmt::format("{} parameter '{}' is not finite", to_string(f), name));
  return it->second;
}

void require(bool ok, PearsonFamily f, const char* what) {
  if (!ok) fail(ErrorCode::ParamOutOfRange, fmt::format("{} row: {}", to_string(f), what));
}

// Largest integer strictly below x.
int below(double x) { return static_cast<int>(std::ceil(x)) - 1; }

// d^n/dx^n of (1+x^2)^g is P_n (1+x^2)^(g-n) with
// P_{k+1} = (1+x^2) P_k' + 2(g-k) x P_k.
Polynomial student_rodrigues(int n, double alpha) {
  const double g = n - alpha - 0.5;
  Polynomial p({1.0});
  const Polynomial one_plus_x2({1.0, 0.0, 1.0});
  for (int k = 0; k < n; ++k) p = one_plus_x2 * p.derivative() + Polynomial({0.0, 2.0 * (g - k)}) * p;
  return p;
}

// d^n/dx^n of x^s e^(-1/x) is Q_n x^(s-2n) e^(-1/x) with
// Q_{k+1} = x^2 Q_k' + ((s-2k) x + 1) Q_k.
Polynomial reciprocal_gamma_rodrigues(int n, double alpha) {
  const double s = 2.0 * n - 2.0 * alpha - 1.0;
  Polynomial q({1.0});
  const Polynomial x2({0.0, 0.0, 1.0});
  for (int k = 0; k < n; ++k) q = x2 * q.derivative() + Polynomial({1.0, s - 2.0 * k}) * q;
  return q;
}

// Probabilists' Hermite He_n(z) = z^n 2F0(-n/2, (1-n)/2; ; -2/z^2), summed
// term by term so that z = 0 is fine.
double hermite_he(int n, double z) {
  const double a = -0.5 * n, b = 0.5 * (1.0 - n);
  double coeff = 1.0, sum = 0.0;
  for (int k = 0; 2 * k <= n; ++k) {
    sum += coeff * std::pow(z, n - 2 * k);
    coeff *= (a + k) * (b + k) * -2.0 / (k + 1.0);
  }
  return sum;
}

}  // namespace

std::string_view to_string(PearsonFamily f) {
  switch (f) {
    case PearsonFamily::Beta: return "beta";
    case PearsonFamily::Jacobi: return "jacobi";
    case PearsonFamily::Gamma: return "gamma";
    case PearsonFamily::OrnsteinUhlenbeck: return "ornstein_uhlenbeck";
    case PearsonFamily::Student: return "student";
    case PearsonFamily::ReciprocalGamma: return "reciprocal_gamma";
    case PearsonFamily::FisherSnedecor: return "fisher_snedecor";
  }
  return "unknown";
}

PearsonFamily parse_family(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (s == "beta" || s == "hypergeometric") return PearsonFamily::Beta;
  if (s == "jacobi") return PearsonFamily::Jacobi;
  if (s == "gamma" || s == "cir") return PearsonFamily::Gamma;
  if (s == "ornstein_uhlenbeck" || s == "ou" || s == "normal") return PearsonFamily::OrnsteinUhlenbeck;
  if (s == "student" || s == "cauchy") return PearsonFamily::Student;
  if (s == "reciprocal_gamma" || s == "inverse_gamma") return PearsonFamily::ReciprocalGamma;
  if (s == "fisher_snedecor" || s == "f") return PearsonFamily::FisherSnedecor;
  fail(ErrorCode::ParseError, fmt::format("unknown Pearson row '{}'", name));
}

PearsonRow row(PearsonFamily f, const std::map<std::string, double>& p) {
  PearsonRow r{f, p, {}, {0.0, 0.0, 0.0}, 0.0, 0.0, 0.0, 0.0, std::nullopt};
  switch (f) {
    case PearsonFamily::Beta: {
      const double a = need(p, f, "alpha"), b = need(p, f, "beta");
      require(a > -1.0 && b > -1.0, f, "needs alpha, beta > -1");
      const double s = a + b;
      r.drift = {-(s + 2.0), a + 1.0};
      r.variance = {0.0, 1.0, -1.0};
      r.sigma_hat_sq_half = (a + 1.0) * (b + 1.0) / ((s + 3.0) * (s + 2.0));
      r.m1 = (a + 1.0) / (s + 2.0);
      r.var = (a + 1.0) * (b + 1.0) / ((s + 2.0) * (s + 2.0) * (s + 3.0));
      r.lambda1 = s + 2.0;
      break;
    }
    case PearsonFamily::Jacobi: {
      const double a = need(p, f, "alpha"), b = need(p, f, "beta");
      require(a > -1.0 && b > -1.0, f, "needs alpha, beta > -1");
      const double s = a + b;
      r.drift = {-(s + 2.0), b - a};
      r.variance = {1.0, 0.0, -1.0};
      r.sigma_hat_sq_half = 4.0 * (a + 1.0) * (b + 1.0) / ((s + 3.0) * (s + 2.0));
      r.m1 = (b - a) / (s + 2.0);
      r.var = 4.0 * (a + 1.0) * (b + 1.0) / ((s + 2.0) * (s + 2.0) * (s + 3.0));
      r.lambda1 = s + 2.0;
      break;
    }
    case PearsonFamily::Gamma: {
      const double a = need(p, f, "alpha");
      require(a > -1.0, f, "needs alpha > -1");
      r.drift = {-1.0, a + 1.0};
      r.variance = {0.0, 1.0, 0.0};
      r.sigma_hat_sq_half = a + 1.0;
      r.m1 = a + 1.0;
      r.var = a + 1.0;
      r.lambda1 = 1.0;
      break;
    }
    case PearsonFamily::OrnsteinUhlenbeck: {
      const double x0 = need(p, f, "x0"), sigma = need(p, f, "sigma");
      require(sigma > 0.0, f, "needs sigma > 0");
      r.drift = {-1.0, x0};
      r.variance = {sigma * sigma, 0.0, 0.0};
      r.sigma_hat_sq_half = sigma * sigma;
      r.m1 = x0;
      r.var = sigma * sigma;
      r.lambda1 = 1.0;
      break;
    }
    case PearsonFamily::Student: {
      const double a = need(p, f, "alpha");
      require(a >= 2.0, f, "needs alpha >= 2");
      r.drift = {1.0 - 2.0 * a, 0.0};
      r.variance = {1.0, 0.0, 1.0};
      r.sigma_hat_sq_half = (a - 0.5) / (a - 1.0);
      r.m1 = 0.0;
      r.var = 1.0 / (2.0 * (a - 1.0));
      r.lambda1 = 2.0 * a - 1.0;
      r.n_max_discrete = below(a);
      break;
    }
    case PearsonFamily::ReciprocalGamma: {
      const double a = need(p, f, "alpha");
      require(a >= 2.0, f, "needs alpha >= 2");
      const double k = 2.0 * a - 1.0;
      r.drift = {-k, 1.0};
      r.variance = {0.0, 0.0, 1.0};
      r.sigma_hat_sq_half = 1.0 / (k * (2.0 * a - 2.0));
      r.m1 = 1.0 / k;
      r.var = 1.0 / (2.0 * (a - 1.0) * k * k);
      r.lambda1 = k;
      r.n_max_discrete = below(a);
      break;
    }
    case PearsonFamily::FisherSnedecor: {
      const double n1 = need(p, f, "nu1"), n2 = need(p, f, "nu2");
      require(n1 > 0.0 && n2 > 4.0, f, "needs nu1 > 0 and nu2 > 4");
      const double l1 = n1 * (n2 - 2.0) / (2.0 * n2);
      r.drift = {-l1, 0.5 * n1};
      r.variance = {0.0, 1.0, n1 / n2};
      r.sigma_hat_sq_half = n2 * (n1 + n2 - 2.0) / ((n2 - 2.0) * (n2 - 4.0));
      r.m1 = n2 / (n2 - 2.0);
      r.var = 2.0 * n2 * n2 * (n1 + n2 - 2.0) / (n1 * (n2 - 2.0) * (n2 - 2.0) * (n2 - 4.0));
      r.lambda1 = l1;
      r.n_max_discrete = below(0.25 * n2);
      break;
    }
  }
  for (const auto& [key, value] : p) {
    (void)value;
    static const std::map<PearsonFamily, std::vector<std::string>> known = {
        {PearsonFamily::Beta, {"alpha", "beta"}},  {PearsonFamily::Jacobi, {"alpha", "beta"}},
        {PearsonFamily::Gamma, {"alpha"}},         {PearsonFamily::OrnsteinUhlenbeck, {"x0", "sigma"}},
        {PearsonFamily::Student, {"alpha"}},       {PearsonFamily::ReciprocalGamma, {"alpha"}},
        {PearsonFamily::FisherSnedecor, {"nu1", "nu2"}}};
    const auto& names = known.at(f);
    if (std::find(names.begin(), names.end(), key) == names.end())
      fail(ErrorCode::ParamOutOfRange, fmt::format("{} row has no parameter '{}'", to_string(f), key));
  }
  return r;
}

std::vector<PearsonRow> default_rows() {
  return {row(PearsonFamily::Beta, {{"alpha", 1.0}, {"beta", 2.0}}),
          row(PearsonFamily::Jacobi, {{"alpha", 1.0}, {"beta", 1.0}}),
          row(PearsonFamily::Gamma, {{"alpha", 1.0}}),
          row(PearsonFamily::OrnsteinUhlenbeck, {{"x0", 0.0}, {"sigma", 1.0}}),
          row(PearsonFamily::Student, {{"alpha", 3.0}}),
          row(PearsonFamily::ReciprocalGamma, {{"alpha", 3.0}}),
          row(PearsonFamily::FisherSnedecor, {{"nu1", 6.0}, {"nu2", 10.0}})};
}

double PearsonRow::lambda(int n) const {
  if (n < 0) fail(ErrorCode::InvalidArgument, "eigenvalue index must be nonnegative");
  if (n_max_discrete && n > *n_max_discrete)
    fail(ErrorCode::BeyondDiscreteSpectrum,
         fmt::format("{} row has discrete eigenvalues only up to n = {}", to_string(family), *n_max_discrete));
  return -n * drift.slope - n * (n - 1.0) * variance[2];
}

DistributionSpec PearsonRow::distribution() const {
  auto p = [this](const char* k) { return params.at(k); };
  switch (family) {
    case PearsonFamily::Beta: return DistributionSpec::beta(p("alpha"), p("beta"));
    case PearsonFamily::Jacobi: return DistributionSpec::jacobi(p("alpha"), p("beta"));
    case PearsonFamily::Gamma: return DistributionSpec::gamma(p("alpha"));
    case PearsonFamily::OrnsteinUhlenbeck: return DistributionSpec::normal(p("x0"), p("sigma"));
    case PearsonFamily::Student: return DistributionSpec::student(p("alpha"));
    case PearsonFamily::ReciprocalGamma: return DistributionSpec::inverse_gamma(p("alpha"));
    case PearsonFamily::FisherSnedecor: return DistributionSpec::fisher_snedecor(p("nu1"), p("nu2"));
  }
  fail(ErrorCode::InvalidArgument, "unknown Pearson family");
}

double eigenfunction(const PearsonRow& r, int n, double x) {
  r.lambda(n);  // range check
  if (n == 0) return 1.0;
  const double dn = n;
  auto p = [&r](const char* k) { return r.params.at(k); };
  switch (r.family) {
    case PearsonFamily::Beta:
      return hyp2f1(-dn, dn + p("alpha") + p("beta") + 1.0, p("alpha") + 1.0, x);
    case PearsonFamily::Jacobi:
      return hyp2f1(-dn, dn + p("alpha") + p("beta") + 1.0, p("alpha") + 1.0, 0.5 * (1.0 - x));
    case PearsonFamily::Gamma:
      return hyp1f1(-dn, p("alpha") + 1.0, x);
    case PearsonFamily::OrnsteinUhlenbeck:
      return hermite_he(n, (x - p("x0")) / p("sigma"));
    case PearsonFamily::Student:
      return student_rodrigues(n, p("alpha"))(x);
    case PearsonFamily::ReciprocalGamma:
      return reciprocal_gamma_rodrigues(n, p("alpha"))(x);
    case PearsonFamily::FisherSnedecor: {
      const double n1 = p("nu1"), n2 = p("nu2");
      return hyp2f1(-dn, dn - 0.5 * n2, 0.5 * n1, -n1 * x / n2);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown Pearson family");
}

double eigenfunction_norm_sq(const PearsonRow& r, int n) {
  const DistributionSpec spec = r.distribution();
  const Support& s = spec.support();
  return spec
      .integrate([&](double x) { const double v = eigenfunction(r, n, x); return v * v; }, s.lower, s.upper,
                 density_quadrature())
      .value;
}

RowReport verify_row_against_synthesis(const PearsonRow& r) {
  const DistributionSpec spec = r.distribution();
  const OptimalProcess proc = synthesize(spec, r.sigma_hat_sq_half, VariancePath::Quadrature);
  RowReport rep{};
  rep.lambda_deviation = std::abs(proc.lambda1() - r.lambda1);
  const LinearFn mu = proc.drift();
  rep.drift_deviation = std::max(std::abs(mu.slope - r.drift.slope), std::abs(mu.intercept - r.drift.intercept));

  // m1 +- 8 standard deviations, clipped to the support.
  const Support& sup = spec.support();
  const double sd = std::sqrt(proc.moments().variance);
  const double lo = std::max(sup.lower, proc.moments().m1 - 8.0 * sd);
  const double hi = std::min(sup.upper, proc.moments().m1 + 8.0 * sd);
  const Grid grid = Grid::cell_centered(lo, hi, 200);
  for (double x : grid.points())
    rep.variance_deviation = std::max(rep.variance_deviation, std::abs(proc.variance_at(x) - r.variance_at(x)));

  if (!(rep.lambda_deviation <= 1e-10 && rep.variance_deviation <= 1e-7 && rep.drift_deviation <= 1e-10))
    fail(ErrorCode::RowMismatch,
         fmt::format("{} row: lambda1 off by {:.3e}, sigma^2/2 by {:.3e}, drift by {:.3e}", to_string(r.family),
                     rep.lambda_deviation, rep.variance_deviation, rep.drift_deviation));
  return rep;
}

CubicExample cubic_example(double alpha, double beta, double a) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(a) || !(alpha > 0.0) || !(beta > 0.0) ||
      !(std::abs(a) < 1.0))
    fail(ErrorCode::ParamOutOfRange, "cubic example needs alpha, beta > 0 and |a| < 1");
  CubicExample ex{DistributionSpec::cubic_pearson(alpha, beta, a), {}, {}, 0.0, 0.0, 0.0};
  const double s = alpha + beta;
  const double f0 = hyp2f1(s + 1.0, alpha, s, a);
  ex.m1 = alpha / s * hyp2f1(s + 1.0, alpha + 1.0, s + 1.0, a) / f0;
  ex.m2 = alpha * (alpha + 1.0) / (s * (s + 1.0)) * hyp2f1(s + 1.0, alpha + 2.0, s + 2.0, a) / f0;
  ex.sigma_hat_sq_half = alpha * beta / (s * (s + 1.0)) * hyp2f1(s, alpha + 1.0, s + 2.0, a) / f0;
  ex.drift = {-(alpha + beta * (1.0 - a)), alpha};
  ex.variance = [a](double x) { return x * (1.0 - x) * (1.0 - a * x); };

  const MomentSummary q = ex.spec.moments_by_quadrature();
  if (std::abs(q.m1 - ex.m1) > 1e-6 || std::abs(q.m2 - ex.m2) > 1e-6)
    fail(ErrorCode::NumericalFailure,
         fmt::format("cubic moments disagree with quadrature: m1 {} vs {}, m2 {} vs {}", ex.m1, q.m1, ex.m2, q.m2));
  return ex;
}

HyperexponentialExample hyperexponential(double p1, double p2, double eta1, double eta2) {
  HyperexponentialExample ex{DistributionSpec::hyperexponential(p1, p2, eta1, eta2), {}, {}};
  const double d = 1.0 / eta1 - 1.0 / eta2;
  const double var = p1 / (eta1 * eta1) + p2 / (eta2 * eta2) + p1 * p2 * d * d;
  ex.lambda1 = [var](double s) { return s / var; };
  const double emin = std::min(eta1, eta2);
  ex.variance = [=](double x, double s) {
    const double w1 = p1 * std::exp(-(eta1 - emin) * x);
    const double w2 = p2 * std::exp(-(eta2 - emin) * x);
    return (s / var) * (w1 * (x + p2 * d) + w2 * (x + p1 * (1.0 / eta2 - 1.0 / eta1))) / (w1 * eta1 + w2 * eta2);
  };
  return ex;
}

}  // namespace optdiff
