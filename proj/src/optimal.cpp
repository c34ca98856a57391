#include "optdiff/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "optdiff/errors.hpp"
#include "optdiff/hypergeometric.hpp"

namespace optdiff {

namespace detail {

struct NodeTable {
  std::vector<double> x;
  std::vector<double> left;   // int_lo^x_k (m1 - z) pi(z) dz
  std::vector<double> right;  // int_x_k^hi (z - m1) pi(z) dz
};

struct OptimalState {
  DistributionSpec spec;
  MomentSummary m;
  double s = 0.0;  // sigma_hat^2 / 2
  double lambda1 = 0.0;
  VariancePath path = VariancePath::Quadrature;
  std::function<double(double)> closed;  // empty when the kind has none

  mutable std::once_flag nodes_once;
  mutable NodeTable nodes;

  explicit OptimalState(DistributionSpec d) : spec(std::move(d)) {}
};

}  // namespace detail

namespace {

constexpr int kNodeSegments = 256;

QuadratureOptions numerator_quadrature() {
  QuadratureOptions o;
  o.abs_tol = 0.0;
  o.rel_tol = 1e-12;
  return o;
}

// Half-variance in closed form: s q(x) / E_pi[q] for the Pearson-type kinds,
// where q is the quadratic (or cubic) vanishing at the singular points of pi.
std::function<double(double)> closed_form(const DistributionSpec& spec, const MomentSummary& m, double s,
                                          double lambda1) {
  const double m1 = m.m1, m2 = m.m2;
  auto scaled = [s](auto q, double mean_q) -> std::function<double(double)> {
    const double k = s / mean_q;
    return [q, k](double x) { return k * q(x); };
  };
  switch (spec.kind()) {
    case DistributionKind::Beta:
      return scaled([](double x) { return x * (1.0 - x); }, m1 - m2);
    case DistributionKind::Jacobi:
      return scaled([](double x) { return (1.0 - x) * (1.0 + x); }, 1.0 - m2);
    case DistributionKind::Gamma:
      return scaled([](double x) { return x; }, m1);
    case DistributionKind::Normal:
      return [s](double) { return s; };
    case DistributionKind::StudentCauchy:
      return scaled([](double x) { return 1.0 + x * x; }, 1.0 + m2);
    case DistributionKind::InverseGamma:
      return scaled([](double x) { return x * x; }, m2);
    case DistributionKind::FisherSnedecor: {
      const double nu1 = spec.param("nu1"), nu2 = spec.param("nu2");
      return scaled([nu1, nu2](double x) { return x * (nu1 * x + nu2); }, nu1 * m2 + nu2 * m1);
    }
    case DistributionKind::CubicPearson: {
      const double a = spec.param("alpha"), b = spec.param("beta"), c = spec.param("a");
      // E[x(1-x)(1-cx)] = B(a+1,b+1) 2F1(a+b, a+1; a+b+2; c) / (B(a,b) 2F1(a+b+1, a; a+b; c)).
      const double ratio = a * b / ((a + b) * (a + b + 1.0));
      const double mean_q = ratio * hyp2f1(a + b, a + 1.0, a + b + 2.0, c) / hyp2f1(a + b + 1.0, a, a + b, c);
      return scaled([c](double x) { return x * (1.0 - x) * (1.0 - c * x); }, mean_q);
    }
    case DistributionKind::Hyperexponential: {
      const double p1 = spec.param("p1"), p2 = spec.param("p2");
      const double e1 = spec.param("eta1"), e2 = spec.param("eta2");
      const double d = 1.0 / e1 - 1.0 / e2;
      const double emin = std::min(e1, e2);
      return [=](double x) {
        // Both exponentials rescaled by e^(emin x) so large x does not underflow.
        const double w1 = p1 * std::exp(-(e1 - emin) * x);
        const double w2 = p2 * std::exp(-(e2 - emin) * x);
        return lambda1 * (w1 * (x + p2 * d) + w2 * (x - p1 * d)) / (w1 * e1 + w2 * e2);
      };
    }
    case DistributionKind::Custom:
      break;
  }
  return {};
}

void build_nodes(const detail::OptimalState& st) {
  const DistributionSpec& spec = st.spec;
  const Support eff = spec.effective_support();
  const Support& sup = spec.support();
  const double m1 = st.m.m1;
  const auto opts = numerator_quadrature();
  auto below = [m1](double z) { return m1 - z; };
  auto above = [m1](double z) { return z - m1; };

  auto& t = st.nodes;
  const std::size_t n = kNodeSegments + 1;
  t.x.resize(n);
  const double h = (eff.upper - eff.lower) / kNodeSegments;
  for (std::size_t i = 0; i < n; ++i) t.x[i] = eff.lower + h * static_cast<double>(i);
  t.x.back() = eff.upper;

  t.left.assign(n, 0.0);
  t.right.assign(n, 0.0);
  if (t.x.front() > sup.lower) t.left[0] = spec.integrate(below, sup.lower, t.x.front(), opts).value;
  for (std::size_t i = 0; i + 1 < n; ++i)
    t.left[i + 1] = t.left[i] + spec.integrate(below, t.x[i], t.x[i + 1], opts).value;
  if (t.x.back() < sup.upper) t.right[n - 1] = spec.integrate(above, t.x.back(), sup.upper, opts).value;
  for (std::size_t i = n - 1; i > 0; --i)
    t.right[i - 1] = t.right[i] + spec.integrate(above, t.x[i - 1], t.x[i], opts).value;
}

// int_lo^x (m1 - z) pi dz, taken from whichever side keeps the integrand of one sign.
double numerator(const detail::OptimalState& st, double x) {
  std::call_once(st.nodes_once, [&] { build_nodes(st); });
  const auto& t = st.nodes;
  const DistributionSpec& spec = st.spec;
  const Support& sup = spec.support();
  const double m1 = st.m.m1;
  const auto opts = numerator_quadrature();
  if (x <= m1) {
    auto below = [m1](double z) { return m1 - z; };
    if (x < t.x.front()) return spec.integrate(below, sup.lower, x, opts).value;
    const std::size_t k =
        std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(t.x.begin(), t.x.end(), x) - t.x.begin()) - 1,
                              t.x.size() - 1);
    return t.left[k] + spec.integrate(below, t.x[k], x, opts).value;
  }
  auto above = [m1](double z) { return z - m1; };
  if (x > t.x.back()) return spec.integrate(above, x, sup.upper, opts).value;
  const std::size_t k = static_cast<std::size_t>(std::lower_bound(t.x.begin(), t.x.end(), x) - t.x.begin());
  return t.right[k] + spec.integrate(above, x, t.x[k], opts).value;
}

double endpoint_offset(const Support& s) { return 1e-8 * (s.compact() ? s.upper - s.lower : 1.0); }

void check_in_support(const Support& s, double x) {
  if (std::isnan(x) || !s.contains(x) || std::isinf(x))
    fail(ErrorCode::OutOfSupport, fmt::format("x = {} outside [{}, {}]", x, s.lower, s.upper));
}

}  // namespace

LinearFn phi1_from_moments(double m1, double m2) {
  const double var = m2 - m1 * m1;
  if (!(var > 0.0) || !std::isfinite(var))
    fail(ErrorCode::DegenerateDistribution, fmt::format("m2 - m1^2 = {} is not positive", var));
  const double r = std::sqrt(var);
  return {1.0 / r, -m1 / r};
}

OptimalProcess synthesize(const DistributionSpec& spec, double sigma_hat_sq_half, VariancePath path) {
  if (!(sigma_hat_sq_half > 0.0) || !std::isfinite(sigma_hat_sq_half))
    fail(ErrorCode::InvalidArgument, "sigma_hat^2/2 must be positive and finite");
  auto st = std::make_shared<detail::OptimalState>(spec);
  st->m = spec.moments();
  if (!(st->m.variance > 0.0))
    fail(ErrorCode::DegenerateDistribution, fmt::format("variance {} is not positive", st->m.variance));
  st->s = sigma_hat_sq_half;
  st->lambda1 = sigma_hat_sq_half / st->m.variance;
  st->closed = closed_form(spec, st->m, sigma_hat_sq_half, st->lambda1);
  switch (path) {
    case VariancePath::Auto:
      st->path = st->closed ? VariancePath::ClosedForm : VariancePath::Quadrature;
      break;
    case VariancePath::ClosedForm:
      if (!st->closed) fail(ErrorCode::InvalidArgument, "no closed-form variance for a custom density");
      st->path = VariancePath::ClosedForm;
      break;
    case VariancePath::Quadrature:
      st->path = VariancePath::Quadrature;
      break;
  }
  return OptimalProcess(std::move(st));
}

double OptimalProcess::lambda1() const { return s_->lambda1; }
double OptimalProcess::tau() const { return 1.0 / s_->lambda1; }
LinearFn OptimalProcess::phi1() const { return phi1_from_moments(s_->m.m1, s_->m.m2); }
LinearFn OptimalProcess::drift() const { return {-s_->lambda1, s_->lambda1 * s_->m.m1}; }
double OptimalProcess::sigma_hat_sq_half() const { return s_->s; }
const DistributionSpec& OptimalProcess::source() const { return s_->spec; }
const MomentSummary& OptimalProcess::moments() const { return s_->m; }
VariancePath OptimalProcess::path() const { return s_->path; }
bool OptimalProcess::has_closed_form() const { return static_cast<bool>(s_->closed); }

double OptimalProcess::variance_at(double x) const {
  return s_->path == VariancePath::ClosedForm ? variance_closed(x) : variance_quadrature(x);
}

double OptimalProcess::variance_closed(double x) const {
  if (!s_->closed) fail(ErrorCode::InvalidArgument, "no closed-form variance for a custom density");
  check_in_support(s_->spec.support(), x);
  return s_->closed(x);
}

double OptimalProcess::variance_quadrature(double x) const {
  const Support& sup = s_->spec.support();
  check_in_support(sup, x);
  // Both numerator and pi vanish (or blow up) at a finite end; report the
  // value just inside as the limit.
  if (x == sup.lower) x += endpoint_offset(sup);
  if (x == sup.upper) x -= endpoint_offset(sup);
  const double p = s_->spec.pdf(x);
  if (!(p > 0.0) || !std::isfinite(p))
    fail(ErrorCode::NumericalFailure, fmt::format("pi({}) = {} cannot divide the flux", x, p));
  return s_->lambda1 * numerator(*s_, x) / p;
}

Diffusion Diffusion::from(const OptimalProcess& proc) {
  const LinearFn mu = proc.drift();
  const DistributionSpec spec = proc.source();
  return {spec.support(), [mu](double x) { return mu(x); }, [proc](double x) { return proc.variance_at(x); },
          [spec](double x) { return spec.pdf(x); }};
}

double verify_detailed_balance(const Diffusion& d, const Grid& grid, double h) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  double worst = 0.0;
  for (double x : grid.points()) {
    if (!d.support.interior(x - h) || !d.support.interior(x + h))
      fail(ErrorCode::InvalidArgument, fmt::format("x = {} +- h leaves the open support", x));
    const double flux_r = d.half_variance(x + h) * d.density(x + h);
    const double flux_l = d.half_variance(x - h) * d.density(x - h);
    const double rhs = (flux_r - flux_l) / (2.0 * h * d.density(x));
    worst = std::max(worst, std::abs(d.drift(x) - rhs));
  }
  return worst;
}

double verify_detailed_balance(const OptimalProcess& proc, const Grid& grid, double h) {
  return verify_detailed_balance(Diffusion::from(proc), grid, h);
}

PositivityReport check_variance_positivity(const OptimalProcess& proc, int n_points) {
  if (n_points < 10) fail(ErrorCode::InvalidArgument, "positivity check needs at least 10 points");
  const Support eff = proc.source().effective_support();
  const double c = 0.5 * (eff.lower + eff.upper), r = 0.5 * (eff.upper - eff.lower);
  PositivityReport out{true, std::numeric_limits<double>::infinity(), c};
  for (int k = 1; k <= n_points; ++k) {
    const double x = c + r * std::cos((2.0 * k - 1.0) * std::numbers::pi / (2.0 * n_points));
    const double v = proc.variance_at(x);
    if (v < out.min_value) {
      out.min_value = v;
      out.argmin = x;
    }
  }
  out.positive = out.min_value > 0.0;
  return out;
}

double check_variance_mean(const OptimalProcess& proc) {
  const DistributionSpec& spec = proc.source();
  const Support& sup = spec.support();
  QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-11;
  if (proc.path() == VariancePath::ClosedForm)
    return spec.integrate([&](double x) { return proc.variance_closed(x); }, sup.lower, sup.upper, opts).value;
  // pi V is lambda1 times the numerator, so it stays bounded even where pi
  // is singular; integrate the product over the effective support.
  const Support eff = spec.effective_support();
  RealFn flux = [&](double x) { return proc.variance_quadrature(x) * spec.pdf(x); };
  return integrate(flux, eff.lower, eff.upper, opts).value;
}

TauPair mixture_tau_concavity(std::span<const DistributionSpec> specs, std::span<const double> weights,
                              double sigma_hat_sq_half) {
  const DistributionSpec mix = mixture(specs, weights);
  TauPair out{synthesize(mix, sigma_hat_sq_half).tau(), 0.0};
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (weights[i] > 0.0) out.tau_avg += weights[i] * synthesize(specs[i], sigma_hat_sq_half).tau();
  return out;
}

}  // namespace optdiff
