#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "optdiff/errors.hpp"
#include "optdiff/grid.hpp"
#include "optdiff/optimal.hpp"
#include "optdiff/pearson.hpp"

using namespace optdiff;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an optdiff::Error");
  return ErrorCode::InvalidArgument;
}

// Positive piecewise-smooth density on [0, 1]: a random sum of bumps plus a
// floor, tabulated on 201 knots.
DistributionSpec random_custom(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(0.1, 0.9), w(0.03, 0.3), a(0.2, 2.0), f(0.01, 0.3);
  const int bumps = 1 + static_cast<int>(rng() % 3);
  std::vector<double> centers, widths, amps;
  for (int b = 0; b < bumps; ++b) {
    centers.push_back(c(rng));
    widths.push_back(w(rng));
    amps.push_back(a(rng));
  }
  const double floor = f(rng);
  std::vector<double> x, p;
  for (int i = 0; i <= 200; ++i) {
    const double t = i / 200.0;
    double v = floor;
    for (int b = 0; b < bumps; ++b) v += amps[b] * std::exp(-0.5 * std::pow((t - centers[b]) / widths[b], 2));
    x.push_back(t);
    p.push_back(v);
  }
  return DistributionSpec::custom(x, p);
}

std::vector<std::pair<DistributionSpec, double>> catalog_processes() {
  std::vector<std::pair<DistributionSpec, double>> out;
  for (const auto& r : default_rows()) out.emplace_back(r.distribution(), r.sigma_hat_sq_half);
  out.emplace_back(DistributionSpec::hyperexponential(0.5, 0.5, 1.0, 2.0), 0.6875);
  out.emplace_back(DistributionSpec::cubic_pearson(1.0, 2.0, 0.5), 0.3);
  out.emplace_back(DistributionSpec::beta(-0.5, 0.5), 0.1);
  return out;
}

}  // namespace

TEST_CASE("synthesis examples") {
  const auto b = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
  CHECK(b.lambda1() == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(b.tau() == doctest::Approx(0.25).epsilon(1e-13));
  for (int i = 0; i <= 20; ++i) {
    const double x = i / 20.0;
    CHECK(std::abs(b.variance_at(x) - x * (1.0 - x)) <= 1e-8);
  }
  CHECK(b.variance_at(0.5) == doctest::Approx(0.25));

  const auto g = synthesize(DistributionSpec::gamma(0.0), 1.0);
  CHECK(g.lambda1() == doctest::Approx(1.0));
  CHECK(g.drift().slope == doctest::Approx(-1.0));
  CHECK(g.drift().intercept == doctest::Approx(1.0));
  CHECK(g.variance_at(2.5) == doctest::Approx(2.5));

  const auto n = synthesize(DistributionSpec::normal(0.0, 1.0), 1.0);
  CHECK(n.lambda1() == doctest::Approx(1.0));
  CHECK(n.drift()(1.7) == doctest::Approx(-1.7));
  CHECK(n.variance_at(-3.0) == doctest::Approx(1.0));

  const auto h = synthesize(DistributionSpec::hyperexponential(0.5, 0.5, 1.0, 2.0), 0.6875);
  CHECK(std::abs(h.lambda1() - 1.0) <= 1e-12);

  const auto j = synthesize(DistributionSpec::jacobi(1.0, 1.0), 0.8);
  CHECK(j.variance_at(0.0) == doctest::Approx(1.0));
}

TEST_CASE("closed form and quadrature paths agree") {
  for (const auto& [spec, s] : catalog_processes()) {
    CAPTURE(spec.kind_name());
    const auto p = synthesize(spec, s);
    REQUIRE(p.has_closed_form());
    const auto eff = spec.effective_support(1e-9);
    for (int i = 1; i < 40; ++i) {
      const double x = eff.lower + (eff.upper - eff.lower) * i / 40.0;
      const double c = p.variance_closed(x);
      CHECK(std::abs(p.variance_quadrature(x) - c) <= 1e-8 * std::max(1.0, std::abs(c)));
    }
  }
  const auto h = synthesize(DistributionSpec::hyperexponential(0.5, 0.5, 1.0, 2.0), 0.6875);
  CHECK(std::abs(h.variance_closed(0.75) - h.variance_quadrature(0.75)) <= 1e-8);
}

TEST_CASE("path selection") {
  const auto spec = DistributionSpec::beta(1.0, 2.0);
  CHECK(synthesize(spec, 0.2).path() == VariancePath::ClosedForm);
  CHECK(synthesize(spec, 0.2, VariancePath::Quadrature).path() == VariancePath::Quadrature);
  std::mt19937_64 rng(1);
  const auto custom = synthesize(random_custom(rng), 0.3);
  CHECK(custom.path() == VariancePath::Quadrature);
  CHECK_FALSE(custom.has_closed_form());
  CHECK(code_of([&] { custom.variance_closed(0.5); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { synthesize(random_custom(rng), 0.3, VariancePath::ClosedForm); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { synthesize(spec, 0.2).variance_at(1.5); }) == ErrorCode::OutOfSupport);
  CHECK(code_of([&] { synthesize(spec, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: rate formula, phi1 normalization and zero-mean drift") {
  for (const auto& [spec, s] : catalog_processes()) {
    CAPTURE(spec.kind_name());
    const auto p = synthesize(spec, s);
    const auto m = p.moments();
    CHECK(std::abs(p.lambda1() * m.variance - s) <= 1e-12 * s);
    const auto phi = p.phi1();
    CHECK(phi.slope == doctest::Approx(1.0 / std::sqrt(m.variance)).epsilon(1e-14));
    CHECK(std::abs(phi.slope * m.m1 + phi.intercept) <= 1e-12 * std::max(1.0, std::abs(phi.intercept)));
    const auto sup = spec.support();
    const auto opts = density_quadrature();
    CHECK(std::abs(spec.integrate([&](double x) { return phi(x); }, sup.lower, sup.upper, opts).value) <= 1e-8);
    CHECK(std::abs(spec.integrate([&](double x) { return phi(x) * phi(x); }, sup.lower, sup.upper, opts).value - 1.0) <=
          1e-8);
    const auto mu = p.drift();
    CHECK(std::abs(spec.integrate([&](double x) { return mu(x); }, sup.lower, sup.upper, opts).value) <=
          1e-8 * std::max(1.0, p.lambda1() * std::sqrt(m.variance)));
    // Drift is -(lambda1 / sqrt(nu)) phi1 with nu = 1/variance.
    for (double x : {m.m1 - 0.1, m.m1, m.m1 + 0.2}) CHECK(mu(x) == doctest::Approx(-p.lambda1() * std::sqrt(m.variance) * phi(x)));
  }
}

TEST_CASE("property: scaling law in sigma-hat") {
  const auto spec = DistributionSpec::gamma(1.5);
  const auto a = synthesize(spec, 0.7);
  const auto b = synthesize(spec, 2.1);
  CHECK(b.lambda1() == doctest::Approx(3.0 * a.lambda1()).epsilon(1e-14));
  for (double x : {0.1, 1.0, 4.0}) CHECK(b.variance_at(x) == doctest::Approx(3.0 * a.variance_at(x)).epsilon(1e-12));
  const auto q1 = synthesize(spec, 0.7, VariancePath::Quadrature);
  const auto q2 = synthesize(spec, 2.1, VariancePath::Quadrature);
  for (double x : {0.1, 1.0, 4.0}) CHECK(q2.variance_at(x) == doctest::Approx(3.0 * q1.variance_at(x)).epsilon(1e-12));
}

TEST_CASE("property: translation equivariance") {
  std::mt19937_64 rng(5);
  std::vector<double> x, xs, p;
  for (int i = 0; i <= 200; ++i) {
    x.push_back(i / 200.0);
    xs.push_back(i / 200.0 + 2.5);
    p.push_back(1.0 + std::sin(6.0 * x.back()) * 0.5 + x.back());
  }
  const auto a = synthesize(DistributionSpec::custom(x, p), 0.3);
  const auto b = synthesize(DistributionSpec::custom(xs, p), 0.3);
  CHECK(b.lambda1() == doctest::Approx(a.lambda1()).epsilon(1e-9));
  const double zero_a = -a.drift().intercept / a.drift().slope;
  const double zero_b = -b.drift().intercept / b.drift().slope;
  CHECK(zero_b - zero_a == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(b.variance_at(2.5 + 0.37) == doctest::Approx(a.variance_at(0.37)).epsilon(1e-8));
}

TEST_CASE("property: boundary flux vanishes at both ends") {
  const std::vector<std::pair<DistributionSpec, double>> cases{
      {DistributionSpec::beta(1.0, 2.0), 0.2},     {DistributionSpec::beta(-0.5, -0.5), 0.2},
      {DistributionSpec::gamma(0.0), 1.0},         {DistributionSpec::jacobi(0.5, 2.0), 0.5},
      {DistributionSpec::normal(0.0, 1.0), 1.0},   {DistributionSpec::student(3.0), 1.25},
      {DistributionSpec::inverse_gamma(3.0), 0.05}, {DistributionSpec::fisher_snedecor(6.0, 10.0), 35.0 / 12.0}};
  for (const auto& [spec, s] : cases) {
    CAPTURE(spec.kind_name());
    const auto p = synthesize(spec, s);
    const auto sup = spec.support();
    double prev_lo = INFINITY, prev_hi = INFINITY;
    for (double eps : {1e-2, 1e-4, 1e-6}) {
      const double lo = sup.lower_finite() ? sup.lower + eps : -1.0 / eps;
      const double hi = sup.upper_finite() ? sup.upper - eps : 1.0 / std::sqrt(eps);
      const double flux_lo = spec.pdf(lo) * p.variance_at(lo);
      const double flux_hi = spec.pdf(hi) * p.variance_at(hi);
      CHECK(flux_lo <= prev_lo);
      CHECK(flux_hi <= prev_hi * 1.0000001);
      prev_lo = flux_lo;
      prev_hi = flux_hi;
    }
    CHECK(prev_lo <= 1e-3);
    CHECK(prev_hi <= 1e-3);
  }
}

TEST_CASE("detailed balance") {
  const auto grid = Grid::uniform(-4.0, 4.0, 81);
  const auto ou = synthesize(DistributionSpec::normal(0.0, 1.0), 1.0);
  CHECK(verify_detailed_balance(ou, grid, 1e-4) <= 1e-6);

  const auto cir = synthesize(DistributionSpec::gamma(0.0), 1.0);
  CHECK(verify_detailed_balance(cir, Grid::uniform(0.05, 10.0, 100), 1e-4) <= 1e-6);

  auto broken = Diffusion::from(ou);
  const auto drift = broken.drift;
  broken.drift = [drift](double x) { return drift(x) + 0.1; };
  CHECK(verify_detailed_balance(broken, grid, 1e-4) >= 0.099);
}

TEST_CASE("positivity and mean of the variance function") {
  for (const auto& [spec, s] : catalog_processes()) {
    CAPTURE(spec.kind_name());
    const auto p = synthesize(spec, s);
    CHECK(check_variance_positivity(p).positive);
    CHECK(std::abs(check_variance_mean(p) - s) <= 1e-8 * std::max(1.0, s));
  }
  const auto b = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
  CHECK(b.variance_at(0.0) == doctest::Approx(0.0));
  CHECK(b.variance_at(1.0) == doctest::Approx(0.0));
  CHECK(check_variance_mean(b) == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(check_variance_mean(synthesize(DistributionSpec::normal(0.0, 1.0), 1.0)) == doctest::Approx(1.0).epsilon(1e-8));

  const std::vector<DistributionSpec> two{DistributionSpec::beta(6.0, 1.0), DistributionSpec::beta(1.0, 6.0)};
  const std::vector<double> w{0.5, 0.5};
  const auto bimodal = synthesize(mixture(two, w), 0.1);
  CHECK(check_variance_positivity(bimodal).positive);
}

TEST_CASE("property: positivity and mean of the variance on random custom densities") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = synthesize(random_custom(rng), 0.37);
    const auto pos = check_variance_positivity(p);
    CHECK(pos.positive);
    CHECK(pos.min_value > 0.0);
    CHECK(std::abs(check_variance_mean(p) - 0.37) <= 1e-6);
  }
}

TEST_CASE("mixture tau concavity") {
  {
    const std::vector<DistributionSpec> one{DistributionSpec::beta(1.0, 1.0)};
    const std::vector<double> w{1.0};
    const auto t = mixture_tau_concavity(one, w, 0.2);
    CHECK(t.tau_mix == doctest::Approx(t.tau_avg).epsilon(1e-14));
  }
  {
    const std::vector<DistributionSpec> two{DistributionSpec::beta(1.0, 1.0), DistributionSpec::beta(2.0, 2.0)};
    const std::vector<double> w{0.4, 0.6};
    const auto t = mixture_tau_concavity(two, w, 0.2);
    CHECK(std::abs(t.tau_mix - t.tau_avg) <= 1e-10);
  }
  {
    const std::vector<DistributionSpec> two{DistributionSpec::beta(3.0, 1.0), DistributionSpec::beta(1.0, 3.0)};
    const std::vector<double> w{0.5, 0.5};
    const auto t = mixture_tau_concavity(two, w, 0.2);
    CHECK(t.tau_mix > t.tau_avg + 1e-3);
  }
  const std::vector<DistributionSpec> bad{DistributionSpec::beta(1.0, 1.0), DistributionSpec::gamma(1.0)};
  const std::vector<double> w{0.5, 0.5};
  CHECK(code_of([&] { mixture_tau_concavity(bad, w, 1.0); }) == ErrorCode::SupportMismatch);
}

TEST_CASE("two exponentials: tau of the mixture against the average") {
  // tau = variance / sigma-hat^2/2; exponential(eta) has variance 1/eta^2.
  const auto mix = DistributionSpec::hyperexponential(0.5, 0.5, 1.0, 2.0);
  const auto p = synthesize(mix, 1.0);
  CHECK(p.tau() == doctest::Approx(0.6875));
  const double tau_avg = 0.5 * 1.0 + 0.5 * 0.25;
  CHECK(p.tau() >= tau_avg);
}

TEST_CASE("phi1 from moments") {
  const auto a = phi1_from_moments(0.0, 1.0);
  CHECK(a.slope == 1.0);
  CHECK(a.intercept == 0.0);
  const auto b = phi1_from_moments(0.5, 0.3);
  CHECK(b.slope == doctest::Approx(4.4721359549995796));
  CHECK(b.intercept == doctest::Approx(-2.2360679774997898));
  CHECK(b.slope * 0.5 + b.intercept == doctest::Approx(0.0));
  CHECK(code_of([] { phi1_from_moments(1.0, 1.0); }) == ErrorCode::DegenerateDistribution);
}
