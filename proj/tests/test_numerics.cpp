#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "optdiff/errors.hpp"
#include "optdiff/fit.hpp"
#include "optdiff/grid.hpp"
#include "optdiff/hypergeometric.hpp"
#include "optdiff/interpolation.hpp"
#include "optdiff/polynomial.hpp"
#include "optdiff/quadrature.hpp"
#include "optdiff/tridiag.hpp"

using namespace optdiff;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

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

}  // namespace

TEST_CASE("2F1 reduces to the binomial series when b = c") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> za(-0.9, 0.9), aa(-3.0, 3.0), ba(0.2, 4.0);
  for (int i = 0; i < 100; ++i) {
    const double a = aa(rng), b = ba(rng), z = za(rng);
    CHECK(rel_err(hyp2f1(a, b, b, z), std::pow(1.0 - z, -a)) <= 1e-12);
  }
}

TEST_CASE("z 2F1(1,1;2;z) = -ln(1-z)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> za(-0.9, 0.9);
  for (int i = 0; i < 100; ++i) {
    double z = za(rng);
    if (std::abs(z) < 1e-3) z = 1e-3;
    CHECK(rel_err(z * hyp2f1(1.0, 1.0, 2.0, z), -std::log1p(-z)) <= 1e-12);
  }
}

TEST_CASE("2F1 special values") {
  CHECK(hyp2f1(1.3, 2.1, 0.7, 0.0) == 1.0);
  // Terminating series: 2F1(-2, b; c; z) = 1 - 2bz/c + b(b+1) z^2 / (c(c+1))
  const double b = 1.5, c = 2.5, z = 3.0;
  CHECK(hyp2f1(-2.0, b, c, z) == doctest::Approx(1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0))));
  // arcsin identity: 2F1(1/2, 1/2; 3/2; z^2) = asin(z)/z
  CHECK(rel_err(hyp2f1(0.5, 0.5, 1.5, 0.25), std::asin(0.5) / 0.5) <= 1e-13);
  // Gauss: 2F1(a,b;c;1) not supported for non-terminating series
  CHECK(code_of([] { hyp2f1(0.5, 0.5, 1.5, 1.5); }) == ErrorCode::SeriesDivergence);
  CHECK(code_of([] { hyp2f1(0.5, 0.5, -2.0, 0.3); }) == ErrorCode::PoleAtC);
  // Terminates before the pole: (-1)_r vanishes from r = 2 on.
  CHECK(hyp2f1(-1.0, 2.0, -3.0, 0.5) == doctest::Approx(1.0 + 2.0 * 0.5 / 3.0));
}

TEST_CASE("2F1 is symmetric in its numerator parameters") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> p(-2.5, 3.5), z(-0.95, 0.95);
  for (int i = 0; i < 50; ++i) {
    const double a = p(rng), b = p(rng), c = std::abs(p(rng)) + 0.3, x = z(rng);
    CHECK(hyp2f1(a, b, c, x) == hyp2f1(b, a, c, x));
  }
}

TEST_CASE("1F1 and terminating 2F0") {
  CHECK(rel_err(hyp1f1(1.0, 1.0, 0.7), std::exp(0.7)) <= 1e-14);
  CHECK(rel_err(hyp1f1(2.0, 2.0, -3.0), std::exp(-3.0)) <= 1e-12);
  // Laguerre L_1^(a)(x) = (a+1) 1F1(-1; a+1; x) = a + 1 - x
  CHECK(hyp1f1(-1.0, 3.0, 0.9) == doctest::Approx(1.0 - 0.9 / 3.0));
  // 2F0(-1, b;; z) = 1 - b z
  CHECK(hyp2f0_terminating(-1.0, 0.5, 2.0) == doctest::Approx(0.0));
  CHECK(code_of([] { hyp2f0_terminating(0.5, 0.5, 0.1); }) == ErrorCode::SeriesDivergence);
  CHECK(is_nonpositive_integer(-3.0));
  CHECK_FALSE(is_nonpositive_integer(-2.5));
  CHECK_FALSE(is_nonpositive_integer(1.0));
}

TEST_CASE("adaptive quadrature on smooth, singular and infinite ranges") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13).value ==
        doctest::Approx(2.0).epsilon(1e-13));
  QuadratureOptions o;
  o.abs_tol = 1e-14;
  o.rel_tol = 1e-12;
  const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, EndpointSingularity::Lower, o);
  CHECK(rel_err(r.value, 2.0) <= 1e-11);
  const auto g = integrate_to_infinity([](double x) { return std::exp(-x * x); }, 0.0, 1.0, o);
  CHECK(rel_err(g.value, 0.5 * std::sqrt(std::numbers::pi)) <= 1e-11);
  const auto c = integrate_from_minus_infinity([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0, o);
  CHECK(rel_err(c.value, 0.5 * std::numbers::pi) <= 1e-11);
  // Heavy power tail: int_1^inf x^-1.5 = 2
  const auto t = integrate_to_infinity([](double x) { return std::pow(x, -1.5); }, 1.0, 1.0, o);
  CHECK(rel_err(t.value, 2.0) <= 1e-10);
  CHECK(code_of([] { integrate([](double) { return 1.0; }, 1.0, 0.0, 1e-10); }) == ErrorCode::InvalidInterval);
}

TEST_CASE("Gauss-Legendre is exact for degree 2n - 1") {
  for (int n = 1; n <= 8; ++n) {
    const int deg = 2 * n - 1;
    const double got = gauss_legendre([deg](double x) { return std::pow(x, deg) + 1.0; }, 0.0, 2.0, n);
    CHECK(rel_err(got, std::pow(2.0, deg + 1) / (deg + 1) + 2.0) <= 1e-13);
  }
}

TEST_CASE("tridiagonal eigenpairs of the discrete Laplacian") {
  const std::size_t n = 200;
  std::vector<double> d(n, 2.0), e(n - 1, -1.0);
  const auto pairs = tridiag_eigs(d, e, 5);
  REQUIRE(pairs.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const double exact = 2.0 - 2.0 * std::cos(static_cast<double>(k + 1) * std::numbers::pi / static_cast<double>(n + 1));
    CHECK(std::abs(pairs[k].value - exact) <= 1e-12);
    const auto tv = tridiag_multiply(d, e, pairs[k].vector);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(tv[i] - pairs[k].value * pairs[k].vector[i]));
    CHECK(res <= 1e-10 * tridiag_norm(d, e));
  }
  // Orthogonality
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += pairs[0].vector[i] * pairs[1].vector[i];
  CHECK(std::abs(dot) <= 1e-10);
}

TEST_CASE("Thomas solve matches the tridiagonal product") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 50;
  std::vector<double> sub(n - 1), diag(n), sup(n - 1), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = 4.0 + u(rng);
    x[i] = u(rng);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sub[i] = u(rng);
    sup[i] = u(rng);
  }
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = diag[i] * x[i];
    if (i > 0) rhs[i] += sub[i - 1] * x[i - 1];
    if (i + 1 < n) rhs[i] += sup[i] * x[i + 1];
  }
  const auto got = thomas_solve(sub, diag, sup, rhs);
  for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("grids") {
  const auto g = Grid::cell_centered(0.0, 1.0, 10);
  CHECK(g.size() == 10);
  CHECK(g.front() == doctest::Approx(0.05));
  CHECK(g.spacing() == doctest::Approx(0.1));
  CHECK(g.segment(0.26) == 2);
  CHECK(g.segment(-5.0) == 0);
  CHECK(g.segment(5.0) == 8);
  CHECK(code_of([] { Grid::custom({0.0, 1.0, 0.5}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Grid::custom({0.0, 0.5, 1.0}).spacing(); }) == ErrorCode::InvalidArgument);
  const auto f = GridFunction::tabulate(Grid::uniform(0.0, 2.0, 3), [](double x) { return x * x; });
  CHECK(f.interpolate(0.5) == doctest::Approx(0.5));
  CHECK(f.interpolate(-1.0) == doctest::Approx(0.0));
}

TEST_CASE("monotone cubic keeps positivity and integrates exactly") {
  std::vector<double> x{0.0, 0.1, 0.5, 0.6, 1.0}, y{0.0, 3.0, 0.01, 2.0, 0.0};
  const MonotoneCubic m(x, y);
  for (int i = 0; i <= 1000; ++i) CHECK(m(i / 1000.0) >= 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(m(x[i]) == doctest::Approx(y[i]));
  // Linear data is reproduced, so the integral and moments are exact.
  const MonotoneCubic lin({0.0, 0.5, 2.0}, {1.0, 2.0, 5.0});
  CHECK(lin(1.0) == doctest::Approx(3.0));
  CHECK(lin.integral_to(2.0) == doctest::Approx(6.0));
  CHECK(lin.moment(1) == doctest::Approx(2.0 / 3.0 * 8.0 * 1.0 + 2.0));  // int x(2x+1) = 16/3 + 2
}

TEST_CASE("exponential fit recovers rate and window") {
  std::vector<double> t, v;
  for (int i = 0; i < 20; ++i) {
    t.push_back(0.1 * i);
    v.push_back(3.0 * std::exp(-2.5 * t.back()));
  }
  const auto est = fit_exponential_decay(t, v);
  CHECK(est.rate == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(est.std_error <= 1e-10);
  CHECK(code_of([] {
          std::vector<double> tt{0, 1, 2, 3}, vv{1, 0.5, -0.1, 0.1};
          fit_exponential_decay(tt, vv);
        }) == ErrorCode::NonPositiveValues);
}

TEST_CASE("polynomial arithmetic") {
  const Polynomial p({1.0, -2.0, 3.0});
  CHECK(p(2.0) == doctest::Approx(9.0));
  CHECK(p.derivative()(2.0) == doctest::Approx(10.0));
  CHECK((p * p).degree() == 4);
  CHECK((p + Polynomial({0.0, 2.0}))(1.0) == doctest::Approx(4.0));
  CHECK(Polynomial::monomial(3, 2.0)(2.0) == doctest::Approx(16.0));
}
