#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "optdiff/errors.hpp"
#include "optdiff/spectral.hpp"

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

double lambda1_at(const OptimalProcess& p, std::size_t n) {
  return spectrum(discretize_generator(p, spectral_grid(p.source(), n)), 2).eigenvalues[1];
}

// sigma^2/2 multiplied by (1 + amp sin(2 pi (x - lo)/L)) and rescaled so that
// its pi-mean is unchanged.
std::function<double(double)> perturbed(const OptimalProcess& p, double amp, double phase) {
  const auto sup = p.source().support();
  const double lo = sup.lower, len = sup.upper - sup.lower;
  auto shape = [=](double x) { return 1.0 + amp * std::sin(2.0 * std::numbers::pi * (x - lo) / len + phase); };
  const double mean = p.source()
                          .integrate([&](double x) { return p.variance_at(x) * shape(x); }, sup.lower, sup.upper,
                                     density_quadrature())
                          .value;
  const double c = p.sigma_hat_sq_half() / mean;
  return [=](double x) { return c * p.variance_at(x) * shape(x); };
}

}  // namespace

TEST_CASE("uniform density with the Beta(0,0) variance") {
  const auto p = synthesize(DistributionSpec::beta(0.0, 0.0), 2.0 / 12.0);
  for (std::size_t n : {200u, 800u}) CHECK(lambda1_at(p, n) == doctest::Approx(2.0).epsilon(2e-3));
}

TEST_CASE("constant half-variance on [0,1] gives the Neumann Laplacian") {
  const double s = 0.3;
  const auto grid = Grid::cell_centered(0.0, 1.0, 800);
  const auto gen = discretize_generator(DistributionSpec::beta(0.0, 0.0), [s](double) { return s; }, grid);
  const auto res = spectrum(gen, 4);
  for (int n = 1; n <= 3; ++n) {
    const double exact = s * std::pow(n * std::numbers::pi, 2);
    CHECK(res.eigenvalues[n] == doctest::Approx(exact).epsilon(1e-4));
  }
}

TEST_CASE("OU and CIR gaps") {
  const auto ou = synthesize(DistributionSpec::normal(0.0, 1.0), 1.0);
  const auto res = spectrum(discretize_generator(ou, Grid::cell_centered(-8.0, 8.0, 2000)), 4);
  CHECK(res.eigenvalues[1] == doctest::Approx(1.0).epsilon(0.01));
  CHECK(res.eigenvalues[2] == doctest::Approx(2.0).epsilon(0.01));
  CHECK(res.eigenvalues[3] == doctest::Approx(3.0).epsilon(0.01));

  const auto cir = synthesize(DistributionSpec::gamma(0.0), 1.0);
  const auto rc = spectrum(discretize_generator(cir, Grid::cell_centered(0.0, 40.0, 4000)), 2);
  CHECK(rc.eigenvalues[1] == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("Beta(1,1) spectrum, eigenfunction and invariants") {
  const auto p = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
  const auto gen = discretize_generator(p, spectral_grid(p.source(), 2000));
  const auto res = spectrum(gen, 4);
  CHECK(res.eigenvalues[1] == doctest::Approx(4.0).epsilon(0.005));
  CHECK(res.eigenvalues[2] == doctest::Approx(10.0).epsilon(0.01));
  CHECK(std::abs(res.eigenvalues[0]) <= 1e-8 * res.eigenvalues[1]);
  for (std::size_t k = 1; k < res.eigenvalues.size(); ++k) CHECK(res.eigenvalues[k] >= res.eigenvalues[k - 1]);

  const auto& phi0 = res.eigenfunctions[0].values();
  const auto [mn, mx] = std::minmax_element(phi0.begin(), phi0.end());
  CHECK((*mx - *mn) <= 1e-6 * std::abs(*mx));

  const auto phi = p.phi1();
  double worst = 0.0;
  for (std::size_t i = 0; i < res.grid.size(); ++i)
    worst = std::max(worst, std::abs(res.eigenfunctions[1][i] - phi(res.grid[i])));
  CHECK(worst <= 1e-2);

  // Symmetric storage: one off-diagonal serves both sides.
  CHECK(gen.offdiag.size() + 1 == gen.diag.size());
}

TEST_CASE("property: second-order convergence under grid halving") {
  for (const auto& [spec, s] : {std::pair{DistributionSpec::beta(1.0, 1.0), 0.2},
                                std::pair{DistributionSpec::jacobi(1.0, 1.0), 0.8}}) {
    CAPTURE(spec.kind_name());
    const auto p = synthesize(spec, s);
    const double l100 = lambda1_at(p, 100), l200 = lambda1_at(p, 200), l400 = lambda1_at(p, 400),
                 l800 = lambda1_at(p, 800);
    const double r1 = (l100 - l200) / (l200 - l400);
    const double r2 = (l200 - l400) / (l400 - l800);
    CHECK(r1 == doctest::Approx(4.0).epsilon(0.15));
    CHECK(r2 == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("Rayleigh quotient") {
  const auto p = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
  const auto grid = spectral_grid(p.source(), 2000);
  const auto gen = discretize_generator(p, grid);
  CHECK(rayleigh_quotient(p, GridFunction::tabulate(grid, p.phi1())) == doctest::Approx(4.0).epsilon(0.005));
  CHECK(rayleigh_quotient(p, GridFunction::tabulate(grid, [](double x) { return x * x; })) >= 4.0 * (1.0 - 1e-3));
  CHECK(code_of([&] { rayleigh_quotient(p, GridFunction::tabulate(grid, [](double) { return 2.0; })); }) ==
        ErrorCode::ZeroDenominator);

  const double l1 = spectrum(gen, 2).eigenvalues[1];
  std::mt19937_64 rng(8);
  std::normal_distribution<double> c(0.0, 1.0);
  double smallest = INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const double a1 = c(rng), a2 = c(rng), a3 = c(rng), a4 = c(rng);
    auto q = [&](double x) { return a1 * x + a2 * x * x + a3 * std::sin(3.0 * x) + a4 * std::cos(7.0 * x); };
    smallest = std::min(smallest, rayleigh_quotient(p, GridFunction::tabulate(grid, q)));
  }
  CHECK(smallest >= l1 - 2e-3);
}

TEST_CASE("property: perturbing the optimal variance never raises the gap") {
  const auto p = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
  const auto grid = spectral_grid(p.source(), 1000);
  const double opt = spectrum(discretize_generator(p, grid), 2).eigenvalues[1];
  for (double phase : {0.0, 0.7, 1.9, 3.1}) {
    const auto gen = discretize_generator(p.source(), perturbed(p, 0.5, phase), grid);
    CHECK(spectrum(gen, 2).eigenvalues[1] <= opt + 1e-6);
  }
}

TEST_CASE("generator errors") {
  const auto p = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
  CHECK(code_of([&] { discretize_generator(p, Grid::cell_centered(0.0, 1.0, 20)); }) == ErrorCode::GridTooCoarse);
  CHECK(code_of([&] { discretize_generator(p, Grid::uniform(0.0, 1.0, 100)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Fokker-Planck evolution") {
  SUBCASE("stationary start stays put") {
    const auto p = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
    const auto gen = discretize_generator(p, spectral_grid(p.source(), 200));
    const auto r = evolve_fpe(gen, stationary_state(gen), 1.0, 1e-2);
    for (double d : r.log.d) CHECK(d <= 1e-8);
    CHECK(r.max_mass_error <= 1e-8);
  }
  SUBCASE("Beta(1,1) bump relaxes at lambda1") {
    const auto p = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
    const auto gen = discretize_generator(p, spectral_grid(p.source(), 400));
    const auto r = evolve_fpe(gen, bump_state(gen, 0.1, 0.02), 4.0, 2e-3);
    CHECK(r.max_mass_error <= 1e-8);
    CHECK(fit_decay_rate(r.log).rate == doctest::Approx(4.0).epsilon(0.05));
  }
  SUBCASE("truncated OU bump relaxes at lambda1") {
    const auto p = synthesize(DistributionSpec::normal(0.0, 1.0), 1.0);
    const auto gen = discretize_generator(p, Grid::cell_centered(-8.0, 8.0, 400));
    const auto r = evolve_fpe(gen, bump_state(gen, 2.0, 0.1), 16.0, 1e-2);
    CHECK(fit_decay_rate(r.log).rate == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("bad inputs") {
    const auto p = synthesize(DistributionSpec::beta(1.0, 1.0), 0.2);
    const auto gen = discretize_generator(p, spectral_grid(p.source(), 100));
    auto s = stationary_state(gen);
    std::vector<double> twice(s.density.values().begin(), s.density.values().end());
    for (auto& v : twice) v *= 2.0;
    EvolutionState bad{s.grid, GridFunction(s.grid, twice), 0.0};
    CHECK(code_of([&] { evolve_fpe(gen, bad, 1.0, 1e-2); }) == ErrorCode::InvalidArgument);
    DecayLog short_log{{0.0, 0.1}, {1.0, 0.5}};
    CHECK(code_of([&] { fit_decay_rate(short_log); }) == ErrorCode::InsufficientDecay);
  }
}

TEST_CASE("CSV writers") {
  SpectrumResult s{{0.0, 4.0}, {}, Grid::cell_centered(0.0, 1.0, 3)};
  CHECK(spectrum_csv(s) == "n,lambda\n0,0\n1,4\n");
  DecayLog log{{0.0, 0.5}, {1.0, 0.25}};
  CHECK(decay_csv(log) == "t,d\n0,1\n0.5,0.25\n");
}
