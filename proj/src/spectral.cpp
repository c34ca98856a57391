#include "optdiff/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "optdiff/errors.hpp"
#include "optdiff/kernels.hpp"
#include "optdiff/tridiag.hpp"

namespace optdiff {

namespace {

constexpr std::size_t kMinCells = 50;

bool heavy_tailed(DistributionKind k) {
  return k == DistributionKind::StudentCauchy || k == DistributionKind::InverseGamma ||
         k == DistributionKind::FisherSnedecor;
}

void check_same_grid(const Grid& a, const Grid& b) {
  if (a.size() != b.size() || a.front() != b.front() || a.back() != b.back())
    fail(ErrorCode::InvalidArgument, "state grid does not match the generator grid");
}

}  // namespace

Generator discretize_generator(const DistributionSpec& spec, const std::function<double(double)>& half_variance,
                               const Grid& grid) {
  const std::size_t n = grid.size();
  if (n < kMinCells)
    fail(ErrorCode::GridTooCoarse, fmt::format("spectral grid needs at least {} points, got {}", kMinCells, n));
  if (grid.kind() != GridKind::Uniform) fail(ErrorCode::InvalidArgument, "spectral grid must be uniform");
  const Support& sup = spec.support();
  if (!sup.interior(grid.front()) || !sup.interior(grid.back()))
    fail(ErrorCode::InvalidArgument, "spectral grid must lie strictly inside the support");

  Generator g{grid, grid.spacing(), {}, {}, {}, {}, {}};
  const double h = g.h;
  g.pi = kernels::parallel::tabulate([&spec](double x) { return spec.pdf(x); }, grid.points());
  const std::vector<double> v = kernels::parallel::tabulate(half_variance, grid.points());

  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(g.pi[i] > 0.0) || !std::isfinite(g.pi[i]))
      fail(ErrorCode::InvalidArgument, fmt::format("pi({}) = {} is not positive", grid[i], g.pi[i]));
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      fail(ErrorCode::InvalidArgument, fmt::format("sigma^2/2 at {} = {} is not positive", grid[i], v[i]));
    mass += g.pi[i] * h;
  }
  // Truncated tails would otherwise leave the discrete stationary mass short of 1.
  for (double& p : g.pi) p /= mass;

  g.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.weights[i] = g.pi[i] * h;
  g.face.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) g.face[i] = 0.5 * (g.pi[i] * v[i] + g.pi[i + 1] * v[i + 1]);

  g.diag.assign(n, 0.0);
  g.offdiag.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g.diag[i] += g.face[i];
    g.diag[i + 1] += g.face[i];
    g.offdiag[i] = -g.face[i] / (h * std::sqrt(g.weights[i] * g.weights[i + 1]));
  }
  for (std::size_t i = 0; i < n; ++i) g.diag[i] /= g.pi[i] * h * h;
  return g;
}

Generator discretize_generator(const OptimalProcess& proc, const Grid& grid) {
  return discretize_generator(proc.source(), [&proc](double x) { return proc.variance_at(x); }, grid);
}

Grid spectral_grid(const DistributionSpec& spec, std::size_t n) {
  const Support& s = spec.support();
  if (s.compact()) return Grid::cell_centered(s.lower, s.upper, n);
  double lo, hi;
  if (heavy_tailed(spec.kind())) {
    const Support eff = spec.effective_support(1e-10);
    lo = eff.lower;
    hi = eff.upper;
    // A finite end where pi vanishes (e^(-1/x) for the inverse Gamma) is cut
    // at the same level; otherwise neighbouring cells differ by e^300.
    if (s.lower_finite() && spec.pdf(s.lower) == 0.0) {
      double peak = 0.0;
      for (int i = 1; i < 2000; ++i) peak = std::max(peak, spec.pdf(lo + (hi - lo) * i / 2000.0));
      double a = s.lower, b = spec.center();
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double mid = 0.5 * (a + b);
        (spec.pdf(mid) < 1e-10 * peak ? a : b) = mid;
      }
      lo = a;
    }
  } else {
    const MomentSummary m = spec.moments();
    const double sd = std::sqrt(m.variance);
    lo = std::max(s.lower, m.m1 - 8.0 * sd);
    hi = std::min(s.upper, m.m1 + 8.0 * sd);
  }
  return Grid::cell_centered(lo, hi, n);
}

SpectrumResult spectrum(const Generator& gen, std::size_t k) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "spectrum needs k >= 2");
  if (k > gen.diag.size()) fail(ErrorCode::InvalidArgument, "more eigenpairs requested than grid cells");
  const auto pairs = tridiag_eigs(gen.diag, gen.offdiag, k);
  SpectrumResult out{{}, {}, gen.grid};
  for (const auto& p : pairs) {
    std::vector<double> phi(p.vector.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = p.vector[i] / std::sqrt(gen.weights[i]);
    if (phi.back() < 0.0)
      for (double& f : phi) f = -f;
    out.eigenvalues.push_back(p.value);
    out.eigenfunctions.emplace_back(gen.grid, std::move(phi));
  }
  return out;
}

double rayleigh_quotient(const Generator& gen, std::span<const double> q) {
  const std::size_t n = gen.weights.size();
  if (q.size() != n) fail(ErrorCode::InvalidArgument, "Q has the wrong number of grid values");
  double mean = 0.0, raw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(q[i])) fail(ErrorCode::InvalidArgument, "Q has a non-finite value");
    mean += gen.weights[i] * q[i];
    raw += gen.weights[i] * q[i] * q[i];
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = q[i] - mean;
    den += gen.weights[i] * c * c;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dq = q[i + 1] - q[i];
    num += gen.face[i] * dq * dq / gen.h;
  }
  // Centring a constant leaves only rounding noise of relative size ~eps.
  if (!(den > 1e-24 * raw) || den == 0.0) fail(ErrorCode::ZeroDenominator, "Q is constant under pi");
  return num / den;
}

double rayleigh_quotient(const OptimalProcess& proc, const GridFunction& q) {
  return rayleigh_quotient(discretize_generator(proc, q.grid()), q.values());
}

EvolutionState stationary_state(const Generator& gen) {
  return {gen.grid, GridFunction(gen.grid, gen.pi), 0.0};
}

EvolutionState bump_state(const Generator& gen, double center, double width) {
  if (!(width > 0.0)) fail(ErrorCode::InvalidArgument, "bump width must be positive");
  std::vector<double> p(gen.grid.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = (gen.grid[i] - center) / width;
    p[i] = std::exp(-0.5 * z * z);
    mass += p[i] * gen.h;
  }
  if (!(mass > 0.0)) fail(ErrorCode::InvalidArgument, "bump does not overlap the grid");
  for (double& v : p) v /= mass;
  return {gen.grid, GridFunction(gen.grid, std::move(p)), 0.0};
}

EvolutionResult evolve_fpe(const Generator& gen, const EvolutionState& initial, double t_end, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail(ErrorCode::InvalidArgument, "t_end must be nonnegative");
  check_same_grid(gen.grid, initial.grid);
  const std::size_t n = gen.weights.size();
  const double h = gen.h;

  std::vector<double> q(n);
  double mass0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = initial.density[i] / gen.pi[i];
    mass0 += gen.weights[i] * q[i];
  }
  if (std::abs(mass0 - 1.0) > 1e-6)
    fail(ErrorCode::InvalidArgument, fmt::format("initial density has mass {:.17g}, not 1", mass0));

  // K in q-space: K_ii = (k- + k+)/h, K_i,i+1 = -k+/h.
  std::vector<double> kd(n, 0.0), ko(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    kd[i] += gen.face[i] / h;
    kd[i + 1] += gen.face[i] / h;
    ko[i] = -gen.face[i] / h;
  }
  auto solve = [&](double theta_dt, const std::vector<double>& rhs) {
    std::vector<double> d(n), off(n - 1);
    for (std::size_t i = 0; i < n; ++i) d[i] = gen.weights[i] + theta_dt * kd[i];
    for (std::size_t i = 0; i + 1 < n; ++i) off[i] = theta_dt * ko[i];
    return thomas_solve(off, d, off, rhs);
  };
  auto apply_explicit = [&](double theta_dt) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      double kq = kd[i] * q[i];
      if (i > 0) kq += ko[i - 1] * q[i - 1];
      if (i + 1 < n) kq += ko[i] * q[i + 1];
      r[i] = gen.weights[i] * q[i] - theta_dt * kq;
    }
    return r;
  };

  EvolutionResult res{initial, {}, 0.0};
  auto record = [&](double t) {
    double d = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = gen.pi[i] * q[i];
      if (p < -1e-10)
        fail(ErrorCode::UnstableStep, fmt::format("density {:.3e} at x = {} at t = {}; reduce dt", p, gen.grid[i], t));
      d += std::abs(q[i] - 1.0) * gen.weights[i];
      mass += gen.weights[i] * q[i];
    }
    const double err = std::abs(mass - mass0);
    res.max_mass_error = std::max(res.max_mass_error, err);
    if (err > 1e-8) fail(ErrorCode::NumericalFailure, fmt::format("mass drifted by {:.3e}", err));
    res.log.t.push_back(t);
    res.log.d.push_back(d);
  };

  record(initial.time);
  const std::size_t steps = t_end == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double step = steps ? t_end / static_cast<double>(steps) : 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    if (s == 0) {
      for (int k = 0; k < 4; ++k) {
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = gen.weights[i] * q[i];
        q = solve(0.25 * step, rhs);
      }
    } else {
      q = solve(0.5 * step, apply_explicit(0.5 * step));
    }
    record(initial.time + step * static_cast<double>(s + 1));
  }

  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = gen.pi[i] * q[i];
  res.state = {gen.grid, GridFunction(gen.grid, std::move(p)), initial.time + t_end};
  return res;
}

RateEstimate fit_decay_rate(const DecayLog& log) {
  if (log.d.empty()) fail(ErrorCode::InsufficientDecay, "empty decay log");
  const double hi = 0.1 * log.d.front();
  std::vector<double> t, d;
  for (std::size_t i = 0; i < log.d.size(); ++i) {
    if (log.d[i] >= 1e-6 && log.d[i] <= hi) {
      t.push_back(log.t[i]);
      d.push_back(log.d[i]);
    }
  }
  if (t.size() < 4)
    fail(ErrorCode::InsufficientDecay,
         fmt::format("only {} samples with d in [1e-6, {:.3e}]; run longer or refine dt", t.size(), hi));
  return fit_exponential_decay(t, d);
}

std::string spectrum_csv(const SpectrumResult& s) {
  std::string out = "n,lambda\n";
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) out += fmt::format("{},{:.17g}\n", i, s.eigenvalues[i]);
  return out;
}

std::string decay_csv(const DecayLog& log) {
  std::string out = "t,d\n";
  for (std::size_t i = 0; i < log.t.size(); ++i) out += fmt::format("{:.17g},{:.17g}\n", log.t[i], log.d[i]);
  return out;
}

}  // namespace optdiff
