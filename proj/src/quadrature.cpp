#include "optdiff/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <fmt/format.h>

#include "optdiff/errors.hpp"

namespace optdiff {
namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  double resabs;
  bool at_floor;
};

struct ByError {
  bool operator()(const Segment& l, const Segment& r) const { return l.error < r.error; }
};

Segment gk15(const RealFn& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  Segment s{a, b, resk * half, std::abs((resk - resg) * half), std::abs(resabs * half), false};
  const double floor = 50.0 * std::numeric_limits<double>::epsilon() * s.resabs;
  if (s.error <= floor || std::abs(half) <= 4.0 * std::numeric_limits<double>::min() ||
      half <= 1e2 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) {
    s.at_floor = true;
  }
  return s;
}

}  // namespace

QuadratureResult integrate(const RealFn& f, double a, double b, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "quadrature tolerance must be positive");
  return integrate(f, a, b, QuadratureOptions{tol, 0.0});
}

QuadratureResult integrate(const RealFn& f, double a, double b, const QuadratureOptions& opts) {
  if (!(a < b)) fail(ErrorCode::InvalidInterval, fmt::format("need a < b, got [{}, {}]", a, b));
  if (!std::isfinite(a) || !std::isfinite(b))
    fail(ErrorCode::InvalidInterval, "finite endpoints required; use integrate_to_infinity");

  std::priority_queue<Segment, std::vector<Segment>, ByError> active;
  std::vector<Segment> settled;
  std::size_t evals = 15;
  Segment first = gk15(f, a, b);
  double total = first.value;
  double error = first.error;
  double resabs = first.resabs;
  if (first.at_floor) settled.push_back(first); else active.push(first);

  auto target = [&] {
    return std::max({opts.abs_tol, opts.rel_tol * std::abs(total),
                     100.0 * std::numeric_limits<double>::epsilon() * resabs});
  };

  while (error > target() && !active.empty()) {
    if (evals + 30 > opts.max_evaluations) {
      fail(ErrorCode::NonConvergence,
           fmt::format("error estimate {:.3e} exceeds tolerance {:.3e} after {} evaluations", error,
                       target(), evals));
    }
    Segment worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    resabs += left.resabs + right.resabs - worst.resabs;
    for (Segment* s : {&left, &right}) {
      if (s->at_floor) settled.push_back(*s); else active.push(*s);
    }
    // Re-sum occasionally so the running totals don't drift.
    if (evals % 3000 < 30) {
      total = 0.0;
      error = 0.0;
      resabs = 0.0;
      auto copy = active;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        resabs += copy.top().resabs;
        copy.pop();
      }
      for (const Segment& s : settled) {
        total += s.value;
        error += s.error;
        resabs += s.resabs;
      }
    }
  }
  if (!std::isfinite(total) || !std::isfinite(error))
    fail(ErrorCode::NumericalFailure, "integrand produced a non-finite value");
  if (error > target())
    fail(ErrorCode::NonConvergence,
         fmt::format("error estimate {:.3e} stuck above tolerance {:.3e}", error, target()));
  return {total, error, evals};
}

QuadratureResult integrate(const RealFn& f, double a, double b, EndpointSingularity sing,
                           const QuadratureOptions& opts) {
  if (sing == EndpointSingularity::None) return integrate(f, a, b, opts);
  if (!(a < b)) fail(ErrorCode::InvalidInterval, fmt::format("need a < b, got [{}, {}]", a, b));
  const bool lower = sing == EndpointSingularity::Lower || sing == EndpointSingularity::Both;
  const bool upper = sing == EndpointSingularity::Upper || sing == EndpointSingularity::Both;
  const double split = lower && upper ? 0.5 * (a + b) : (lower ? b : a);

  QuadratureOptions part = opts;
  if (lower && upper) part.abs_tol = 0.5 * opts.abs_tol;

  QuadratureResult out;
  if (lower) {
    auto g = [&](double u) { return 2.0 * u * f(a + u * u); };
    auto r = integrate(g, 0.0, std::sqrt(split - a), part);
    out.value += r.value;
    out.abs_error_estimate += r.abs_error_estimate;
    out.evaluations += r.evaluations;
  }
  if (upper) {
    auto g = [&](double u) { return 2.0 * u * f(b - u * u); };
    auto r = integrate(g, 0.0, std::sqrt(b - split), part);
    out.value += r.value;
    out.abs_error_estimate += r.abs_error_estimate;
    out.evaluations += r.evaluations;
  }
  return out;
}

QuadratureResult integrate_to_infinity(const RealFn& f, double a, double scale,
                                       const QuadratureOptions& opts) {
  if (!(scale > 0.0)) fail(ErrorCode::InvalidArgument, "tail scale must be positive");
  // z = a + scale (1/u^2 - 1).  An algebraic tail z^-p becomes u^(2p-3),
  // which stays bounded down to p = 3/2 (the t/(1-t) map is singular there).
  auto g = [&](double u) {
    const double z = a + scale * (1.0 / (u * u) - 1.0);
    if (!std::isfinite(z)) return 0.0;
    const double v = f(z) * 2.0 * scale / (u * u * u);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, opts);
}

QuadratureResult integrate_from_minus_infinity(const RealFn& f, double b, double scale,
                                               const QuadratureOptions& opts) {
  auto mirrored = [&](double z) { return f(2.0 * b - z); };
  return integrate_to_infinity(mirrored, b, scale, opts);
}

double gauss_legendre(const RealFn& f, double a, double b, int n) {
  // Nodes/weights on [-1, 1], positive half only (symmetric rules).
  static const std::array<std::vector<std::pair<double, double>>, 9> rules = {{
      {},
      {{0.0, 2.0}},
      {{0.5773502691896257645091488, 1.0}},
      {{0.0, 0.8888888888888888888888889}, {0.7745966692414833770358531, 0.5555555555555555555555556}},
      {{0.3399810435848562648026658, 0.6521451548625461426269361},
       {0.8611363115940525752239465, 0.3478548451374538573730639}},
      {{0.0, 0.5688888888888888888888889},
       {0.5384693101056830910363144, 0.4786286704993664680412915},
       {0.9061798459386639927976269, 0.2369268850561890875142640}},
      {{0.2386191860831969086305017, 0.4679139345726910473898703},
       {0.6612093864662645136613996, 0.3607615730481386075698335},
       {0.9324695142031520278123016, 0.1713244923791703450402961}},
      {{0.0, 0.4179591836734693877551020},
       {0.4058451513773971669066064, 0.3818300505051189449503698},
       {0.7415311855993944398638648, 0.2797053914892766679014678},
       {0.9491079123427585245261897, 0.1294849661688696932706114}},
      {{0.1834346424956498049394761, 0.3626837833783619829651504},
       {0.5255324099163289858177390, 0.3137066458778872873379622},
       {0.7966664774136267395915539, 0.2223810344533744705443560},
       {0.9602898564975362316835609, 0.1012285362903762591525314}},
  }};
  if (n < 1 || n > 8) fail(ErrorCode::InvalidArgument, "Gauss-Legendre order must be in 1..8");
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (const auto& [x, w] : rules[static_cast<std::size_t>(n)]) {
    if (x == 0.0) {
      sum += w * f(c);
    } else {
      sum += w * (f(c - h * x) + f(c + h * x));
    }
  }
  return sum * h;
}

}  // namespace optdiff
