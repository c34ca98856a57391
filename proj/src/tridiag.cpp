#include "optdiff/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "optdiff/errors.hpp"
#include "optdiff/kernels.hpp"

namespace optdiff {
namespace {

void check_shape(std::span<const double> diag, std::span<const double> offdiag) {
  if (diag.empty()) fail(ErrorCode::InvalidArgument, "empty tridiagonal matrix");
  if (offdiag.size() + 1 != diag.size())
    fail(ErrorCode::InvalidArgument,
         fmt::format("offdiag has {} entries, expected {}", offdiag.size(), diag.size() - 1));
}

// LU with partial pivoting of T - shift*I (LAPACK dgttrf layout).
struct TridiagLU {
  std::vector<double> dl, d, du, du2;
  std::vector<char> pivoted;

  TridiagLU(std::span<const double> diag, std::span<const double> offdiag, double shift,
            double tiny) {
    const std::size_t n = diag.size();
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - shift;
    dl.assign(offdiag.begin(), offdiag.end());
    du.assign(offdiag.begin(), offdiag.end());
    du2.assign(n > 2 ? n - 2 : 0, 0.0);
    pivoted.assign(n > 0 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double tmp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = tmp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        pivoted[i] = 1;
      }
      if (std::abs(d[i]) < tiny) d[i] = std::copysign(tiny, d[i] == 0.0 ? 1.0 : d[i]);
    }
    if (std::abs(d[n - 1]) < tiny) d[n - 1] = std::copysign(tiny, d[n - 1] == 0.0 ? 1.0 : d[n - 1]);
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (pivoted[i]) {
        std::swap(b[i], b[i + 1]);
      }
      b[i + 1] -= dl[i] * b[i];
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t ii = n; ii-- > 2;) {
      const std::size_t i = ii - 2;
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
  }
};

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void scale(std::vector<double>& v, double f) {
  for (double& x : v) x *= f;
}

}  // namespace

double tridiag_norm(std::span<const double> diag, std::span<const double> offdiag) {
  check_shape(diag, offdiag);
  double best = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(offdiag[i - 1]);
    if (i < offdiag.size()) r += std::abs(offdiag[i]);
    best = std::max(best, r);
  }
  return best;
}

std::vector<double> tridiag_multiply(std::span<const double> diag, std::span<const double> offdiag,
                                     std::span<const double> x) {
  check_shape(diag, offdiag);
  const std::size_t n = diag.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += offdiag[i - 1] * x[i - 1];
    if (i + 1 < n) s += offdiag[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

std::vector<double> tridiag_eigenvalues(std::span<const double> diag,
                                        std::span<const double> offdiag, std::size_t k) {
  check_shape(diag, offdiag);
  if (k > diag.size())
    fail(ErrorCode::InvalidArgument, fmt::format("requested {} eigenvalues of a {}x{} matrix", k,
                                                 diag.size(), diag.size()));
  return kernels::parallel::bisect_eigenvalues(diag, offdiag, k);
}

std::vector<EigenPair> tridiag_eigs(std::span<const double> diag, std::span<const double> offdiag,
                                    std::size_t k) {
  const auto values = tridiag_eigenvalues(diag, offdiag, k);
  const std::size_t n = diag.size();
  const double tnorm = std::max(tridiag_norm(diag, offdiag), std::numeric_limits<double>::min());
  const double tiny = std::numeric_limits<double>::epsilon() * tnorm;
  const double cluster = 1e-3 * tnorm;
  const double target = 1e-10 * tnorm;

  std::vector<EigenPair> out;
  out.reserve(k);
  std::uint64_t state = 0x2545f4914f6cdd1dULL;
  for (std::size_t j = 0; j < k; ++j) {
    const double lambda = values[j];
    TridiagLU lu(diag, offdiag, lambda, tiny);

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      state = kernels::path_seed(state, i + 1);
      v[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
    }
    scale(v, 1.0 / norm2(v));

    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 12; ++it) {
      lu.solve(v);
      // Two passes of modified Gram-Schmidt against the cluster.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t p = 0; p < out.size(); ++p) {
          if (std::abs(out[p].value - lambda) > cluster) continue;
          double dot = 0.0;
          for (std::size_t i = 0; i < n; ++i) dot += out[p].vector[i] * v[i];
          for (std::size_t i = 0; i < n; ++i) v[i] -= dot * out[p].vector[i];
        }
      }
      const double nv = norm2(v);
      if (!(nv > 0.0) || !std::isfinite(nv)) {
        state = kernels::path_seed(state, 0xabcdef);
        for (std::size_t i = 0; i < n; ++i) {
          state = kernels::path_seed(state, i + 7);
          v[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
        }
        scale(v, 1.0 / norm2(v));
        continue;
      }
      scale(v, 1.0 / nv);
      const auto tv = tridiag_multiply(diag, offdiag, v);
      double r2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) r2 += (tv[i] - lambda * v[i]) * (tv[i] - lambda * v[i]);
      residual = std::sqrt(r2);
      if (it >= 1 && residual <= 1e-3 * target) break;
    }
    if (!(residual <= target))
      fail(ErrorCode::ConvergenceFailure,
           fmt::format("inverse iteration for eigenvalue {} stalled at residual {:.3e}", j, residual));
    out.push_back({lambda, std::move(v)});
  }
  return out;
}

std::vector<double> thomas_solve(std::span<const double> sub, std::span<const double> diag,
                                 std::span<const double> super, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (sub.size() + 1 != n || super.size() + 1 != n || rhs.size() != n)
    fail(ErrorCode::InvalidArgument, "thomas_solve: inconsistent sizes");
  std::vector<double> c(n), d(n);
  double denom = diag[0];
  if (denom == 0.0) fail(ErrorCode::NumericalFailure, "thomas_solve: zero pivot");
  c[0] = n > 1 ? super[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i - 1] * c[i - 1];
    if (denom == 0.0) fail(ErrorCode::NumericalFailure, "thomas_solve: zero pivot");
    c[i] = i + 1 < n ? super[i] / denom : 0.0;
    d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
  return d;
}

}  // namespace optdiff
