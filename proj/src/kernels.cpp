#include "optdiff/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

#include <omp.h>

namespace optdiff::kernels {
namespace {

int g_threads = 0;

int active_threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

double pivot_floor(std::span<const double> offdiag_sq) {
  double m = 1.0;
  for (double e2 : offdiag_sq) m = std::max(m, e2);
  return std::numeric_limits<double>::min() * m;
}

double bisect_one(std::span<const double> diag, std::span<const double> offdiag_sq,
                  double pivmin, double lo, double hi, std::size_t index) {
  // Invariant: count(lo) <= index < count(hi).
  for (int it = 0; it < 256; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double width = hi - lo;
    if (width <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
      break;
    if (sturm_count(diag, offdiag_sq, mid, pivmin) > index) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Exceptions must not escape an OpenMP region; keep the first one and
// rethrow it after the loop.
class ErrorSlot {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(optdiff_error_slot)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

std::vector<double> squares(std::span<const double> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return x * x; });
  return out;
}

// Shared per-path body so the serial and OpenMP drivers agree bit for bit.
PathOutput run_path(const PathSpec& spec, double x0, std::uint64_t seed) {
  PathOutput out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_dt = std::sqrt(spec.dt);
  const std::size_t stride = std::max<std::size_t>(1, spec.stride);
  if (spec.n_steps > spec.burn_in) out.samples.reserve((spec.n_steps - spec.burn_in) / stride + 1);

  double x = x0;
  for (std::size_t step = 0; step < spec.n_steps; ++step) {
    const double mu = spec.drift(x);
    const double amp = std::sqrt(2.0 * std::max(0.0, spec.half_variance(x))) * sqrt_dt;
    double next = x + mu * spec.dt + amp * normal(rng);
    if (spec.reflect) {
      for (int k = 0; k < 8 && (next < spec.lower || next > spec.upper); ++k) {
        if (next < spec.lower) next = 2.0 * spec.lower - next;
        if (next > spec.upper) next = 2.0 * spec.upper - next;
      }
      next = std::clamp(next, spec.lower, spec.upper);
    } else if (next < spec.lower || next > spec.upper) {
      std::size_t consecutive = 0;
      while (next < spec.lower || next > spec.upper) {
        ++out.rejections;
        if (++consecutive > 100) {
          out.boundary_violation = true;
          return out;
        }
        next = x + mu * spec.dt + amp * normal(rng);
      }
    }
    if (!std::isfinite(next)) {
      out.non_finite = true;
      return out;
    }
    x = next;
    if (step >= spec.burn_in && (step - spec.burn_in) % stride == 0) out.samples.push_back(x);
  }
  return out;
}

double autocov_at(std::span<const std::vector<double>> series, double mean, std::size_t lag) {
  double num = 0.0;
  std::size_t pairs = 0;
  for (const auto& s : series) {
    if (s.size() <= lag) continue;
    const std::size_t n = s.size() - lag;
    for (std::size_t t = 0; t < n; ++t) num += (s[t] - mean) * (s[t + lag] - mean);
    pairs += n;
  }
  return pairs > 0 ? num / static_cast<double>(pairs) : 0.0;
}

}  // namespace

std::size_t sturm_count(std::span<const double> diag, std::span<const double> offdiag_sq,
                        double x, double pivmin) {
  std::size_t count = 0;
  double q = diag[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    q = diag[i] - x - offdiag_sq[i - 1] / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

std::pair<double, double> gershgorin_bounds(std::span<const double> diag,
                                            std::span<const double> offdiag) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(offdiag[i - 1]);
    if (i + 1 < n) r += std::abs(offdiag[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  const double pad = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)) +
                     std::numeric_limits<double>::min();
  return {lo - pad, hi + pad};
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index) {
  std::uint64_t z = seed ^ path_index;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void set_thread_count(int n) { g_threads = std::max(0, n); }
int thread_count() { return active_threads(); }

namespace serial {

std::vector<double> bisect_eigenvalues(std::span<const double> diag,
                                       std::span<const double> offdiag, std::size_t count) {
  const auto e2 = squares(offdiag);
  const double pivmin = pivot_floor(e2);
  const auto [lo, hi] = gershgorin_bounds(diag, offdiag);
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = bisect_one(diag, e2, pivmin, lo, hi, j);
  return out;
}

std::vector<double> tabulate(const std::function<double(double)>& f, std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
  return out;
}

std::vector<PathOutput> simulate_paths(const PathSpec& spec, std::span<const double> x0,
                                       std::uint64_t seed) {
  std::vector<PathOutput> out(x0.size());
  for (std::size_t p = 0; p < x0.size(); ++p) out[p] = run_path(spec, x0[p], path_seed(seed, p));
  return out;
}

std::vector<double> autocovariance(std::span<const std::vector<double>> series, double mean,
                                   std::size_t max_lag) {
  std::vector<double> out(max_lag + 1);
  for (std::size_t s = 0; s <= max_lag; ++s) out[s] = autocov_at(series, mean, s);
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<double> bisect_eigenvalues(std::span<const double> diag,
                                       std::span<const double> offdiag, std::size_t count) {
  const auto e2 = squares(offdiag);
  const double pivmin = pivot_floor(e2);
  const auto [lo, hi] = gershgorin_bounds(diag, offdiag);
  std::vector<double> out(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic) num_threads(active_threads())
  for (std::ptrdiff_t j = 0; j < n; ++j)
    out[static_cast<std::size_t>(j)] = bisect_one(diag, e2, pivmin, lo, hi, static_cast<std::size_t>(j));
  return out;
}

std::vector<double> tabulate(const std::function<double(double)>& f, std::span<const double> xs) {
  std::vector<double> out(xs.size());
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
  ErrorSlot slot;
#pragma omp parallel for schedule(static) num_threads(active_threads())
  for (std::ptrdiff_t i = 0; i < n; ++i)
    slot.run([&] { out[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]); });
  slot.rethrow();
  return out;
}

std::vector<PathOutput> simulate_paths(const PathSpec& spec, std::span<const double> x0,
                                       std::uint64_t seed) {
  std::vector<PathOutput> out(x0.size());
  const auto n = static_cast<std::ptrdiff_t>(x0.size());
  ErrorSlot slot;
#pragma omp parallel for schedule(dynamic) num_threads(active_threads())
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const auto i = static_cast<std::size_t>(p);
    slot.run([&] { out[i] = run_path(spec, x0[i], path_seed(seed, i)); });
  }
  slot.rethrow();
  return out;
}

std::vector<double> autocovariance(std::span<const std::vector<double>> series, double mean,
                                   std::size_t max_lag) {
  std::vector<double> out(max_lag + 1);
  const auto n = static_cast<std::ptrdiff_t>(max_lag + 1);
#pragma omp parallel for schedule(dynamic, 8) num_threads(active_threads())
  for (std::ptrdiff_t s = 0; s < n; ++s)
    out[static_cast<std::size_t>(s)] = autocov_at(series, mean, static_cast<std::size_t>(s));
  return out;
}

}  // namespace parallel
}  // namespace optdiff::kernels
