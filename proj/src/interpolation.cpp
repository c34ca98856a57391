#include "optdiff/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "optdiff/errors.hpp"
#include "optdiff/quadrature.hpp"

namespace optdiff {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) fail(ErrorCode::InvalidArgument, "interpolant needs >= 2 matching points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) fail(ErrorCode::InvalidArgument, "interpolant knots must increase");

  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  slope_.assign(n, 0.0);
  if (n == 2) {
    slope_[0] = slope_[1] = delta[0];
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] > 0.0) {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    // One-sided three-point end slopes, limited to keep monotonicity.
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) {
        s = 0.0;
      } else if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) {
        s = 3.0 * d0;
      }
      return s;
    };
    slope_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    slope_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  cumulative_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // Exact for a cubic: Simpson's rule needs the midpoint value only.
    const double mid = 0.5 * (y_[i] + y_[i + 1]) + 0.125 * h[i] * (slope_[i] - slope_[i + 1]);
    cumulative_[i + 1] = cumulative_[i] + h[i] / 6.0 * (y_[i] + 4.0 * mid + y_[i + 1]);
  }
}

std::size_t MonotoneCubic::interval(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
         (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * slope_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[i] + (-6 * t2 + 6 * t) * y_[i + 1]) / h +
         (3 * t2 - 4 * t + 1) * slope_[i] + (3 * t2 - 2 * t) * slope_[i + 1];
}

double MonotoneCubic::integral_to(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return cumulative_.back();
  const std::size_t i = interval(x);
  const double mid = 0.5 * (x_[i] + x);
  const double part = (x - x_[i]) / 6.0 * ((*this)(x_[i]) + 4.0 * (*this)(mid) + (*this)(x));
  return cumulative_[i] + part;
}

double MonotoneCubic::moment(int power) const {
  if (power < 0 || power > 4) fail(ErrorCode::InvalidArgument, "moment power must be in 0..4");
  double total = 0.0;
  auto f = [&](double t) { return std::pow(t, power) * (*this)(t); };
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) total += gauss_legendre(f, x_[i], x_[i + 1], 4);
  return total;
}

}  // namespace optdiff
