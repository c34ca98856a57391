#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace optdiff {

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes with
// the Fritsch-Butland harmonic mean).  Preserves monotonicity of the data on
// every interval, so positive data gives a positive interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;

  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }
  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }

  // Exact integral of the interpolant over [lower(), x].
  double integral_to(double x) const;
  // Exact integral of t^power * interpolant(t) over the whole knot span
  // (power <= 4; 4-point Gauss-Legendre per interval is exact there).
  double moment(int power) const;

 private:
  std::size_t interval(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
  std::vector<double> cumulative_;  // integral from lower() to each knot
};

}  // namespace optdiff
