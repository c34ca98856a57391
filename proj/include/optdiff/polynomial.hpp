#pragma once

#include <vector>

namespace optdiff {

// Dense polynomial, coefficients in ascending powers.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  explicit Polynomial(std::vector<double> coeffs);

  static Polynomial monomial(int degree, double coeff = 1.0);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }
  double operator()(double x) const;

  Polynomial derivative() const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;

 private:
  void trim();
  std::vector<double> c_;
};

}  // namespace optdiff
