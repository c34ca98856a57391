#include "optdiff/polynomial.hpp"

#include <algorithm>

namespace optdiff {

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_.push_back(0.0);
  trim();
}

Polynomial Polynomial::monomial(int degree, double coeff) {
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  c.back() = coeff;
  return Polynomial(std::move(c));
}

void Polynomial::trim() {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() == 1) return Polynomial();
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
  for (std::size_t k = 0; k < o.c_.size(); ++k) r[k] += o.c_[k];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double s) const {
  std::vector<double> r(c_);
  for (double& v : r) v *= s;
  return Polynomial(std::move(r));
}

}  // namespace optdiff
