#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace optdiff {

struct EigenPair {
  double value;
  std::vector<double> vector;  // unit 2-norm
};

// k smallest eigenpairs of the symmetric tridiagonal matrix with the given
// diagonal and off-diagonal, in nondecreasing order.  Eigenvalues by Sturm
// bisection, eigenvectors by inverse iteration (re-orthogonalised within
// clusters).  Each pair satisfies ||T v - lambda v|| <= 1e-10 ||T||.
std::vector<EigenPair> tridiag_eigs(std::span<const double> diag, std::span<const double> offdiag,
                                    std::size_t k);

std::vector<double> tridiag_eigenvalues(std::span<const double> diag,
                                        std::span<const double> offdiag, std::size_t k);

// Max absolute row sum.
double tridiag_norm(std::span<const double> diag, std::span<const double> offdiag);

// y = T x
std::vector<double> tridiag_multiply(std::span<const double> diag, std::span<const double> offdiag,
                                     std::span<const double> x);

// Solves the (general) tridiagonal system with sub/diag/super diagonals by the
// Thomas algorithm; no pivoting, so intended for diagonally dominant systems.
std::vector<double> thomas_solve(std::span<const double> sub, std::span<const double> diag,
                                 std::span<const double> super, std::span<const double> rhs);

}  // namespace optdiff
