#pragma once

// Data-parallel inner loops.  Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::parallel; the two produce
// bitwise-identical results (each output element is computed by the same
// arithmetic regardless of thread count).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace optdiff::kernels {

// Number of eigenvalues of the symmetric tridiagonal (diag, offdiag) that are
// strictly below x (Sturm sequence of the LDL^T pivots).
std::size_t sturm_count(std::span<const double> diag, std::span<const double> offdiag_sq,
                        double x, double pivmin);

// Gershgorin enclosure [lo, hi] of the spectrum.
std::pair<double, double> gershgorin_bounds(std::span<const double> diag,
                                            std::span<const double> offdiag);

// One path of an Euler-Maruyama integrator; see sim.hpp for the physics.
struct PathSpec {
  std::function<double(double)> drift;
  std::function<double(double)> half_variance;
  double lower;
  double upper;
  bool reflect;
  double dt;
  std::size_t n_steps;
  std::size_t burn_in;
  std::size_t stride;
};

struct PathOutput {
  std::vector<double> samples;  // X after burn-in, every `stride` steps
  std::size_t rejections = 0;
  bool non_finite = false;
  bool boundary_violation = false;
};

// Deterministic per-path seed: splitmix64(seed ^ path_index).
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index);

namespace serial {

std::vector<double> bisect_eigenvalues(std::span<const double> diag,
                                       std::span<const double> offdiag, std::size_t count);

std::vector<double> tabulate(const std::function<double(double)>& f, std::span<const double> xs);

std::vector<PathOutput> simulate_paths(const PathSpec& spec, std::span<const double> x0,
                                       std::uint64_t seed);

// Autocovariance sum_t (x_t - mean)(x_{t+s} - mean) / (n - s), summed over
// series in order, for s = 0..max_lag.  Each series contributes with weight
// proportional to its number of lag-s pairs.
std::vector<double> autocovariance(std::span<const std::vector<double>> series, double mean,
                                   std::size_t max_lag);

}  // namespace serial

namespace parallel {

std::vector<double> bisect_eigenvalues(std::span<const double> diag,
                                       std::span<const double> offdiag, std::size_t count);

std::vector<double> tabulate(const std::function<double(double)>& f, std::span<const double> xs);

std::vector<PathOutput> simulate_paths(const PathSpec& spec, std::span<const double> x0,
                                       std::uint64_t seed);

std::vector<double> autocovariance(std::span<const std::vector<double>> series, double mean,
                                   std::size_t max_lag);

}  // namespace parallel

// Caps OpenMP threads for the parallel kernels; 0 restores the runtime default.
void set_thread_count(int n);
int thread_count();

}  // namespace optdiff::kernels
