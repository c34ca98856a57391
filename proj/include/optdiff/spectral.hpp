#pragma once

#include <functional>
#include <string>
#include <vector>

#include "optdiff/distributions.hpp"
#include "optdiff/fit.hpp"
#include "optdiff/grid.hpp"
#include "optdiff/optimal.hpp"

namespace optdiff {

// Finite-volume form of -(1/pi) d/dx (pi sigma^2/2 d/dx) on a uniform
// cell-centred grid.  With W_i = pi_i h the generalised problem K phi =
// lambda W phi is stored symmetrised, S = W^-1/2 K W^-1/2, so that diag and
// offdiag are the symmetric tridiagonal matrix.  Zero flux through both end
// faces.
struct Generator {
  Grid grid;
  double h;
  std::vector<double> pi;       // density at the cell centres, rescaled to sum(pi) h = 1
  std::vector<double> weights;  // W_i = pi_i h
  std::vector<double> face;     // pi sigma^2/2 at the n-1 interior faces
  std::vector<double> diag;
  std::vector<double> offdiag;
};

// GridTooCoarse below 50 points; InvalidArgument for a nonuniform grid, a
// point outside the support, or a cell where pi is not positive and finite.
Generator discretize_generator(const OptimalProcess& proc, const Grid& grid);
Generator discretize_generator(const DistributionSpec& spec, const std::function<double(double)>& half_variance,
                               const Grid& grid);

// Cell-centred grid for spectral work: the whole support when compact,
// otherwise m1 +- 8 sd clipped to the support, widened to pi < 1e-10 max pi
// for the heavy-tailed kinds (Student, inverse Gamma, Fisher-Snedecor).
Grid spectral_grid(const DistributionSpec& spec, std::size_t n);

struct SpectrumResult {
  std::vector<double> eigenvalues;
  std::vector<GridFunction> eigenfunctions;  // sum_i pi_i phi_m phi_n h = delta_mn
  Grid grid;
};

// k >= 2 smallest eigenpairs.  Signs are fixed so that each eigenfunction is
// positive at the right-most cell.
SpectrumResult spectrum(const Generator& gen, std::size_t k);

// sum_faces k (dQ)^2 / h over sum_i W_i Q_i^2, after removing the pi-mean
// of Q.  ZeroDenominator when Q is constant.
double rayleigh_quotient(const Generator& gen, std::span<const double> q);
double rayleigh_quotient(const OptimalProcess& proc, const GridFunction& q);

struct EvolutionState {
  Grid grid;
  GridFunction density;  // p(t, x_i)
  double time = 0.0;
};

struct DecayLog {
  std::vector<double> t;
  std::vector<double> d;  // sum_i |p_i - pi_i| h
};

struct EvolutionResult {
  EvolutionState state;
  DecayLog log;
  double max_mass_error = 0.0;
};

// Stationary state and a normalised Gaussian bump on the generator's grid.
EvolutionState stationary_state(const Generator& gen);
EvolutionState bump_state(const Generator& gen, double center, double width);

// Crank-Nicolson in q = p/pi: (W + dt/2 K) q' = (W - dt/2 K) q.  The first
// step is replaced by four backward-Euler quarter steps to damp the
// high-frequency modes of a sharp initial condition.  UnstableStep if any
// p_i < -1e-10; NumericalFailure if the mass drifts by more than 1e-8.
EvolutionResult evolve_fpe(const Generator& gen, const EvolutionState& initial, double t_end, double dt);

// Slope of ln d(t) over the samples with d in [1e-6, 0.1 d(0)].
// InsufficientDecay when fewer than 4 samples fall in that window.
RateEstimate fit_decay_rate(const DecayLog& log);

std::string spectrum_csv(const SpectrumResult& s);  // n,lambda
std::string decay_csv(const DecayLog& log);         // t,d

}  // namespace optdiff
