#pragma once

// Euler-Maruyama paths of dX = mu(X) dt + sqrt(2 * (sigma^2/2)(X)) dW.
// The catalog stores the half-variance, so the noise amplitude carries the
// factor two back in.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optdiff/distributions.hpp"
#include "optdiff/fit.hpp"
#include "optdiff/optimal.hpp"

namespace optdiff {

enum class BoundaryMode { Reflect, RejectStep };

std::string_view to_string(BoundaryMode m);
BoundaryMode parse_boundary_mode(std::string_view s);  // "reflect" | "reject" | "reject-step"

struct SimConfig {
  double dt = 1e-3;
  std::size_t n_steps = 100000;  // per path
  std::size_t n_paths = 1;
  std::uint64_t seed = 1;
  std::size_t burn_in = 0;  // steps discarded at the start of each path
  BoundaryMode boundary_mode = BoundaryMode::Reflect;
  std::size_t stride = 1;     // keep every stride-th post-burn-in state
  std::size_t bins = 50;
  double max_lag_time = 0.0;  // 0 picks 5 tau when tau is known, else T/20
};

// Checks dt > 0, n_steps > 0, n_paths > 0, burn_in < n_steps, bins > 0.
void validate(const SimConfig& cfg);

// Coefficients of a one-dimensional SDE.  With no observable the
// autocorrelation is taken of the standardized state (x - m1)/sd using the
// sample moments.
struct SdeModel {
  Support support{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  std::function<double(double)> drift;
  std::function<double(double)> half_variance;
  std::optional<LinearFn> observable;
  std::optional<double> tau_hint;
  // Stationary law when known; used for histogram range and stationary starts.
  std::optional<DistributionSpec> stationary;

  static SdeModel from(const OptimalProcess& proc);
};

struct HistogramBin {
  double lo;
  double hi;
  double freq;  // fraction of all post-burn-in samples
};

struct SimStats {
  std::size_t n_samples = 0;
  double m1 = 0.0;
  double m2 = 0.0;
  double m1_std_error = 0.0;  // batch means over paths (or blocks of one path)
  std::pair<double, double> m1_halves{0.0, 0.0};  // first / second half of every path
  std::vector<HistogramBin> histogram;
  double lag_dt = 0.0;  // time between consecutive autocovariance lags
  std::vector<double> autocov;  // C(k lag_dt) of the observable, C(0) ~ 1
  std::vector<RateEstimate> block_rates;  // per-block fits, used for std_error
  std::vector<double> final_states;  // X at the last step of each path
  std::size_t rejections = 0;
};

// Every path starts at x0.
SimStats simulate(const SdeModel& model, const SimConfig& cfg, double x0);
SimStats simulate(const OptimalProcess& proc, const SimConfig& cfg, double x0);

// Each path starts from an independent draw of the stationary law (inverse
// cdf of a uniform taken from the path's own seed).
SimStats simulate_stationary(const SdeModel& model, const SimConfig& cfg);
SimStats simulate_stationary(const OptimalProcess& proc, const SimConfig& cfg);

// Fit of ln C(s)/C(0) on the window where C/C(0) lies in [0.05, 0.8].
// InsufficientDecay if C/C(0) never drops below 0.8 or the window has fewer
// than four lags.  std_error is the spread of per-block fits when at least
// two blocks succeed, else the regression error.
RateEstimate estimate_rate(const SimStats& stats);
RateEstimate estimate_rate(const OptimalProcess& proc, const SimConfig& cfg);

// 1/2 sum |freq - P(bin)| against a reference law.
double total_variation(const SimStats& stats, const DistributionSpec& reference);

// Draw x with F(x) = u by bracketing and bisection on the cdf.
double inverse_cdf(const DistributionSpec& spec, double u);

std::string autocorr_csv(const SimStats& stats);   // lag,autocorr
std::string histogram_csv(const SimStats& stats);  // bin_lo,bin_hi,freq

}  // namespace optdiff
