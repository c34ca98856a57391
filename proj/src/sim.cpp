#include "optdiff/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "optdiff/errors.hpp"
#include "optdiff/kernels.hpp"

namespace optdiff {
namespace {

constexpr double kWindowHigh = 0.8;
constexpr double kWindowLow = 0.05;
constexpr std::size_t kSinglePathBlocks = 8;

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double batch_std_error(const std::vector<double>& means) {
  const std::size_t k = means.size();
  if (k < 2) return 0.0;
  const double mu = mean_of(means);
  double ss = 0.0;
  for (double m : means) ss += (m - mu) * (m - mu);
  return std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
}

// Fit on lags 1.. while C/C(0) >= kWindowLow, keeping those <= kWindowHigh.
RateEstimate fit_autocov(const std::vector<double>& c, double lag_dt) {
  if (c.size() < 2 || !(c[0] > 0.0)) fail(ErrorCode::InsufficientDecay, "autocovariance is empty or zero at lag 0");
  std::vector<double> t, r;
  bool dropped = false;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double rho = c[k] / c[0];
    if (rho < kWindowLow) {
      dropped = true;
      break;
    }
    if (rho <= kWindowHigh) {
      dropped = true;
      t.push_back(static_cast<double>(k) * lag_dt);
      r.push_back(rho);
    }
  }
  if (!dropped) fail(ErrorCode::InsufficientDecay, "autocorrelation never drops below 0.8");
  if (t.size() < 4)
    fail(ErrorCode::InsufficientDecay,
         fmt::format("only {} lags in the fit window; shorten dt*stride or lengthen the run", t.size()));
  auto est = fit_exponential_decay(t, r);
  est.fit_window = {t.front(), t.back()};
  return est;
}

std::vector<std::vector<double>> split_blocks(const std::vector<double>& s, std::size_t k) {
  std::vector<std::vector<double>> out;
  const std::size_t len = s.size() / k;
  if (len == 0) return out;
  for (std::size_t b = 0; b < k; ++b)
    out.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(b * len),
                     s.begin() + static_cast<std::ptrdiff_t>((b + 1) * len));
  return out;
}

std::pair<double, double> histogram_range(const SdeModel& model, const std::vector<std::vector<double>>& blocks) {
  if (model.stationary) {
    const auto sup = model.stationary->support();
    if (sup.compact()) return {sup.lower, sup.upper};
    const auto eff = model.stationary->effective_support(1e-8);
    return {eff.lower, eff.upper};
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& b : blocks)
    for (double x : b) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi};
}

SimStats run(const SdeModel& model, const SimConfig& cfg, const std::vector<double>& x0) {
  validate(cfg);
  if (!model.drift || !model.half_variance) fail(ErrorCode::InvalidArgument, "SDE model needs drift and half-variance");
  for (double x : x0)
    if (!model.support.contains(x)) fail(ErrorCode::OutOfSupport, fmt::format("start {} outside the support", x));

  kernels::PathSpec ps{model.drift,          model.half_variance, model.support.lower,
                       model.support.upper,  cfg.boundary_mode == BoundaryMode::Reflect,
                       cfg.dt,               cfg.n_steps,         cfg.burn_in,
                       std::max<std::size_t>(1, cfg.stride)};
  auto paths = kernels::parallel::simulate_paths(ps, x0, cfg.seed);

  SimStats st;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (paths[p].non_finite) fail(ErrorCode::NonFiniteState, fmt::format("path {} produced a non-finite state", p));
    if (paths[p].boundary_violation)
      fail(ErrorCode::BoundaryViolation, fmt::format("path {} exceeded 100 consecutive rejected steps", p));
    st.rejections += paths[p].rejections;
    st.final_states.push_back(paths[p].samples.empty() ? x0[p] : paths[p].samples.back());
  }

  // Moments and batch means, summed in path order.
  double s1 = 0.0, s2 = 0.0, h1 = 0.0, h2 = 0.0;
  std::size_t n1 = 0, n2 = 0;
  std::vector<double> batch_means;
  for (const auto& p : paths) {
    const std::size_t half = p.samples.size() / 2;
    for (std::size_t i = 0; i < p.samples.size(); ++i) {
      const double x = p.samples[i];
      s1 += x;
      s2 += x * x;
      if (i < half) {
        h1 += x;
        ++n1;
      } else {
        h2 += x;
        ++n2;
      }
    }
    st.n_samples += p.samples.size();
  }
  if (st.n_samples == 0) fail(ErrorCode::InvalidArgument, "no samples kept after burn-in");
  const double n = static_cast<double>(st.n_samples);
  st.m1 = s1 / n;
  st.m2 = s2 / n;
  st.m1_halves = {n1 ? h1 / static_cast<double>(n1) : st.m1, n2 ? h2 / static_cast<double>(n2) : st.m1};

  std::vector<std::vector<double>> blocks;
  if (paths.size() >= 2) {
    for (auto& p : paths) blocks.push_back(std::move(p.samples));
  } else {
    blocks = split_blocks(paths[0].samples, kSinglePathBlocks);
    if (blocks.empty()) blocks.push_back(std::move(paths[0].samples));
  }
  paths.clear();
  for (const auto& b : blocks) batch_means.push_back(mean_of(b));
  st.m1_std_error = batch_std_error(batch_means);

  // Histogram.
  const std::size_t bins = cfg.bins;
  {
    const auto [lo, hi] = histogram_range(model, blocks);
    const double w = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (const auto& b : blocks)
      for (double x : b) {
        if (x < lo || x > hi) continue;
        auto k = static_cast<std::size_t>((x - lo) / w);
        counts[std::min(k, bins - 1)]++;
      }
    for (std::size_t k = 0; k < bins; ++k)
      st.histogram.push_back({lo + static_cast<double>(k) * w, k + 1 == bins ? hi : lo + static_cast<double>(k + 1) * w,
                              static_cast<double>(counts[k]) / n});
  }

  // Autocovariance of the observable.
  const double var = st.m2 - st.m1 * st.m1;
  // Either observable has mean zero under the target law (the sample-moment
  // one exactly), so the autocovariance is taken about zero.
  LinearFn obs;
  const double obs_mean = 0.0;
  if (model.observable) {
    obs = *model.observable;
  } else if (var > 0.0) {
    obs = phi1_from_moments(st.m1, st.m2);
  } else {
    return st;
  }
  for (auto& b : blocks)
    for (double& x : b) x = obs(x);

  st.lag_dt = cfg.dt * static_cast<double>(std::max<std::size_t>(1, cfg.stride));
  const double t_kept = static_cast<double>(cfg.n_steps - cfg.burn_in) * cfg.dt;
  double lag_time = cfg.max_lag_time;
  if (!(lag_time > 0.0)) lag_time = model.tau_hint ? 5.0 * *model.tau_hint : t_kept / 20.0;
  std::size_t shortest = blocks.front().size();
  for (const auto& b : blocks) shortest = std::min(shortest, b.size());
  if (shortest < 2) return st;
  const auto max_lag = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(lag_time / st.lag_dt)), shortest / 2);
  st.autocov = kernels::parallel::autocovariance(blocks, obs_mean, max_lag);

  if (blocks.size() >= 2) {
    for (const auto& b : blocks) {
      const auto c = kernels::serial::autocovariance(std::span(&b, 1), obs_mean, max_lag);
      try {
        st.block_rates.push_back(fit_autocov(c, st.lag_dt));
      } catch (const Error&) {
        // A short block may not decay into the window; it simply contributes no fit.
      }
    }
  }
  return st;
}

std::vector<double> stationary_starts(const DistributionSpec& law, const SimConfig& cfg) {
  std::vector<double> x0(cfg.n_paths);
  for (std::size_t p = 0; p < cfg.n_paths; ++p) {
    std::mt19937_64 rng(kernels::path_seed(~cfg.seed, p));
    const double u = std::clamp(std::generate_canonical<double, 64>(rng), 1e-12, 1.0 - 1e-12);
    x0[p] = inverse_cdf(law, u);
  }
  return x0;
}

}  // namespace

std::string_view to_string(BoundaryMode m) { return m == BoundaryMode::Reflect ? "reflect" : "reject-step"; }

BoundaryMode parse_boundary_mode(std::string_view s) {
  if (s == "reflect") return BoundaryMode::Reflect;
  if (s == "reject" || s == "reject-step" || s == "reject_step") return BoundaryMode::RejectStep;
  fail(ErrorCode::ParseError, fmt::format("unknown boundary mode '{}'", s));
}

void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) fail(ErrorCode::InvalidArgument, "dt must be positive");
  if (cfg.n_steps == 0) fail(ErrorCode::InvalidArgument, "n_steps must be positive");
  if (cfg.n_paths == 0) fail(ErrorCode::InvalidArgument, "n_paths must be positive");
  if (cfg.burn_in >= cfg.n_steps) fail(ErrorCode::InvalidArgument, "burn_in must be smaller than n_steps");
  if (cfg.bins == 0) fail(ErrorCode::InvalidArgument, "bins must be positive");
}

SdeModel SdeModel::from(const OptimalProcess& proc) {
  SdeModel m;
  m.support = proc.source().support();
  m.drift = proc.drift();
  m.half_variance = [proc](double x) { return proc.variance_at(x); };
  m.observable = proc.phi1();
  m.tau_hint = proc.tau();
  m.stationary = proc.source();
  return m;
}

SimStats simulate(const SdeModel& model, const SimConfig& cfg, double x0) {
  validate(cfg);
  return run(model, cfg, std::vector<double>(cfg.n_paths, x0));
}

SimStats simulate(const OptimalProcess& proc, const SimConfig& cfg, double x0) {
  return simulate(SdeModel::from(proc), cfg, x0);
}

SimStats simulate_stationary(const SdeModel& model, const SimConfig& cfg) {
  validate(cfg);
  if (!model.stationary) fail(ErrorCode::InvalidArgument, "stationary start needs a stationary law");
  return run(model, cfg, stationary_starts(*model.stationary, cfg));
}

SimStats simulate_stationary(const OptimalProcess& proc, const SimConfig& cfg) {
  return simulate_stationary(SdeModel::from(proc), cfg);
}

RateEstimate estimate_rate(const SimStats& stats) {
  auto est = fit_autocov(stats.autocov, stats.lag_dt);
  if (stats.block_rates.size() >= 2) {
    std::vector<double> rates;
    for (const auto& b : stats.block_rates) rates.push_back(b.rate);
    est.std_error = batch_std_error(rates);
  }
  if (!(est.rate > 0.0)) fail(ErrorCode::InsufficientDecay, fmt::format("fitted rate {} is not positive", est.rate));
  return est;
}

RateEstimate estimate_rate(const OptimalProcess& proc, const SimConfig& cfg) {
  return estimate_rate(simulate_stationary(proc, cfg));
}

double total_variation(const SimStats& stats, const DistributionSpec& reference) {
  double tv = 0.0;
  double covered = 0.0;
  for (const auto& b : stats.histogram) {
    const double p = reference.cdf(b.hi) - reference.cdf(b.lo);
    tv += std::abs(b.freq - p);
    covered += b.freq;
  }
  // Mass outside the histogram range on either side counts in full.
  const double outside_ref =
      stats.histogram.empty() ? 1.0 : reference.cdf(stats.histogram.front().lo) + 1.0 - reference.cdf(stats.histogram.back().hi);
  tv += std::abs((1.0 - covered) - outside_ref);
  return 0.5 * tv;
}

double inverse_cdf(const DistributionSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::InvalidArgument, "inverse_cdf needs u in (0, 1)");
  const auto sup = spec.support();
  double lo = sup.lower, hi = sup.upper;
  const double c = spec.center();
  const double s = std::max(spec.scale(), 1e-300);
  if (!std::isfinite(lo)) {
    double step = s;
    lo = std::min(c, std::isfinite(hi) ? hi : c) - step;
    while (spec.cdf(lo) > u) {
      step *= 2.0;
      lo = c - step;
      if (step > 1e300) fail(ErrorCode::NonConvergence, "inverse_cdf could not bracket the lower tail");
    }
  }
  if (!std::isfinite(hi)) {
    double step = s;
    hi = std::max(c, lo) + step;
    while (spec.cdf(hi) < u) {
      step *= 2.0;
      hi = std::max(c, lo) + step;
      if (step > 1e300) fail(ErrorCode::NonConvergence, "inverse_cdf could not bracket the upper tail");
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (spec.cdf(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::string autocorr_csv(const SimStats& stats) {
  std::string out = "lag,autocorr\n";
  for (std::size_t k = 0; k < stats.autocov.size(); ++k)
    out += fmt::format("{:.17g},{:.17g}\n", static_cast<double>(k) * stats.lag_dt, stats.autocov[k]);
  return out;
}

std::string histogram_csv(const SimStats& stats) {
  std::string out = "bin_lo,bin_hi,freq\n";
  for (const auto& b : stats.histogram) out += fmt::format("{:.17g},{:.17g},{:.17g}\n", b.lo, b.hi, b.freq);
  return out;
}

}  // namespace optdiff
