#include "optdiff/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "optdiff/errors.hpp"
#include "optdiff/hypergeometric.hpp"
#include "optdiff/interpolation.hpp"

namespace optdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// p*log(d) with the 0*log(0) = 0 convention.
double xlogy(double p, double d) { return p == 0.0 ? 0.0 : p * std::log(d); }

bool smooth_exponent(double p) { return p >= 0.0 && p == std::floor(p); }

EndpointSingularity flags(bool lower, bool upper) {
  if (lower && upper) return EndpointSingularity::Both;
  if (lower) return EndpointSingularity::Lower;
  if (upper) return EndpointSingularity::Upper;
  return EndpointSingularity::None;
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::ParamOutOfRange, what);
}

void require_finite(std::initializer_list<double> values) {
  for (double v : values)
    if (!std::isfinite(v)) fail(ErrorCode::ParamOutOfRange, "distribution parameter is not finite");
}

MomentSummary summary(double m1, double m2) { return {m1, m2, m2 - m1 * m1}; }

}  // namespace

bool Support::lower_finite() const { return std::isfinite(lower); }
bool Support::upper_finite() const { return std::isfinite(upper); }

std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::Beta: return "beta";
    case DistributionKind::Jacobi: return "jacobi";
    case DistributionKind::Gamma: return "gamma";
    case DistributionKind::Normal: return "normal";
    case DistributionKind::StudentCauchy: return "student";
    case DistributionKind::InverseGamma: return "inverse_gamma";
    case DistributionKind::FisherSnedecor: return "fisher_snedecor";
    case DistributionKind::Hyperexponential: return "hyperexponential";
    case DistributionKind::CubicPearson: return "cubic_pearson";
    case DistributionKind::Custom: return "custom";
  }
  return "unknown";
}

DistributionKind parse_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (s == "beta") return DistributionKind::Beta;
  if (s == "jacobi") return DistributionKind::Jacobi;
  if (s == "gamma") return DistributionKind::Gamma;
  if (s == "normal" || s == "gaussian") return DistributionKind::Normal;
  if (s == "student" || s == "cauchy" || s == "student_cauchy") return DistributionKind::StudentCauchy;
  if (s == "inverse_gamma" || s == "invgamma") return DistributionKind::InverseGamma;
  if (s == "fisher_snedecor" || s == "f") return DistributionKind::FisherSnedecor;
  if (s == "hyperexponential") return DistributionKind::Hyperexponential;
  if (s == "cubic_pearson" || s == "cubic") return DistributionKind::CubicPearson;
  if (s == "custom") return DistributionKind::Custom;
  fail(ErrorCode::ParseError, fmt::format("unknown distribution kind '{}'", name));
}

namespace detail {

// density(x, dl, du) receives dl = x - lower and du = upper - x computed by the
// caller; near a finite end these are more accurate than recomputing them.
class DensityModel {
 public:
  DensityModel(DistributionKind kind, Support support, std::map<std::string, double> params)
      : kind(kind), support(support), params(std::move(params)) {}
  virtual ~DensityModel() = default;

  virtual double density(double x, double dl, double du) const = 0;
  virtual std::optional<double> cdf_closed(double) const { return std::nullopt; }
  virtual std::optional<MomentSummary> moments_closed() const { return std::nullopt; }
  // Throws MomentDivergence when m2 is infinite.
  virtual void check_moments() const {}

  DistributionKind kind;
  Support support;
  std::map<std::string, double> params;
  double center = 0.0;
  double scale = 1.0;
  EndpointSingularity singular = EndpointSingularity::None;
  std::vector<DistributionSpec> components;
  std::vector<double> weights;
};

namespace {

class BetaModel final : public DensityModel {
 public:
  BetaModel(double a, double b) : DensityModel(DistributionKind::Beta, {0.0, 1.0}, {{"alpha", a}, {"beta", b}}),
                                  a_(a), b_(b), log_norm_(log_beta(a + 1.0, b + 1.0)) {
    require_finite({a, b});
    require(a > -1.0 && b > -1.0, "Beta needs alpha, beta > -1");
    center = (a + 1.0) / (a + b + 2.0);
    scale = 0.25;
    singular = flags(!smooth_exponent(a), !smooth_exponent(b));
  }
  double density(double, double dl, double du) const override {
    return std::exp(xlogy(a_, dl) + xlogy(b_, du) - log_norm_);
  }
  std::optional<double> cdf_closed(double x) const override {
    if (a_ == 0.0 && b_ == 0.0) return x;
    return std::nullopt;
  }
  std::optional<MomentSummary> moments_closed() const override {
    const double s = a_ + b_;
    const double m1 = (a_ + 1.0) / (s + 2.0);
    const double m2 = (a_ + 1.0) * (a_ + 2.0) / ((s + 2.0) * (s + 3.0));
    return summary(m1, m2);
  }

 private:
  double a_, b_, log_norm_;
};

class JacobiModel final : public DensityModel {
 public:
  JacobiModel(double a, double b)
      : DensityModel(DistributionKind::Jacobi, {-1.0, 1.0}, {{"alpha", a}, {"beta", b}}), a_(a), b_(b) {
    require_finite({a, b});
    require(a > -1.0 && b > -1.0, "Jacobi needs alpha, beta > -1");
    log_norm_ = (a + b + 1.0) * std::numbers::ln2 + log_beta(a + 1.0, b + 1.0);
    center = (b - a) / (a + b + 2.0);
    scale = 0.5;
    singular = flags(!smooth_exponent(b), !smooth_exponent(a));
  }
  // (1-x)^alpha (1+x)^beta: alpha sits on the upper end.
  double density(double, double dl, double du) const override {
    return std::exp(xlogy(a_, du) + xlogy(b_, dl) - log_norm_);
  }
  std::optional<MomentSummary> moments_closed() const override {
    const double s = a_ + b_ + 2.0;
    const double m1 = (b_ - a_) / s;
    const double var = 4.0 * (a_ + 1.0) * (b_ + 1.0) / (s * s * (s + 1.0));
    return summary(m1, var + m1 * m1);
  }

 private:
  double a_, b_, log_norm_ = 0.0;
};

class GammaModel final : public DensityModel {
 public:
  explicit GammaModel(double a) : DensityModel(DistributionKind::Gamma, {0.0, kInf}, {{"alpha", a}}), a_(a) {
    require_finite({a});
    require(a > -1.0, "Gamma needs alpha > -1");
    log_norm_ = std::lgamma(a + 1.0);
    center = a + 1.0;
    scale = std::sqrt(a + 1.0);
    singular = flags(!smooth_exponent(a), false);
  }
  double density(double x, double dl, double) const override {
    return std::exp(xlogy(a_, dl) - x - log_norm_);
  }
  std::optional<double> cdf_closed(double x) const override {
    if (a_ == 0.0) return -std::expm1(-x);
    return std::nullopt;
  }
  std::optional<MomentSummary> moments_closed() const override {
    return summary(a_ + 1.0, (a_ + 1.0) * (a_ + 2.0));
  }

 private:
  double a_, log_norm_;
};

class NormalModel final : public DensityModel {
 public:
  NormalModel(double x0, double sigma)
      : DensityModel(DistributionKind::Normal, {-kInf, kInf}, {{"x0", x0}, {"sigma", sigma}}),
        x0_(x0), sigma_(sigma) {
    require_finite({x0, sigma});
    require(sigma > 0.0, "Normal needs sigma > 0");
    center = x0;
    scale = sigma;
  }
  double density(double x, double, double) const override {
    const double z = (x - x0_) / sigma_;
    return std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(2.0 * std::numbers::pi));
  }
  std::optional<double> cdf_closed(double x) const override {
    return 0.5 * std::erfc(-(x - x0_) / (sigma_ * std::numbers::sqrt2));
  }
  std::optional<MomentSummary> moments_closed() const override {
    return summary(x0_, sigma_ * sigma_ + x0_ * x0_);
  }

 private:
  double x0_, sigma_;
};

class StudentModel final : public DensityModel {
 public:
  explicit StudentModel(double a)
      : DensityModel(DistributionKind::StudentCauchy, {-kInf, kInf}, {{"alpha", a}}), a_(a) {
    require_finite({a});
    require(a >= 2.0, "StudentCauchy needs alpha >= 2");
    log_norm_ = log_beta(a, 0.5);
    center = 0.0;
    scale = 1.0 / std::sqrt(a);
  }
  double density(double x, double, double) const override {
    return std::exp(-(a_ + 0.5) * std::log1p(x * x) - log_norm_);
  }
  // The table prints 1/(2(alpha-1)) for the variance; quadrature agrees.
  std::optional<MomentSummary> moments_closed() const override {
    return summary(0.0, 1.0 / (2.0 * (a_ - 1.0)));
  }

 private:
  double a_, log_norm_;
};

class InverseGammaModel final : public DensityModel {
 public:
  explicit InverseGammaModel(double a)
      : DensityModel(DistributionKind::InverseGamma, {0.0, kInf}, {{"alpha", a}}), a_(a) {
    require_finite({a});
    require(a >= 2.0, "InverseGamma needs alpha >= 2");
    log_norm_ = std::lgamma(2.0 * a);
    center = 1.0 / (2.0 * a + 1.0);
    scale = 1.0 / (2.0 * a - 1.0);
  }
  double density(double, double dl, double) const override {
    if (dl <= 0.0) return 0.0;
    return std::exp(-(2.0 * a_ + 1.0) * std::log(dl) - 1.0 / dl - log_norm_);
  }
  // Shape 2*alpha: m1 = 1/(2a-1), m2 = 1/((2a-1)(2a-2)).  The printed table
  // variance 1/(2(a-1)(a-1)^2) does not match quadrature.
  std::optional<MomentSummary> moments_closed() const override {
    const double m1 = 1.0 / (2.0 * a_ - 1.0);
    return summary(m1, m1 / (2.0 * a_ - 2.0));
  }

 private:
  double a_, log_norm_;
};

class FisherModel final : public DensityModel {
 public:
  FisherModel(double nu1, double nu2)
      : DensityModel(DistributionKind::FisherSnedecor, {0.0, kInf}, {{"nu1", nu1}, {"nu2", nu2}}),
        nu1_(nu1), nu2_(nu2) {
    require_finite({nu1, nu2});
    require(nu1 > 0.0 && nu2 > 0.0, "FisherSnedecor needs nu1, nu2 > 0");
    log_norm_ = log_beta(0.5 * nu1, 0.5 * nu2) - 0.5 * nu1 * std::log(nu1 / nu2);
    center = nu2 > 2.0 ? nu2 / (nu2 - 2.0) : 1.0;
    scale = 1.0;
    singular = flags(!smooth_exponent(0.5 * nu1 - 1.0), false);
  }
  double density(double x, double dl, double) const override {
    return std::exp(xlogy(0.5 * nu1_ - 1.0, dl) - 0.5 * (nu1_ + nu2_) * std::log1p(nu1_ * x / nu2_) -
                    log_norm_);
  }
  void check_moments() const override {
    if (!(nu2_ > 4.0)) fail(ErrorCode::MomentDivergence, "FisherSnedecor second moment needs nu2 > 4");
  }
  std::optional<MomentSummary> moments_closed() const override {
    check_moments();
    const double m1 = nu2_ / (nu2_ - 2.0);
    const double m2 = nu2_ * nu2_ * (nu1_ + 2.0) / (nu1_ * (nu2_ - 2.0) * (nu2_ - 4.0));
    return summary(m1, m2);
  }

 private:
  double nu1_, nu2_, log_norm_;
};

class HyperexponentialModel final : public DensityModel {
 public:
  HyperexponentialModel(double p1, double p2, double e1, double e2)
      : DensityModel(DistributionKind::Hyperexponential, {0.0, kInf},
                     {{"p1", p1}, {"p2", p2}, {"eta1", e1}, {"eta2", e2}}),
        p1_(p1), p2_(p2), e1_(e1), e2_(e2) {
    require_finite({p1, p2, e1, e2});
    require(p1 > 0.0 && p2 > 0.0 && e1 > 0.0 && e2 > 0.0, "Hyperexponential needs p_i, eta_i > 0");
    if (std::abs(p1 + p2 - 1.0) > 1e-12) fail(ErrorCode::BadWeights, "Hyperexponential weights must sum to 1");
    center = p1 / e1 + p2 / e2;
    scale = std::max(1.0 / e1, 1.0 / e2);
  }
  double density(double x, double, double) const override {
    return p1_ * e1_ * std::exp(-e1_ * x) + p2_ * e2_ * std::exp(-e2_ * x);
  }
  std::optional<double> cdf_closed(double x) const override {
    return -(p1_ * std::expm1(-e1_ * x) + p2_ * std::expm1(-e2_ * x));
  }
  std::optional<MomentSummary> moments_closed() const override {
    return summary(p1_ / e1_ + p2_ / e2_, 2.0 * p1_ / (e1_ * e1_) + 2.0 * p2_ / (e2_ * e2_));
  }

 private:
  double p1_, p2_, e1_, e2_;
};

class CubicModel final : public DensityModel {
 public:
  CubicModel(double a, double b, double c)
      : DensityModel(DistributionKind::CubicPearson, {0.0, 1.0}, {{"alpha", a}, {"beta", b}, {"a", c}}),
        a_(a), b_(b), c_(c) {
    require_finite({a, b, c});
    require(a > 0.0 && b > 0.0, "CubicPearson needs alpha, beta > 0");
    require(std::abs(c) < 1.0, "CubicPearson needs |a| < 1");
    f0_ = hyp2f1(a + b + 1.0, a, a + b, c);
    log_norm_ = log_beta(a, b) + std::log(f0_);
    center = 0.5;
    scale = 0.25;
    singular = flags(!smooth_exponent(a - 1.0), !smooth_exponent(b - 1.0));
  }
  double density(double x, double dl, double du) const override {
    return std::exp(xlogy(a_ - 1.0, dl) + xlogy(b_ - 1.0, du) - (a_ + b_ + 1.0) * std::log1p(-c_ * x) -
                    log_norm_);
  }
  // Beta-function ratios B(a+k, b)/B(a, b) times the shifted 2F1 ratios.
  std::optional<MomentSummary> moments_closed() const override {
    const double s = a_ + b_;
    const double f1 = hyp2f1(s + 1.0, a_ + 1.0, s + 1.0, c_);
    const double f2 = hyp2f1(s + 1.0, a_ + 2.0, s + 2.0, c_);
    const double m1 = a_ / s * f1 / f0_;
    const double m2 = a_ * (a_ + 1.0) / (s * (s + 1.0)) * f2 / f0_;
    return summary(m1, m2);
  }

 private:
  double a_, b_, c_, f0_, log_norm_;
};

class TableModel final : public DensityModel {
 public:
  TableModel(std::vector<double> grid, std::vector<double> pdf)
      : DensityModel(DistributionKind::Custom, {0.0, 1.0}, {}),
        interp_(normalized(grid, std::move(pdf))) {
    support = {interp_.lower(), interp_.upper()};
    center = 0.5 * (support.lower + support.upper);
    scale = 0.25 * (support.upper - support.lower);
  }
  double density(double x, double, double) const override { return std::max(0.0, interp_(x)); }
  std::optional<double> cdf_closed(double x) const override {
    return std::clamp(interp_.integral_to(x), 0.0, 1.0);
  }
  std::optional<MomentSummary> moments_closed() const override {
    return summary(interp_.moment(1), interp_.moment(2));
  }

 private:
  static MonotoneCubic normalized(const std::vector<double>& grid, std::vector<double> pdf) {
    if (grid.size() < 3 || grid.size() != pdf.size())
      fail(ErrorCode::InvalidArgument, "custom density needs >= 3 grid points and matching pdf values");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!std::isfinite(grid[i]) || !std::isfinite(pdf[i]))
        fail(ErrorCode::InvalidArgument, "custom density table has a non-finite entry");
      if (pdf[i] < 0.0) fail(ErrorCode::InvalidArgument, "custom density has a negative value");
    }
    MonotoneCubic raw(grid, pdf);
    const double total = raw.integral_to(raw.upper());
    if (!(total > 0.0)) fail(ErrorCode::NormalizationFailure, "custom density has zero mass");
    for (double& v : pdf) v /= total;
    return MonotoneCubic(grid, std::move(pdf));
  }

  MonotoneCubic interp_;
};

class MixtureModel final : public DensityModel {
 public:
  MixtureModel(std::vector<DistributionSpec> specs, std::vector<double> w)
      : DensityModel(DistributionKind::Custom, specs.front().support(), {}) {
    components = std::move(specs);
    weights = std::move(w);
    bool lo = false, hi = false;
    center = 0.0;
    scale = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
      const auto s = components[i].singular_endpoints();
      lo = lo || s == EndpointSingularity::Lower || s == EndpointSingularity::Both;
      hi = hi || s == EndpointSingularity::Upper || s == EndpointSingularity::Both;
      center += weights[i] * components[i].center();
      scale = std::max(scale, components[i].scale());
    }
    singular = flags(lo, hi);
  }
  double density(double x, double dl, double du) const override;
  std::optional<double> cdf_closed(double x) const override {
    double c = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i)
      if (weights[i] > 0.0) c += weights[i] * components[i].cdf(x);
    return std::clamp(c, 0.0, 1.0);
  }
  void check_moments() const override {
    for (std::size_t i = 0; i < components.size(); ++i)
      if (weights[i] > 0.0) components[i].moments();
  }
  std::optional<MomentSummary> moments_closed() const override {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
      if (weights[i] == 0.0) continue;
      const auto m = components[i].moments();
      m1 += weights[i] * m.m1;
      m2 += weights[i] * m.m2;
    }
    return summary(m1, m2);
  }
};

}  // namespace
}  // namespace detail

// Mixture density needs DistributionSpec's private model; defined here.
struct DensityAccess {
  static double at(const DistributionSpec& s, double x, double dl, double du);
};

namespace detail {
namespace {
double MixtureModel::density(double x, double dl, double du) const {
  double v = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i)
    if (weights[i] > 0.0) v += weights[i] * DensityAccess::at(components[i], x, dl, du);
  return v;
}
}  // namespace
}  // namespace detail

QuadratureOptions density_quadrature() {
  QuadratureOptions o;
  o.abs_tol = 1e-15;
  o.rel_tol = 1e-12;
  return o;
}

DistributionSpec::DistributionSpec(std::shared_ptr<const detail::DensityModel> model) : model_(std::move(model)) {
  // Normalisation is checked for every construction; tables are rescaled
  // before they get here so they pass trivially.
  const auto total = integrate([](double) { return 1.0; }, model_->support.lower, model_->support.upper,
                               density_quadrature());
  if (!(std::abs(total.value - 1.0) <= 1e-8))
    fail(ErrorCode::NormalizationFailure,
         fmt::format("{} density integrates to {:.17g}", to_string(model_->kind), total.value));
}

DistributionSpec DistributionSpec::beta(double a, double b) {
  return DistributionSpec(std::make_shared<detail::BetaModel>(a, b));
}
DistributionSpec DistributionSpec::jacobi(double a, double b) {
  return DistributionSpec(std::make_shared<detail::JacobiModel>(a, b));
}
DistributionSpec DistributionSpec::gamma(double a) { return DistributionSpec(std::make_shared<detail::GammaModel>(a)); }
DistributionSpec DistributionSpec::normal(double x0, double sigma) {
  return DistributionSpec(std::make_shared<detail::NormalModel>(x0, sigma));
}
DistributionSpec DistributionSpec::student(double a) {
  return DistributionSpec(std::make_shared<detail::StudentModel>(a));
}
DistributionSpec DistributionSpec::inverse_gamma(double a) {
  return DistributionSpec(std::make_shared<detail::InverseGammaModel>(a));
}
DistributionSpec DistributionSpec::fisher_snedecor(double nu1, double nu2) {
  return DistributionSpec(std::make_shared<detail::FisherModel>(nu1, nu2));
}
DistributionSpec DistributionSpec::hyperexponential(double p1, double p2, double eta1, double eta2) {
  return DistributionSpec(std::make_shared<detail::HyperexponentialModel>(p1, p2, eta1, eta2));
}
DistributionSpec DistributionSpec::cubic_pearson(double a, double b, double c) {
  return DistributionSpec(std::make_shared<detail::CubicModel>(a, b, c));
}
DistributionSpec DistributionSpec::custom(std::vector<double> grid, std::vector<double> pdf) {
  return DistributionSpec(std::make_shared<detail::TableModel>(std::move(grid), std::move(pdf)));
}

DistributionSpec DistributionSpec::from_params(DistributionKind kind, const std::map<std::string, double>& params) {
  auto take = [&](std::initializer_list<const char*> names) {
    std::vector<double> out;
    for (const char* n : names) {
      auto it = params.find(n);
      if (it == params.end())
        fail(ErrorCode::InvalidArgument, fmt::format("{} needs parameter '{}'", to_string(kind), n));
      out.push_back(it->second);
    }
    if (params.size() != names.size())
      fail(ErrorCode::InvalidArgument, fmt::format("{} got unexpected parameters", to_string(kind)));
    return out;
  };
  switch (kind) {
    case DistributionKind::Beta: { auto p = take({"alpha", "beta"}); return beta(p[0], p[1]); }
    case DistributionKind::Jacobi: { auto p = take({"alpha", "beta"}); return jacobi(p[0], p[1]); }
    case DistributionKind::Gamma: return gamma(take({"alpha"})[0]);
    case DistributionKind::Normal: { auto p = take({"x0", "sigma"}); return normal(p[0], p[1]); }
    case DistributionKind::StudentCauchy: return student(take({"alpha"})[0]);
    case DistributionKind::InverseGamma: return inverse_gamma(take({"alpha"})[0]);
    case DistributionKind::FisherSnedecor: { auto p = take({"nu1", "nu2"}); return fisher_snedecor(p[0], p[1]); }
    case DistributionKind::Hyperexponential: {
      auto p = take({"p1", "p2", "eta1", "eta2"});
      return hyperexponential(p[0], p[1], p[2], p[3]);
    }
    case DistributionKind::CubicPearson: {
      auto p = take({"alpha", "beta", "a"});
      return cubic_pearson(p[0], p[1], p[2]);
    }
    case DistributionKind::Custom: break;
  }
  fail(ErrorCode::InvalidArgument, "custom densities need a grid/pdf table");
}

double DensityAccess::at(const DistributionSpec& s, double x, double dl, double du) {
  return s.model_->density(x, dl, du);
}

DistributionKind DistributionSpec::kind() const { return model_->kind; }
const Support& DistributionSpec::support() const { return model_->support; }
const std::map<std::string, double>& DistributionSpec::params() const { return model_->params; }

double DistributionSpec::param(const std::string& name) const {
  auto it = model_->params.find(name);
  if (it == model_->params.end())
    fail(ErrorCode::InvalidArgument, fmt::format("{} has no parameter '{}'", kind_name(), name));
  return it->second;
}

double DistributionSpec::pdf(double x) const {
  const Support& s = model_->support;
  if (!s.contains(x) || !std::isfinite(x))
    fail(ErrorCode::OutOfSupport, fmt::format("pdf: x = {} outside [{}, {}]", x, s.lower, s.upper));
  return model_->density(x, x - s.lower, s.upper - x);
}

double DistributionSpec::cdf(double x) const {
  const Support& s = model_->support;
  if (std::isnan(x) || !s.contains(x))
    fail(ErrorCode::OutOfSupport, fmt::format("cdf: x = {} outside [{}, {}]", x, s.lower, s.upper));
  if (x == s.lower) return 0.0;
  if (x == s.upper) return 1.0;
  if (auto c = model_->cdf_closed(x)) return std::clamp(*c, 0.0, 1.0);
  const auto one = [](double) { return 1.0; };
  const double c = x <= model_->center ? integrate(one, s.lower, x, density_quadrature()).value
                                       : 1.0 - integrate(one, x, s.upper, density_quadrature()).value;
  return std::clamp(c, 0.0, 1.0);
}

MomentSummary DistributionSpec::moments() const {
  model_->check_moments();
  if (auto m = model_->moments_closed()) return *m;
  return moments_by_quadrature();
}

MomentSummary DistributionSpec::moments_by_quadrature() const {
  model_->check_moments();
  const Support& s = model_->support;
  const auto opts = density_quadrature();
  const double m1 = integrate([](double x) { return x; }, s.lower, s.upper, opts).value;
  const double m2 = integrate([](double x) { return x * x; }, s.lower, s.upper, opts).value;
  return summary(m1, m2);
}

double DistributionSpec::center() const { return model_->center; }
double DistributionSpec::scale() const { return model_->scale; }
EndpointSingularity DistributionSpec::singular_endpoints() const { return model_->singular; }

Support DistributionSpec::effective_support(double rel) const {
  const Support& s = model_->support;
  if (s.compact()) return s;
  const double c = model_->center, w = model_->scale;
  // Peak estimate from a scan around the centre.
  double peak = 0.0;
  constexpr int kScan = 4001;
  for (int i = 0; i < kScan; ++i) {
    const double x = c + w * (-40.0 + 80.0 * i / (kScan - 1));
    if (s.interior(x)) peak = std::max(peak, pdf(x));
  }
  if (!(peak > 0.0) || !std::isfinite(peak)) fail(ErrorCode::NumericalFailure, "could not locate the density peak");
  auto search = [&](double dir) {
    double step = w;
    for (int k = 0; k < 2000; ++k, step *= 2.0) {
      const double x = c + dir * step;
      if (pdf(x) < rel * peak) return x;
    }
    fail(ErrorCode::NumericalFailure, "density tail does not fall below the truncation level");
  };
  Support out = s;
  if (!s.lower_finite()) out.lower = search(-1.0);
  if (!s.upper_finite()) out.upper = search(1.0);
  return out;
}

QuadratureResult DistributionSpec::integrate(const RealFn& g, double a, double b,
                                             const QuadratureOptions& opts) const {
  const Support& s = model_->support;
  if (std::isnan(a) || std::isnan(b) || a < s.lower || b > s.upper)
    fail(ErrorCode::OutOfSupport, "integration range leaves the support");
  if (!(a < b)) {
    if (a == b) return {};
    fail(ErrorCode::InvalidInterval, "integration needs a <= b");
  }
  const auto* m = model_.get();
  const double lo = s.lower, hi = s.upper;
  RealFn plain = [&](double x) { return g(x) * m->density(x, x - lo, hi - x); };

  QuadratureResult total;
  auto add = [&](const QuadratureResult& r) {
    total.value += r.value;
    total.abs_error_estimate += r.abs_error_estimate;
    total.evaluations += r.evaluations;
  };
  const bool sing_lo = m->singular == EndpointSingularity::Lower || m->singular == EndpointSingularity::Both;
  const bool sing_hi = m->singular == EndpointSingularity::Upper || m->singular == EndpointSingularity::Both;

  // x = l + u^2 next to the lower support end, x = r - u^2 next to the upper.
  auto from_lower = [&](double r) {
    RealFn f = [&](double u) {
      const double d = u * u;
      return 2.0 * u * g(lo + d) * m->density(lo + d, d, (hi - lo) - d);
    };
    add(optdiff::integrate(f, 0.0, std::sqrt(r - lo), opts));
  };
  auto from_upper = [&](double l) {
    RealFn f = [&](double u) {
      const double d = u * u;
      return 2.0 * u * g(hi - d) * m->density(hi - d, (hi - lo) - d, d);
    };
    add(optdiff::integrate(f, 0.0, std::sqrt(hi - l), opts));
  };
  auto finite = [&](double l, double r) {
    if (!(l < r)) return;
    const bool at_lo = sing_lo && l == lo;
    const bool at_hi = sing_hi && r == hi;
    if (at_lo && at_hi) {
      const double mid = 0.5 * (l + r);
      from_lower(mid);
      from_upper(mid);
    } else if (at_lo) {
      from_lower(r);
    } else if (at_hi) {
      from_upper(l);
    } else {
      add(optdiff::integrate(plain, l, r, opts));
    }
  };

  const double c = m->center, w = m->scale;
  if (std::isinf(a) && std::isinf(b)) {
    add(integrate_from_minus_infinity(plain, c, w, opts));
    add(integrate_to_infinity(plain, c, w, opts));
  } else if (std::isinf(a)) {
    const double split = std::min(b, c);
    add(integrate_from_minus_infinity(plain, split, w, opts));
    finite(split, b);
  } else if (std::isinf(b)) {
    const double split = std::max(a, c);
    finite(a, split);
    add(integrate_to_infinity(plain, split, w, opts));
  } else {
    finite(a, b);
  }
  return total;
}

bool DistributionSpec::is_mixture() const { return !model_->components.empty(); }
std::span<const DistributionSpec> DistributionSpec::components() const { return model_->components; }
std::span<const double> DistributionSpec::weights() const { return model_->weights; }

DistributionSpec mixture(std::span<const DistributionSpec> specs, std::span<const double> weights) {
  if (specs.empty() || specs.size() != weights.size())
    fail(ErrorCode::BadWeights, "mixture needs one weight per component");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorCode::BadWeights, "mixture weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) fail(ErrorCode::BadWeights, fmt::format("mixture weights sum to {:.17g}", sum));
  for (const auto& s : specs)
    if (!(s.support() == specs.front().support()))
      fail(ErrorCode::SupportMismatch, "mixture components must share one support");
  return DistributionSpec(std::make_shared<detail::MixtureModel>(
      std::vector<DistributionSpec>(specs.begin(), specs.end()), std::vector<double>(weights.begin(), weights.end())));
}

}  // namespace optdiff
