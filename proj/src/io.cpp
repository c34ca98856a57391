#include "optdiff/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "optdiff/errors.hpp"

namespace optdiff::io {
namespace {

const Json& require_key(const Json& doc, const char* key) {
  if (!doc.contains(key)) fail(ErrorCode::ParseError, fmt::format("spec file is missing '{}'", key));
  return doc.at(key);
}

double as_number(const Json& v, const std::string& what) {
  if (!v.is_number()) fail(ErrorCode::ParseError, fmt::format("'{}' must be a number", what));
  return v.get<double>();
}

std::vector<double> as_numbers(const Json& v, const std::string& what) {
  if (!v.is_array()) fail(ErrorCode::ParseError, fmt::format("'{}' must be an array of numbers", what));
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_number(e, what));
  return out;
}

std::size_t as_count(const Json& v, const std::string& what) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    fail(ErrorCode::ParseError, fmt::format("'{}' must be a nonnegative integer", what));
  return v.get<std::size_t>();
}

}  // namespace

double parse_bound(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
  }
  fail(ErrorCode::ParseError, fmt::format("bad support bound {}", v.dump()));
}

SpecDocument parse_spec(const Json& doc) {
  if (!doc.is_object()) fail(ErrorCode::ParseError, "spec file must be a JSON object");
  const auto& kind_v = require_key(doc, "kind");
  if (!kind_v.is_string()) fail(ErrorCode::ParseError, "'kind' must be a string");

  SpecDocument out{doc, parse_kind(kind_v.get<std::string>()), {}, DistributionSpec::beta(0.0, 0.0), std::nullopt,
                   Json::object()};
  if (doc.contains("params")) {
    const auto& p = doc.at("params");
    if (!p.is_object()) fail(ErrorCode::ParseError, "'params' must be an object of numbers");
    for (const auto& [k, v] : p.items()) out.params[k] = as_number(v, "params." + k);
  }

  if (out.kind == DistributionKind::Custom) {
    auto grid = as_numbers(require_key(doc, "grid"), "grid");
    auto pdf = as_numbers(require_key(doc, "pdf"), "pdf");
    if (grid.size() != pdf.size()) fail(ErrorCode::ParseError, "'grid' and 'pdf' must have the same length");
    out.spec = DistributionSpec::custom(std::move(grid), std::move(pdf));
  } else {
    if (doc.contains("grid") || doc.contains("pdf"))
      fail(ErrorCode::ParseError, "'grid'/'pdf' are only allowed for kind 'custom'");
    out.spec = DistributionSpec::from_params(out.kind, out.params);
  }

  if (doc.contains("support")) {
    const auto& s = doc.at("support");
    if (!s.is_array() || s.size() != 2) fail(ErrorCode::ParseError, "'support' must be [lo, hi]");
    const Support given{parse_bound(s[0]), parse_bound(s[1])};
    if (!(given == out.spec.support()))
      fail(ErrorCode::SupportMismatch,
           fmt::format("declared support [{}, {}] differs from the distribution's [{}, {}]", given.lower, given.upper,
                       out.spec.support().lower, out.spec.support().upper));
  }
  if (doc.contains("sigma_hat_sq_half")) {
    const double s = as_number(doc.at("sigma_hat_sq_half"), "sigma_hat_sq_half");
    if (!(s > 0.0)) fail(ErrorCode::InvalidArgument, "sigma_hat_sq_half must be positive");
    out.sigma_hat_sq_half = s;
  }
  if (doc.contains("sim")) {
    if (!doc.at("sim").is_object()) fail(ErrorCode::ParseError, "'sim' must be an object");
    out.sim = doc.at("sim");
    sim_config_from(out.sim);  // reject bad sections up front
  }
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, fmt::format("cannot open '{}'", path.string()));
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

SpecDocument load_spec_file(const std::filesystem::path& path) { return parse_spec(read_json_file(path)); }

std::optional<PearsonRow> catalog_row(const SpecDocument& doc) {
  std::optional<PearsonFamily> fam;
  switch (doc.kind) {
    case DistributionKind::Beta: fam = PearsonFamily::Beta; break;
    case DistributionKind::Jacobi: fam = PearsonFamily::Jacobi; break;
    case DistributionKind::Gamma: fam = PearsonFamily::Gamma; break;
    case DistributionKind::Normal: fam = PearsonFamily::OrnsteinUhlenbeck; break;
    case DistributionKind::StudentCauchy: fam = PearsonFamily::Student; break;
    case DistributionKind::InverseGamma: fam = PearsonFamily::ReciprocalGamma; break;
    case DistributionKind::FisherSnedecor: fam = PearsonFamily::FisherSnedecor; break;
    default: return std::nullopt;
  }
  return row(*fam, doc.params);
}

SimConfig sim_config_from(const Json& section, SimConfig cfg) {
  if (section.is_null()) return cfg;
  if (!section.is_object()) fail(ErrorCode::ParseError, "'sim' must be an object");
  for (const auto& [k, v] : section.items()) {
    if (k == "dt") {
      cfg.dt = as_number(v, "sim.dt");
    } else if (k == "steps") {
      cfg.n_steps = as_count(v, "sim.steps");
    } else if (k == "paths") {
      cfg.n_paths = as_count(v, "sim.paths");
    } else if (k == "seed") {
      if (!v.is_number_integer()) fail(ErrorCode::ParseError, "'sim.seed' must be an integer");
      cfg.seed = v.is_number_unsigned() ? v.get<std::uint64_t>() : static_cast<std::uint64_t>(v.get<std::int64_t>());
    } else if (k == "burn_in") {
      cfg.burn_in = as_count(v, "sim.burn_in");
    } else if (k == "stride") {
      cfg.stride = as_count(v, "sim.stride");
    } else if (k == "bins") {
      cfg.bins = as_count(v, "sim.bins");
    } else if (k == "boundary") {
      if (!v.is_string()) fail(ErrorCode::ParseError, "'sim.boundary' must be a string");
      cfg.boundary_mode = parse_boundary_mode(v.get<std::string>());
    } else if (k == "max_lag_time") {
      cfg.max_lag_time = as_number(v, "sim.max_lag_time");
    } else if (k == "x0") {
      // start point; read by the simulate command
    } else {
      fail(ErrorCode::ParseError, fmt::format("unknown key 'sim.{}'", k));
    }
  }
  return cfg;
}

Json to_json(const SimConfig& cfg) {
  return Json{{"dt", cfg.dt},
              {"steps", cfg.n_steps},
              {"paths", cfg.n_paths},
              {"seed", cfg.seed},
              {"burn_in", cfg.burn_in},
              {"stride", cfg.stride},
              {"bins", cfg.bins},
              {"boundary", std::string(to_string(cfg.boundary_mode))},
              {"max_lag_time", cfg.max_lag_time}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::InvalidArgument, fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) fail(ErrorCode::InvalidArgument, fmt::format("short write to '{}'", path.string()));
}

void write_json(const std::filesystem::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

}  // namespace optdiff::io
