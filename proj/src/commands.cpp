#include "optdiff/commands.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "optdiff/errors.hpp"
#include "optdiff/kernels.hpp"
#include "optdiff/optimal.hpp"
#include "optdiff/pearson.hpp"
#include "optdiff/sim.hpp"
#include "optdiff/spectral.hpp"

namespace optdiff::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;
using io::format_double;

// sigma-hat^2/2 when none is given: the catalog row's value, the cubic
// example's, or else the variance (which makes lambda1 = 1).
double default_sigma_hat(const io::SpecDocument& doc) {
  if (doc.sigma_hat_sq_half) return *doc.sigma_hat_sq_half;
  if (auto r = io::catalog_row(doc)) return r->sigma_hat_sq_half;
  if (doc.kind == DistributionKind::CubicPearson)
    return cubic_example(doc.params.at("alpha"), doc.params.at("beta"), doc.params.at("a")).sigma_hat_sq_half;
  return doc.spec.moments().variance;
}

double resolve_sigma_hat(const io::SpecDocument& doc, std::optional<double> flag) {
  if (flag) {
    if (!(*flag > 0.0) || !std::isfinite(*flag)) fail(ErrorCode::InvalidArgument, "--sigma-hat must be positive");
    return *flag;
  }
  return default_sigma_hat(doc);
}

VariancePath parse_variance_path(const std::string& s) {
  if (s == "auto") return VariancePath::Auto;
  if (s == "closed") return VariancePath::ClosedForm;
  if (s == "quadrature") return VariancePath::Quadrature;
  fail(ErrorCode::ParseError, fmt::format("unknown variance path '{}'", s));
}

std::string params_string(const std::map<std::string, double>& params) {
  std::string s;
  for (const auto& [k, v] : params) {
    if (!s.empty()) s += ';';
    s += fmt::format("{}={}", k, v);
  }
  return s;
}

std::string timestamp() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

Json manifest_for(std::string command, const std::optional<std::string>& spec_path, const Json& spec,
                  const fs::path& out_dir, Json resolved) {
  Json m;
  m["command"] = std::move(command);
  m["spec_path"] = spec_path ? Json(*spec_path) : Json(nullptr);
  m["spec"] = spec;
  m["out"] = out_dir.string();
  m["version"] = std::string(kVersion);
  m["seed"] = resolved.contains("sim") ? resolved["sim"]["seed"] : Json(nullptr);
  m["timestamp"] = timestamp();
  m["resolved"] = std::move(resolved);
  return m;
}

Json linear_json(const LinearFn& f) { return Json{{"slope", f.slope}, {"intercept", f.intercept}}; }

// ---- command bodies, driven only by the manifest ----

void run_optimal(const io::SpecDocument& doc, const Json& r, const fs::path& dir, std::ostream& out) {
  const double s = r.at("sigma_hat_sq_half").get<double>();
  const auto n = r.at("grid_points").get<std::size_t>();
  const auto proc = synthesize(doc.spec, s, parse_variance_path(r.at("variance_path").get<std::string>()));
  const auto& mom = proc.moments();

  Json process{{"kind", std::string(to_string(doc.kind))},
               {"params", doc.params},
               {"lambda1", proc.lambda1()},
               {"tau", proc.tau()},
               {"phi1", linear_json(proc.phi1())},
               {"drift", linear_json(proc.drift())},
               {"sigma_hat_sq_half", proc.sigma_hat_sq_half()},
               {"m1", mom.m1},
               {"m2", mom.m2},
               {"variance", mom.variance},
               {"variance_path", proc.path() == VariancePath::ClosedForm ? "closed" : "quadrature"}};
  io::write_json(dir / "process.json", process);

  const auto grid = spectral_grid(doc.spec, n);
  std::string csv = "x,half_variance\n";
  for (double x : grid.points()) csv += fmt::format("{},{}\n", format_double(x), format_double(proc.variance_at(x)));
  io::write_text(dir / "variance.csv", csv);

  const double cell = grid.size() > 1 ? grid.points()[1] - grid.points()[0] : 1.0;
  const double h = std::min(1e-4, 0.25 * cell);
  const double balance = verify_detailed_balance(proc, grid, h);
  const auto pos = check_variance_positivity(proc);
  const double mean = check_variance_mean(proc);
  Json checks{{"detailed_balance_residual", balance},
              {"detailed_balance_step", h},
              {"variance_positive", pos.positive},
              {"variance_min", pos.min_value},
              {"variance_argmin", pos.argmin},
              {"variance_mean", mean},
              {"variance_mean_error", std::abs(mean - s)}};
  io::write_json(dir / "checks.json", checks);
  out << fmt::format("lambda1 = {}  tau = {}  sigma_hat_sq_half = {}\n", format_double(proc.lambda1()),
                     format_double(proc.tau()), format_double(s));
}

void run_spectrum(const io::SpecDocument& doc, const Json& r, const fs::path& dir, std::ostream& out) {
  const double s = r.at("sigma_hat_sq_half").get<double>();
  const auto k = r.at("k").get<std::size_t>();
  const auto n = r.at("grid_points").get<std::size_t>();
  const auto proc = synthesize(doc.spec, s);
  const auto gen = discretize_generator(proc, spectral_grid(doc.spec, n));
  const auto res = spectrum(gen, k);
  io::write_text(dir / "spectrum.csv", spectrum_csv(res));

  const double analytic = proc.lambda1();
  const double numeric = res.eigenvalues.at(1);
  const double rel = std::abs(numeric - analytic) / analytic;
  const std::string line = fmt::format("{},{},{}", format_double(analytic), format_double(numeric), format_double(rel));
  io::write_text(dir / "comparison.csv", "lambda1_analytic,lambda1_numeric,rel_err\n" + line + "\n");
  out << "lambda1_analytic,lambda1_numeric,rel_err\n" << line << "\n";
}

void run_simulate(const io::SpecDocument& doc, const Json& r, const fs::path& dir, std::ostream& out) {
  const double s = r.at("sigma_hat_sq_half").get<double>();
  const auto cfg = io::sim_config_from(r.at("sim"));
  const auto proc = synthesize(doc.spec, s);
  const auto& x0 = r.at("x0");

  const int threads = r.value("threads", 1);
  kernels::set_thread_count(threads);
  SimStats stats;
  try {
    stats = x0.is_string() ? simulate_stationary(proc, cfg) : simulate(proc, cfg, x0.get<double>());
  } catch (...) {
    kernels::set_thread_count(1);
    throw;
  }
  kernels::set_thread_count(1);

  io::write_text(dir / "autocorr.csv", autocorr_csv(stats));
  io::write_text(dir / "hist.csv", histogram_csv(stats));

  const auto& mom = proc.moments();
  Json rate{{"lambda1_expected", proc.lambda1()},
            {"m1", stats.m1},
            {"m2", stats.m2},
            {"m1_expected", mom.m1},
            {"m2_expected", mom.m2},
            {"m1_std_error", stats.m1_std_error},
            {"n_samples", stats.n_samples},
            {"rejections", stats.rejections},
            {"total_variation", total_variation(stats, doc.spec)}};
  try {
    const auto est = estimate_rate(stats);
    rate["rate"] = est.rate;
    rate["std_error"] = est.std_error;
    rate["fit_window"] = {est.fit_window.first, est.fit_window.second};
    rate["rel_err"] = std::abs(est.rate - proc.lambda1()) / proc.lambda1();
    io::write_json(dir / "rate.json", rate);
    out << fmt::format("rate = {} +- {}  (lambda1 = {})\n", format_double(est.rate), format_double(est.std_error),
                       format_double(proc.lambda1()));
  } catch (const Error& e) {
    rate["rate"] = nullptr;
    rate["error"] = e.what();
    io::write_json(dir / "rate.json", rate);
    throw;
  }
}

int run_table(const Json& r, const fs::path& dir, std::ostream& out) {
  std::string csv = "name,params,m1,var,lambda1,sigma_hat_sq_half,verified\n";
  std::size_t failed = 0;
  for (const auto& entry : r.at("rows")) {
    const auto family = parse_family(entry.at("family").get<std::string>());
    const auto params = entry.at("params").get<std::map<std::string, double>>();
    const auto pr = row(family, params);
    bool verified = true;
    try {
      verify_row_against_synthesis(pr);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RowMismatch) throw;
      verified = false;
      ++failed;
    }
    csv += fmt::format("{},{},{},{},{},{},{}\n", to_string(family), params_string(params), format_double(pr.m1),
                       format_double(pr.var), format_double(pr.lambda1), format_double(pr.sigma_hat_sq_half),
                       verified ? "true" : "false");
  }
  io::write_text(dir / "table1.csv", csv);
  out << fmt::format("{} rows, {} failed verification\n", r.at("rows").size(), failed);
  return failed > 0 && r.value("strict", false) ? VerificationFailure : Ok;
}

Json row_json(const PearsonRow& pr) {
  return Json{{"family", std::string(to_string(pr.family))}, {"params", pr.params}};
}

Json table_rows(const std::optional<std::string>& params_file) {
  Json rows = Json::array();
  for (const auto& pr : default_rows()) rows.push_back(row_json(pr));
  if (!params_file) return rows;
  const auto doc = io::read_json_file(*params_file);
  const Json& list = doc.is_object() && doc.contains("rows") ? doc.at("rows") : doc;
  if (!list.is_array()) fail(ErrorCode::ParseError, "params file must be an array of {family, params} objects");
  for (const auto& e : list) {
    if (!e.is_object() || !e.contains("family") || !e.contains("params") || !e.at("family").is_string())
      fail(ErrorCode::ParseError, "each params-file entry needs 'family' and 'params'");
    std::map<std::string, double> params;
    for (const auto& [k, v] : e.at("params").items()) {
      if (!v.is_number()) fail(ErrorCode::ParseError, fmt::format("params.{} must be a number", k));
      params[k] = v.get<double>();
    }
    rows.push_back(row_json(row(parse_family(e.at("family").get<std::string>()), params)));  // validates
  }
  return rows;
}

int report(const std::exception& e, int code, std::ostream& err) {
  err << "optdiff: " << e.what() << "\n";
  return code;
}

}  // namespace

int execute(const Json& manifest, const fs::path& out_dir, std::ostream& out) {
  if (!manifest.is_object() || !manifest.contains("command") || !manifest.contains("resolved"))
    fail(ErrorCode::ParseError, "manifest needs 'command' and 'resolved'");
  const auto command = manifest.at("command").get<std::string>();
  const auto& resolved = manifest.at("resolved");

  std::optional<io::SpecDocument> doc;
  if (command != "table") doc = io::parse_spec(manifest.at("spec"));

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::InvalidArgument, fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
  Json m = manifest;
  m["out"] = out_dir.string();
  m["timestamp"] = timestamp();
  io::write_json(out_dir / "manifest.json", m);

  if (command == "optimal") {
    run_optimal(*doc, resolved, out_dir, out);
  } else if (command == "spectrum") {
    run_spectrum(*doc, resolved, out_dir, out);
  } else if (command == "simulate") {
    run_simulate(*doc, resolved, out_dir, out);
  } else if (command == "table") {
    return run_table(resolved, out_dir, out);
  } else {
    fail(ErrorCode::ParseError, fmt::format("unknown command '{}' in manifest", command));
  }
  return Ok;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal diffusion processes: synthesis, spectra, simulation and the Pearson catalog", "optdiff"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string out_dir = "out";
  std::string spec_path;
  std::optional<double> sigma_hat;

  auto* opt = app.add_subcommand("optimal", "Synthesize the optimal process for a stationary density");
  std::size_t opt_points = 200;
  std::string variance_path = "auto";
  opt->add_option("spec", spec_path, "Distribution spec file (JSON)")->required();
  opt->add_option("--sigma-hat", sigma_hat, "Mean half-variance sigma-hat^2/2 (default: catalog value)");
  opt->add_option("--grid-points,-N", opt_points, "Points in variance.csv")->check(CLI::PositiveNumber);
  opt->add_option("--variance-path", variance_path, "auto | closed | quadrature");
  opt->add_option("--out,-o", out_dir, "Output directory");

  auto* spec_cmd = app.add_subcommand("spectrum", "Discrete spectrum of the optimal generator");
  std::size_t k = 4, spec_points = 2000;
  spec_cmd->add_option("spec", spec_path, "Distribution spec file (JSON)")->required();
  spec_cmd->add_option("--k,-k", k, "Number of eigenvalues (including lambda0 = 0)");
  spec_cmd->add_option("--grid-points,-N", spec_points, "Grid cells");
  spec_cmd->add_option("--sigma-hat", sigma_hat, "Mean half-variance sigma-hat^2/2");
  spec_cmd->add_option("--out,-o", out_dir, "Output directory");

  auto* sim_cmd = app.add_subcommand("simulate", "Euler-Maruyama paths and the relaxation-rate estimate");
  std::optional<double> dt, x0;
  std::optional<std::size_t> steps, paths, burn_in, stride;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> boundary;
  int threads = 1;
  sim_cmd->add_option("spec", spec_path, "Distribution spec file (JSON)")->required();
  sim_cmd->add_option("--dt", dt, "Time step");
  sim_cmd->add_option("--steps", steps, "Steps per path");
  sim_cmd->add_option("--paths", paths, "Number of paths");
  sim_cmd->add_option("--seed", seed, "64-bit seed");
  sim_cmd->add_option("--burn-in", burn_in, "Steps discarded per path");
  sim_cmd->add_option("--stride", stride, "Keep every stride-th state");
  sim_cmd->add_option("--boundary", boundary, "reflect | reject-step");
  sim_cmd->add_option("--x0", x0, "Start point (default: draw from the stationary law)");
  sim_cmd->add_option("--sigma-hat", sigma_hat, "Mean half-variance sigma-hat^2/2");
  sim_cmd->add_option("--out,-o", out_dir, "Output directory");

  auto* table_cmd = app.add_subcommand("table", "Reproduce the Pearson catalog and check each row against the synthesis engine");
  std::optional<std::string> params_file;
  bool strict = false;
  table_cmd->add_option("--params-file", params_file, "Extra rows: [{\"family\": ..., \"params\": {...}}]");
  table_cmd->add_flag("--strict", strict, "Exit 4 if any row fails verification");
  table_cmd->add_option("--out,-o", out_dir, "Output directory");

  auto* rerun_cmd = app.add_subcommand("rerun", "Re-execute a manifest.json");
  std::string manifest_path;
  std::optional<std::string> rerun_out;
  rerun_cmd->add_option("manifest", manifest_path, "manifest.json written by an earlier run")->required();
  rerun_cmd->add_option("--out,-o", rerun_out, "Output directory (default: the manifest's)");

  app.add_option("--threads", threads, "OpenMP threads for path-parallel simulation")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Ok : InputError;
  }

  try {
    Json manifest;
    fs::path dir = out_dir;
    if (rerun_cmd->parsed()) {
      manifest = io::read_json_file(manifest_path);
      if (rerun_out) {
        dir = *rerun_out;
      } else if (manifest.contains("out") && manifest.at("out").is_string()) {
        dir = manifest.at("out").get<std::string>();
      }
      if (manifest.contains("resolved") && manifest["resolved"].contains("threads"))
        manifest["resolved"]["threads"] = threads;
    } else if (table_cmd->parsed()) {
      manifest = manifest_for("table", std::nullopt, nullptr, dir, Json{{"rows", table_rows(params_file)}, {"strict", strict}});
    } else {
      const auto doc = io::load_spec_file(spec_path);
      Json resolved{{"sigma_hat_sq_half", resolve_sigma_hat(doc, sigma_hat)}};
      std::string command;
      if (opt->parsed()) {
        command = "optimal";
        if (opt_points < 2) fail(ErrorCode::InvalidArgument, "--grid-points must be at least 2");
        parse_variance_path(variance_path);
        resolved["grid_points"] = opt_points;
        resolved["variance_path"] = variance_path;
      } else if (spec_cmd->parsed()) {
        command = "spectrum";
        if (k < 2) fail(ErrorCode::InvalidArgument, "--k must be at least 2 (lambda0 and lambda1)");
        if (k > spec_points) fail(ErrorCode::InvalidArgument, fmt::format("--k {} exceeds --grid-points {}", k, spec_points));
        resolved["k"] = k;
        resolved["grid_points"] = spec_points;
      } else {
        command = "simulate";
        auto cfg = io::sim_config_from(doc.sim);
        if (dt) cfg.dt = *dt;
        if (steps) cfg.n_steps = *steps;
        if (paths) cfg.n_paths = *paths;
        if (seed) cfg.seed = *seed;
        if (burn_in) cfg.burn_in = *burn_in;
        if (stride) cfg.stride = *stride;
        if (boundary) cfg.boundary_mode = parse_boundary_mode(*boundary);
        validate(cfg);
        Json start = "stationary";
        if (x0) {
          start = *x0;
        } else if (doc.sim.contains("x0")) {
          start = doc.sim.at("x0");
          if (!start.is_number() && start != "stationary") fail(ErrorCode::ParseError, "sim.x0 must be a number or \"stationary\"");
        }
        resolved["sim"] = io::to_json(cfg);
        resolved["x0"] = start;
        resolved["threads"] = threads;
      }
      manifest = manifest_for(command, spec_path, doc.raw, dir, resolved);
    }
    return execute(manifest, dir, out);
  } catch (const Error& e) {
    return report(e, is_input_error(e.code()) ? InputError : NumericalError, err);
  } catch (const Json::exception& e) {
    return report(e, InputError, err);
  } catch (const std::exception& e) {
    return report(e, NumericalError, err);
  }
}

}  // namespace optdiff::cli
