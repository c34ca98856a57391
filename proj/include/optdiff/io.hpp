#pragma once

// Spec-file parsing and output writing for the command-line tool.

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "optdiff/distributions.hpp"
#include "optdiff/pearson.hpp"
#include "optdiff/sim.hpp"

namespace optdiff::io {

using Json = nlohmann::json;

// A parsed distribution spec file:
//   {"kind": "beta", "params": {"alpha": 1, "beta": 1},
//    "support": [0, 1],                      optional, "inf"/"-inf" allowed
//    "grid": [...], "pdf": [...],            custom only
//    "sigma_hat_sq_half": 0.2,               optional
//    "sim": {"dt": 1e-3, "steps": ..., ...}} optional
struct SpecDocument {
  Json raw;
  DistributionKind kind;
  std::map<std::string, double> params;
  DistributionSpec spec;
  std::optional<double> sigma_hat_sq_half;
  Json sim;  // object, possibly empty
};

// ParseError on malformed documents; distribution errors pass through.
SpecDocument parse_spec(const Json& doc);
SpecDocument load_spec_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

// A bound written as a number or one of "inf", "+inf", "-inf".
double parse_bound(const Json& v);

// The catalog row matching a spec, when its kind is one of the seven
// Pearson families.
std::optional<PearsonRow> catalog_row(const SpecDocument& doc);

// sim section keys: dt, steps, paths, seed, burn_in, stride, bins,
// boundary ("reflect" | "reject-step"), max_lag_time.
SimConfig sim_config_from(const Json& section, SimConfig base = {});
Json to_json(const SimConfig& cfg);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& doc);

// Doubles as 17 significant digits, the form used in every CSV.
std::string format_double(double x);

}  // namespace optdiff::io
