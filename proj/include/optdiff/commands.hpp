#pragma once

// The optdiff command-line tool as a library entry point, so tests can run
// commands in-process as well as through the binary.
//
// Every command first resolves its options against the spec file, writes
// manifest.json (command, spec document, resolved options) into --out, and
// then executes purely from that manifest.  `optdiff rerun manifest.json`
// takes the same path, so a rerun reproduces every output byte for byte.

#include <filesystem>
#include <ostream>
#include <string_view>

#include "optdiff/io.hpp"

namespace optdiff::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { Ok = 0, InputError = 2, NumericalError = 3, VerificationFailure = 4 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Executes a manifest (as written by any command) into out_dir.  Writes
// manifest.json first.  Throws optdiff::Error on failure; returns the exit
// code otherwise (VerificationFailure for a strict table with failed rows).
int execute(const io::Json& manifest, const std::filesystem::path& out_dir, std::ostream& out);

}  // namespace optdiff::cli
