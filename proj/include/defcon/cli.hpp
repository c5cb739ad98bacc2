#pragma once

// Run orchestration behind the `defcon` executable.
//
// Exit codes (stable):
//   0  success
//   1  a verify property failed
//   2  config error (parse, unknown key, failed validation)
//   3  constraint violation during a run
//   4  divergence (non-finite state or weight ceiling exceeded)
//   5  I/O error writing artifacts
//  64  usage error

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "defcon/sim.hpp"

namespace defcon {

enum class ExitCode : int {
    ok = 0,
    property_failed = 1,
    config_error = 2,
    constraint_violation = 3,
    divergence = 4,
    io_error = 5,
    usage = 64,
};

enum class Suite { run, verify, sweep };

std::optional<Suite> parse_suite(std::string_view name);

/// Output root when --out is not given: $DEFCON_OUT_ROOT, else "out".
std::filesystem::path default_output_root();

struct RunManifest {
    std::filesystem::path config;  // empty: built-in defaults
    std::filesystem::path out;     // empty: default_output_root()
    std::vector<std::string> overrides;
    Suite suite = Suite::run;
    /// Sweep axes, each `key=v1,v2,...` (`;` separates values that
    /// themselves contain commas).
    std::vector<std::string> vary;
};

SimConfig manifest_config(const RunManifest& manifest);

/// Writes <out>/<output> (CSV), config.ini, summary.txt, diagnostics.txt,
/// violations.csv, and failure.txt when the run stops early.
ExitCode run_command(const RunManifest& manifest, std::ostream& out);

/// Writes <out>/verify.txt and prints one PASS/FAIL line per property.
ExitCode verify_command(const RunManifest& manifest, std::ostream& out);

/// Runs the cartesian product of the --vary axes concurrently, each into
/// <out>/run_NNN, and writes <out>/sweep.csv. Returns the first nonzero
/// run exit code in run order.
ExitCode sweep_command(const RunManifest& manifest, std::ostream& out);

/// Dispatches on manifest.suite and maps exceptions to exit codes,
/// reporting them on `err`.
ExitCode execute(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Splits `key=v1,v2` into the resolved key and its values.
std::pair<std::string, std::vector<std::string>> parse_axis(std::string_view axis);

}  // namespace defcon
