// defcon: run, verify or sweep the constrained two-link controller.

#include <iostream>

#include <CLI11.hpp>

#include "defcon/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Actor-critic neuroadaptive control of a two-link arm under deferred error constraints"};
    app.footer(
        "Exit codes: 0 ok, 1 property failed, 2 config error, 3 constraint violation,\n"
        "            4 divergence, 5 I/O error, 64 usage.\n"
        "Output root defaults to $DEFCON_OUT_ROOT, else ./out.");

    defcon::RunManifest manifest;
    std::string suite = "run";
    app.add_option("-c,--config", manifest.config, "Config file (built-in defaults if omitted)");
    app.add_option("-o,--out", manifest.out, "Output directory");
    app.add_option("-s,--set", manifest.overrides, "Override a config key: key=value (repeatable)")
        ->allow_extra_args(false);
    app.add_option("--suite", suite, "What to do")
        ->check(CLI::IsMember({"run", "verify", "sweep"}));
    app.add_option("--vary", manifest.vary, "Sweep axis: key=v1,v2,... (repeatable)")
        ->allow_extra_args(false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : int(defcon::ExitCode::usage);
    }
    manifest.suite = *defcon::parse_suite(suite);
    if (manifest.suite != defcon::Suite::sweep && !manifest.vary.empty()) {
        std::cerr << "--vary only applies to --suite sweep\n";
        return int(defcon::ExitCode::usage);
    }
    return int(defcon::execute(manifest, std::cout, std::cerr));
}
