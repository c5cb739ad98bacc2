#include "defcon/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <thread>

#include "defcon/config.hpp"
#include "defcon/errors.hpp"
#include "defcon/verify.hpp"

namespace defcon {
namespace fs = std::filesystem;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    return os;
}

void finish(std::ofstream& os, const fs::path& path) {
    os.flush();
    if (!os) throw IoError("error writing '" + path.string() + "'");
}

fs::path prepare_dir(const RunManifest& m) {
    const fs::path dir = m.out.empty() ? default_output_root() : m.out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

const char* status_name(ExitCode code) {
    switch (code) {
        case ExitCode::ok: return "ok";
        case ExitCode::property_failed: return "property_failed";
        case ExitCode::config_error: return "config_error";
        case ExitCode::constraint_violation: return "constraint_violation";
        case ExitCode::divergence: return "divergence";
        case ExitCode::io_error: return "io_error";
        case ExitCode::usage: return "usage";
    }
    return "unknown";
}

void write_summary(std::ostream& os, ExitCode status, const RunSummary& s) {
    os << "status = " << status_name(status) << '\n'
       << "rows = " << s.rows << '\n'
       << "t_final = " << num(s.t_final) << '\n'
       << "violations = " << s.violations << '\n'
       << "finite = " << (s.finite ? "true" : "false") << '\n'
       << "max_wa_norm = " << num(s.max_wa_norm) << '\n'
       << "max_wc_norm = " << num(s.max_wc_norm) << '\n'
       << "max_z2_norm = " << num(s.max_z2_norm) << '\n'
       << "max_abs_tau = " << num(s.max_abs_tau) << '\n'
       << "steady_window_start = " << num(s.steady_window_start) << '\n'
       << "steady_mean_z1 = " << num(s.steady_mean_z1) << '\n'
       << "steady_mean_abs_z1_1 = " << num(s.steady_mean_abs_z1(0)) << '\n'
       << "steady_mean_abs_z1_2 = " << num(s.steady_mean_abs_z1(1)) << '\n';
}

void write_diagnostics(std::ostream& os, const RunResult& result, const SimConfig& config) {
    const SimLog& log = result.log;
    const LyapunovSummary ly = lyapunov_summary(log, config);
    os << "# Lyapunov decay constants (estimated weights stand in for weight errors)\n"
       << "mu1 = " << num(ly.mu1) << '\n'
       << "mu2 = " << num(ly.mu2) << '\n'
       << "sc_lower = " << num(ly.sc_lower) << '\n'
       << "sc_upper = " << num(ly.sc_upper) << '\n'
       << "sa_upper = " << num(ly.sa_upper) << '\n';
    for (std::size_t i = 0; i < ly.iota1_terms.size(); ++i)
        os << "iota1_term" << i + 1 << " = " << num(ly.iota1_terms[i]) << '\n';
    os << "iota1 = " << num(ly.iota1) << '\n'
       << "iota2_proxy = " << num(ly.iota2_proxy) << '\n'
       << "max_V = " << num(ly.max_V) << '\n';

    std::size_t negative = 0, nonfinite = 0;
    for (const auto& row : log.rows) {
        const LyapunovEntry e = lyapunov_diagnostics(row, config);
        negative += !e.nonnegative;
        nonfinite += !e.finite;
    }
    os << "lyapunov_negative_rows = " << negative << '\n'
       << "lyapunov_nonfinite_rows = " << nonfinite << '\n';

    const EnergyProfile ep = energy_profile(log, config);
    os << "\n# barrier torque magnitude by |Z1g|/kc band\n"
       << "energy_low_count = " << ep.low_count << '\n'
       << "energy_low_mean = " << num(ep.low_mean) << '\n'
       << "energy_high_count = " << ep.high_count << '\n'
       << "energy_high_mean = " << num(ep.high_mean) << '\n';

    os << "\n# integration\n"
       << "steps_taken = " << result.steps.taken << '\n'
       << "steps_limited = " << result.steps.limited << '\n'
       << "min_step = " << num(result.steps.min_step) << '\n';

    const auto last = last_raw_violation(log);
    os << "\n# last time with |Z1_i| >= kc_i (none: never)\n";
    for (int i = 0; i < 2; ++i)
        os << "last_raw_violation" << i + 1 << " = " << (last[i] ? num(*last[i]) : "none") << '\n';
}

void write_violations(std::ostream& os, const std::vector<Violation>& v) {
    os << "t,joint,kind,error,bound\n";
    for (const auto& x : v)
        os << num(x.t) << ',' << x.joint + 1 << ',' << (x.transformed ? "transformed" : "raw") << ','
           << num(x.error) << ',' << num(x.bound) << '\n';
}

struct RunOutcome {
    ExitCode code = ExitCode::ok;
    RunSummary summary;
    std::string message;
};

RunOutcome run_into(const SimConfig& config, const fs::path& dir) {
    const RunResult result = run(config);
    const RunSummary summary = summarize(result.log, config);
    const auto violations = constraint_monitor(result.log, config.constraint.Tc);

    RunOutcome outcome{ExitCode::ok, summary, {}};
    if (result.failure) {
        outcome.code = result.failure->kind == FailureKind::constraint_violation ? ExitCode::constraint_violation
                                                                                 : ExitCode::divergence;
        outcome.message = result.failure->message;
    } else if (!violations.empty()) {
        outcome.code = ExitCode::constraint_violation;
        outcome.message = std::to_string(violations.size()) + " logged constraint violations";
    }

    const auto write = [&](const fs::path& name, auto&& body) {
        const fs::path path = dir / name;
        auto os = open_output(path);
        body(os);
        finish(os, path);
    };
    write(config.output, [&](std::ostream& os) { write_csv(os, result.log); });
    write("config.ini", [&](std::ostream& os) { os << serialize_config(config); });
    write("summary.txt", [&](std::ostream& os) { write_summary(os, outcome.code, summary); });
    write("diagnostics.txt", [&](std::ostream& os) { write_diagnostics(os, result, config); });
    write("violations.csv", [&](std::ostream& os) { write_violations(os, violations); });
    if (result.failure) write("failure.txt", [&](std::ostream& os) { write_failure_report(os, *result.failure); });
    else fs::remove(dir / "failure.txt");
    return outcome;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::optional<Suite> parse_suite(std::string_view name) {
    if (name == "run") return Suite::run;
    if (name == "verify") return Suite::verify;
    if (name == "sweep") return Suite::sweep;
    return std::nullopt;
}

fs::path default_output_root() {
    if (const char* root = std::getenv("DEFCON_OUT_ROOT"); root && *root) return root;
    return "out";
}

SimConfig manifest_config(const RunManifest& m) {
    if (!m.config.empty()) return load_config(m.config, m.overrides);
    return parse_config("", m.overrides, "<defaults>");
}

ExitCode run_command(const RunManifest& manifest, std::ostream& out) {
    const SimConfig config = manifest_config(manifest);
    const fs::path dir = prepare_dir(manifest);
    const RunOutcome r = run_into(config, dir);
    out << "status: " << status_name(r.code) << '\n';
    if (!r.message.empty()) out << "reason: " << r.message << '\n';
    write_summary(out, r.code, r.summary);
    out << "artifacts: " << dir.string() << '\n';
    return r.code;
}

ExitCode verify_command(const RunManifest& manifest, std::ostream& out) {
    const SimConfig config = manifest_config(manifest);
    const fs::path dir = prepare_dir(manifest);
    const auto results = run_property_suites(config);
    std::ostringstream report;
    bool all = true;
    for (const auto& r : results) {
        report << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        all = all && r.passed;
    }
    const fs::path path = dir / "verify.txt";
    auto os = open_output(path);
    os << report.str();
    finish(os, path);
    out << report.str();
    return all ? ExitCode::ok : ExitCode::property_failed;
}

std::pair<std::string, std::vector<std::string>> parse_axis(std::string_view axis) {
    const auto eq = axis.find('=');
    if (eq == std::string_view::npos || eq + 1 == axis.size())
        throw ConfigError("--vary '" + std::string(axis) + "' is not of the form key=v1,v2");
    const std::string key = resolve_key(axis.substr(0, eq));
    const std::string_view values = axis.substr(eq + 1);
    auto list = split(values, values.find(';') != std::string_view::npos ? ';' : ',');
    for (const auto& v : list)
        if (v.find_first_not_of(" \t") == std::string::npos)
            throw ConfigError("--vary " + key + ": empty value");
    return {key, list};
}

ExitCode sweep_command(const RunManifest& manifest, std::ostream& out) {
    if (manifest.vary.empty()) throw ConfigError("sweep needs at least one --vary axis");
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& a : manifest.vary) axes.push_back(parse_axis(a));
    manifest_config(manifest);  // fail fast on a bad base config

    // Cartesian product, last axis fastest.
    std::vector<std::vector<std::string>> combos{{}};
    for (const auto& [key, values] : axes) {
        std::vector<std::vector<std::string>> next;
        for (const auto& c : combos)
            for (const auto& v : values) {
                next.push_back(c);
                next.back().push_back(v);
            }
        combos = std::move(next);
    }

    const fs::path root = prepare_dir(manifest);
    const auto run_one = [&](std::size_t i) {
        RunManifest m = manifest;
        for (std::size_t a = 0; a < axes.size(); ++a) m.overrides.push_back(axes[a].first + "=" + combos[i][a]);
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu", i);
        m.out = root / name;
        try {
            const SimConfig config = manifest_config(m);
            return run_into(config, prepare_dir(m));
        } catch (const ConfigError& e) {
            return RunOutcome{ExitCode::config_error, {}, e.what()};
        } catch (const std::exception& e) {
            return RunOutcome{ExitCode::io_error, {}, e.what()};
        }
    };

    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<RunOutcome> outcomes(combos.size());
    for (std::size_t begin = 0; begin < combos.size(); begin += workers) {
        std::vector<std::future<RunOutcome>> batch;
        const std::size_t end = std::min(combos.size(), begin + workers);
        for (std::size_t i = begin; i < end; ++i) batch.push_back(std::async(std::launch::async, run_one, i));
        for (std::size_t i = begin; i < end; ++i) outcomes[i] = batch[i - begin].get();
    }

    const fs::path path = root / "sweep.csv";
    auto os = open_output(path);
    os << "run";
    for (const auto& [key, values] : axes) os << ',' << key;
    os << ",status,exit_code,violations,max_wa_norm,max_wc_norm,max_z2_norm,steady_mean_z1\n";
    ExitCode first = ExitCode::ok;
    for (std::size_t i = 0; i < combos.size(); ++i) {
        const auto& r = outcomes[i];
        os << i;
        for (const auto& v : combos[i]) os << ",\"" << v << '"';
        os << ',' << status_name(r.code) << ',' << int(r.code) << ',' << r.summary.violations << ','
           << num(r.summary.max_wa_norm) << ',' << num(r.summary.max_wc_norm) << ','
           << num(r.summary.max_z2_norm) << ',' << num(r.summary.steady_mean_z1) << '\n';
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu", i);
        out << name << ": " << status_name(r.code);
        if (!r.message.empty()) out << " (" << r.message << ')';
        out << '\n';
        if (first == ExitCode::ok && r.code != ExitCode::ok) first = r.code;
    }
    finish(os, path);
    out << combos.size() << " runs, table: " << path.string() << '\n';
    return first;
}

ExitCode execute(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
    try {
        switch (manifest.suite) {
            case Suite::run: return run_command(manifest, out);
            case Suite::verify: return verify_command(manifest, out);
            case Suite::sweep: return sweep_command(manifest, out);
        }
        return ExitCode::usage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return ExitCode::config_error;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return ExitCode::io_error;
    } catch (const fs::filesystem_error& e) {
        err << "io error: " << e.what() << '\n';
        return ExitCode::io_error;
    }
}

}  // namespace defcon
