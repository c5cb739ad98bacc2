#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "defcon/cli.hpp"
#include "defcon/config.hpp"

using namespace defcon;
namespace fs = std::filesystem;

namespace {

const fs::path kDefault = fs::path(DEFCON_SOURCE_DIR) / "config" / "default.ini";

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("defcon_it_" + name)) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Outcome {
    ExitCode code;
    std::string out, err;
};

Outcome execute_manifest(const RunManifest& m) {
    std::ostringstream out, err;
    const ExitCode code = execute(m, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> key_values(const fs::path& p) {
    std::map<std::string, std::string> kv;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

TEST_CASE("default run succeeds and its summary is recomputable from the CSV") {
    TempDir dir("default");
    const Outcome o = execute_manifest({kDefault, dir.path, {}, Suite::run, {}});
    INFO(o.out << o.err);
    REQUIRE(o.code == ExitCode::ok);
    for (const char* f : {"log.csv", "config.ini", "summary.txt", "diagnostics.txt", "violations.csv"})
        CHECK(fs::exists(dir.path / f));
    CHECK_FALSE(fs::exists(dir.path / "failure.txt"));
    CHECK(slurp(dir.path / "violations.csv") == "t,joint,kind,error,bound\n");

    // The written config reproduces the run's config.
    CHECK(load_config(dir.path / "config.ini") == load_config(kDefault));

    std::ifstream csv(dir.path / "log.csv");
    const SimLog log = read_csv(csv);
    const RunSummary s = summarize(log, load_config(dir.path / "config.ini"));
    const auto kv = key_values(dir.path / "summary.txt");
    CHECK(kv.at("status") == "ok");
    CHECK(kv.at("rows") == std::to_string(s.rows));
    CHECK(kv.at("violations") == "0");
    CHECK(kv.at("max_wa_norm") == num(s.max_wa_norm));
    CHECK(kv.at("max_wc_norm") == num(s.max_wc_norm));
    CHECK(kv.at("max_z2_norm") == num(s.max_z2_norm));
    CHECK(kv.at("steady_mean_z1") == num(s.steady_mean_z1));
}

TEST_CASE("initial state outside position limits is tolerated before Tc") {
    TempDir dir("position");
    // Default run: Z1(0) = (0.60, 0.80) exceeds k_c(0) = (0.5, 0.55).
    Outcome o = execute_manifest({kDefault, dir.path, {}, Suite::run, {}});
    CHECK(o.code == ExitCode::ok);
    const auto last = key_values(dir.path / "diagnostics.txt");
    CHECK(last.at("last_raw_violation1") != "none");
    CHECK(std::stod(last.at("last_raw_violation1")) < 2.0);

    // Position limits: q2(0) = 1.8 lies above the 1.5 limit. The limits are
    // symmetric, so the nearer limit switches as q_d crosses zero.
    o = execute_manifest({kDefault,
                          dir.path,
                          {"constraint.source=position", "upper1.A=1.5", "upper2.A=1.5", "lower1.A=-1.5",
                           "lower2.A=-1.5"},
                          Suite::run,
                          {}});
    INFO(o.out << o.err);
    CHECK(o.code == ExitCode::ok);
}

TEST_CASE("tiny bounds give the violation exit code and a failure report") {
    TempDir dir("tiny");
    const Outcome o = execute_manifest({kDefault,
                                        dir.path,
                                        {"constraint.joint1.A=0.01", "constraint.joint1.B=0",
                                         "constraint.joint2.A=0.01", "constraint.joint2.B=0"},
                                        Suite::run,
                                        {}});
    INFO(o.out << o.err);
    CHECK(o.code == ExitCode::constraint_violation);
    CHECK(int(o.code) == 3);
    const auto report = key_values(dir.path / "failure.txt");
    CHECK(report.at("kind") == "constraint_violation");
    CHECK(key_values(dir.path / "summary.txt").at("status") == "constraint_violation");
}

TEST_CASE("config errors map to exit code 2") {
    TempDir dir("config");
    Outcome o = execute_manifest({kDefault, dir.path, {"K2=0.4"}, Suite::run, {}});
    CHECK(o.code == ExitCode::config_error);
    CHECK(o.err.find("K2") != std::string::npos);

    o = execute_manifest({"/nonexistent/x.ini", dir.path, {}, Suite::run, {}});
    CHECK(int(o.code) == 2);
    CHECK(o.err.find("cannot read") != std::string::npos);

    o = execute_manifest({kDefault, dir.path, {"bogus=1"}, Suite::verify, {}});
    CHECK(o.code == ExitCode::config_error);
}

TEST_CASE("divergence maps to exit code 4") {
    TempDir dir("diverge");
    const Outcome o = execute_manifest({{}, dir.path, {"ceiling=0.5", "t_end=0.2"}, Suite::run, {}});
    CHECK(int(o.code) == 4);
    CHECK(key_values(dir.path / "failure.txt").at("kind") == "divergence");
}

TEST_CASE("unwritable output maps to exit code 5") {
    TempDir dir("io");
    fs::create_directories(dir.path);
    std::ofstream(dir.path / "file") << "x";
    const Outcome o = execute_manifest({{}, dir.path / "file" / "sub", {"t_end=0.1"}, Suite::run, {}});
    CHECK(int(o.code) == 5);
}

TEST_CASE("verify writes a report") {
    TempDir dir("verify");
    Outcome o = execute_manifest({kDefault, dir.path, {}, Suite::verify, {}});
    CHECK(o.code == ExitCode::ok);
    CHECK(slurp(dir.path / "verify.txt") == o.out);
    CHECK(o.out.find("FAIL") == std::string::npos);

    o = execute_manifest({kDefault, dir.path, {"skew_tol=1e-15"}, Suite::verify, {}});
    CHECK(int(o.code) == 1);
    CHECK(o.out.find("FAIL skew_symmetry") != std::string::npos);
}

TEST_CASE("sweep runs the cartesian product") {
    TempDir dir("sweep");
    const Outcome o = execute_manifest(
        {{}, dir.path, {"t_end=0.3"}, Suite::sweep, {"K1=10,20", "constraint.beta=5;10;20"}});
    INFO(o.out << o.err);
    REQUIRE(o.code == ExitCode::ok);
    std::ifstream in(dir.path / "sweep.csv");
    std::string header, line;
    std::getline(in, header);
    CHECK(header.rfind("run,control.K1,constraint.beta,status,", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
    CHECK(load_config(dir.path / "run_005" / "config.ini").control.K1 == 20);
    CHECK(load_config(dir.path / "run_005" / "config.ini").constraint.beta == 20);
    CHECK(load_config(dir.path / "run_001" / "config.ini").constraint.beta == 10);

    // A bad axis value fails that run only.
    TempDir bad("sweep_bad");
    const Outcome b = execute_manifest({{}, bad.path, {"t_end=0.2"}, Suite::sweep, {"K2=0.3,15"}});
    CHECK(b.code == ExitCode::config_error);
    CHECK(fs::exists(bad.path / "run_001" / "log.csv"));

    CHECK(execute_manifest({{}, bad.path, {}, Suite::sweep, {}}).code == ExitCode::config_error);
    CHECK(execute_manifest({{}, bad.path, {}, Suite::sweep, {"nosuchkey=1,2"}}).code == ExitCode::config_error);
}

TEST_CASE("output root falls back to the environment") {
    TempDir dir("envroot");
    ::setenv("DEFCON_OUT_ROOT", dir.path.c_str(), 1);
    CHECK(default_output_root() == dir.path);
    const Outcome o = execute_manifest({{}, {}, {"t_end=0.1"}, Suite::run, {}});
    ::unsetenv("DEFCON_OUT_ROOT");
    CHECK(o.code == ExitCode::ok);
    CHECK(fs::exists(dir.path / "log.csv"));
    CHECK(default_output_root() == "out");
}

TEST_CASE("identical configs give byte-identical logs") {
    TempDir a("det_a"), b("det_b");
    const std::vector<std::string> o = {"t_end=2"};
    REQUIRE(execute_manifest({kDefault, a.path, o, Suite::run, {}}).code == ExitCode::ok);
    REQUIRE(execute_manifest({kDefault, b.path, o, Suite::run, {}}).code == ExitCode::ok);
    CHECK(slurp(a.path / "log.csv") == slurp(b.path / "log.csv"));
}
