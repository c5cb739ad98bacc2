#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "defcon/config.hpp"

using namespace defcon;

#ifndef DEFCON_SOURCE_DIR
#error "DEFCON_SOURCE_DIR must point at the source tree"
#endif

namespace {
const std::filesystem::path kDefault = std::filesystem::path(DEFCON_SOURCE_DIR) / "config" / "default.ini";

std::string message_of(auto&& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}
}  // namespace

TEST_CASE("bundled default file equals built-in defaults") {
    const SimConfig c = load_config(kDefault);
    CHECK(c == SimConfig{});
    CHECK(c.control.K1 == 15);
    CHECK(c.control.K2 == 15);
    CHECK(c.constraint.beta == 10);
    CHECK(c.actor.sigma == 50);
    CHECK(c.critic.sigma == 50);
    CHECK(c.actor.eta == 0.01);
    CHECK(c.critic.eta == 0.5);
    CHECK(c.actor_rbf.neurons == 10);
    CHECK(c.critic_rbf.neurons == 10);
    CHECK(c.actor_rbf.width == 1);
    CHECK(c.actor_rbf.center_min == -5);
    CHECK(c.actor_rbf.center_max == 5);
    CHECK(c.constraint.Tc == 2);
    CHECK(c.initial.q == Vec2d(0.60, 1.80));
    CHECK(c.initial.qdot == Vec2d::Zero());
    CHECK(c.constraint.error_bound[0] == Harmonic<>::sine(0.5, 0.1, 0.5));
    CHECK(c.constraint.error_bound[1] == Harmonic<>::cosine(0.45, 0.1, 0.5));
    CHECK(c.trajectory.joints[0] == Harmonic<>::sine(0, 1, 2));
    CHECK(c.trajectory.joints[1] == Harmonic<>::cosine(0, 1, 1));
}

TEST_CASE("serialize round-trips") {
    SimConfig c;
    CHECK(parse_config(serialize_config(c)) == c);

    c.control.K1 = 7.25;
    c.constraint.mode = BoundMode::scalar_min;
    c.constraint.source = BoundSource::position;
    c.constraint.upper = {Harmonic<>::sine(1.5, 0.1, 0.3), Harmonic<>::constant(1.5)};
    c.disturbance.mode = DisturbanceMode::sinusoidal;
    c.disturbance.amplitude = Vec2d(0.1, 1.0 / 3);
    c.critic.Q(0, 1) = c.critic.Q(1, 0) = 0.1;
    c.critic.R(1, 1) = 0.02;
    c.initial.q = Vec2d(0.1 + 0.2, -1e-17);
    c.output = "trace.csv";
    c.verify.seed = 42;
    const SimConfig back = parse_config(serialize_config(c));
    CHECK(back == c);
    CHECK(serialize_config(back) == serialize_config(c));
}

TEST_CASE("every key appears in serialized output") {
    const std::string text = serialize_config(SimConfig{});
    for (const auto& key : config_keys()) {
        const auto dot = key.find('.');
        CHECK(text.find("[" + key.substr(0, dot) + "]") != std::string::npos);
        CHECK(text.find("\n" + key.substr(dot + 1) + " = ") != std::string::npos);
    }
}

TEST_CASE("overrides") {
    SimConfig c = parse_config("", {"control.K1=20", "K2=16", "actor.eta = 0.02", "sim.q0=0.1, 0.2"});
    CHECK(c.control.K1 == 20);
    CHECK(c.control.K2 == 16);
    CHECK(c.actor.eta == 0.02);
    CHECK(c.initial.q == Vec2d(0.1, 0.2));

    CHECK(resolve_key("K2") == "control.K2");
    CHECK(resolve_key("trajectory.joint1.omega") == "trajectory.joint1.omega");
    CHECK(message_of([] { resolve_key("joint1.family"); }).find("ambiguous") != std::string::npos);
    CHECK(message_of([] { resolve_key("sigma"); }).find("ambiguous") != std::string::npos);
    CHECK(message_of([] { resolve_key("nope"); }).find("unknown key") != std::string::npos);
    CHECK(message_of([] { resolve_key("2"); }).find("unknown key") != std::string::npos);

    CHECK_THROWS_AS(parse_config("", {"K2=0.4"}), ConfigError);
    CHECK(message_of([] { parse_config("", {"K2=0.4"}); }).find("K2") != std::string::npos);
    CHECK_THROWS_AS(parse_config("", {"K1"}), ConfigError);
    CHECK_THROWS_AS(parse_config("", {"K1=abc"}), ConfigError);
}

TEST_CASE("parse errors carry line numbers") {
    const std::string unknown = message_of([] { parse_config("[control]\nK1 = 3\nK9 = 1\n"); });
    CHECK(unknown.find("line 3") != std::string::npos);
    CHECK(unknown.find("control.K9") != std::string::npos);

    const std::string dup = message_of([] { parse_config("[control]\nK1 = 3\n# c\nK1 = 4\n"); });
    CHECK(dup.find("line 4") != std::string::npos);
    CHECK(dup.find("duplicate") != std::string::npos);

    CHECK(message_of([] { parse_config("[control\n"); }).find("line 1") != std::string::npos);
    CHECK(message_of([] { parse_config("\n[sim]\nsubsteps 3\n"); }).find("line 3") != std::string::npos);
    CHECK(message_of([] { parse_config("[sim]\nsubsteps = 2.5\n"); }).find("line 2") != std::string::npos);
    CHECK(message_of([] { parse_config("[sim]\nq0 = 1\n"); }).find("two") != std::string::npos);
    CHECK(message_of([] { parse_config("[critic]\nQ = 1, 2, 3\n"); }).find("line 2") != std::string::npos);
    CHECK(message_of([] { parse_config("[constraint]\nmode = both\n"); }).find("per_joint") !=
          std::string::npos);
    CHECK(message_of([] { parse_config("[trajectory]\njoint1.family = tan\n"); }).find("family") !=
          std::string::npos);
}

TEST_CASE("comments, blanks and full matrices") {
    const SimConfig c = parse_config(
        "# leading comment\n\n[critic]\n  Q = 2,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1   # full form\n"
        "R = 0.5, 0.25\n");
    CHECK(c.critic.Q(0, 0) == 2);
    CHECK(c.critic.R(1, 1) == 0.25);
}

TEST_CASE("validation failures name the invariant") {
    CHECK(message_of([] { parse_config("[control]\nK2 = 0.4\n"); }).find("K2") != std::string::npos);
    CHECK(message_of([] { parse_config("[actor]\nka = 0.2\n"); }).find("stability") != std::string::npos);
    CHECK(message_of([] { parse_config("[constraint]\nTc = 0\n"); }).find("Tc") != std::string::npos);
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/defcon.ini"), ConfigError);
    const auto tmp = std::filesystem::temp_directory_path() / "defcon_cfg_test.ini";
    {
        std::ofstream os(tmp);
        os << "[control]\nK1 = 9\n";
    }
    CHECK(load_config(tmp, {"a=2"}).control.K1 == 9);
    CHECK(load_config(tmp, {"a=2"}).control.a == 2);
    std::filesystem::remove(tmp);
}
