#include "defcon/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "defcon/errors.hpp"

namespace defcon {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) throw ConfigError("expected a number, got an empty value");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError("expected a number, got '" + s + "'");
    return v;
}

long parse_integer(std::string_view text) {
    const std::string s = trim(text);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError("expected an integer, got '" + s + "'");
    return v;
}

std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    std::string item;
    std::istringstream is{std::string(text)};
    while (std::getline(is, item, ',')) out.push_back(parse_double(item));
    return out;
}

std::string format_list(std::initializer_list<double> values) {
    std::string s;
    for (double v : values) {
        if (!s.empty()) s += ", ";
        s += format_double(v);
    }
    return s;
}

Vec2d parse_vec2(std::string_view text) {
    const auto v = parse_list(text);
    if (v.size() != 2) throw ConfigError("expected two comma-separated numbers");
    return {v[0], v[1]};
}

/// A diagonal (n values) or full row-major (n² values) square matrix.
template <int N>
Eigen::Matrix<double, N, N> parse_square(std::string_view text) {
    const auto v = parse_list(text);
    Eigen::Matrix<double, N, N> m = Eigen::Matrix<double, N, N>::Zero();
    if (v.size() == std::size_t(N)) {
        for (int i = 0; i < N; ++i) m(i, i) = v[std::size_t(i)];
    } else if (v.size() == std::size_t(N * N)) {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) m(i, j) = v[std::size_t(i * N + j)];
    } else {
        throw ConfigError("expected " + std::to_string(N) + " diagonal or " + std::to_string(N * N) +
                          " row-major entries");
    }
    return m;
}

template <int N>
std::string format_square(const Eigen::Matrix<double, N, N>& m) {
    const bool diagonal = m.isDiagonal(0.0);
    std::string s;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (diagonal && i != j) continue;
            if (!s.empty()) s += ", ";
            s += format_double(m(i, j));
        }
    return s;
}

struct Field {
    std::string key;
    std::function<void(SimConfig&, std::string_view)> set;
    std::function<std::string(const SimConfig&)> get;
};

template <typename Member>
Field number(std::string key, Member member) {
    return {std::move(key),
            [member](SimConfig& c, std::string_view v) { member(c) = parse_double(v); },
            [member](const SimConfig& c) { return format_double(member(const_cast<SimConfig&>(c))); }};
}

template <typename Member>
Field integer(std::string key, Member member) {
    return {std::move(key),
            [member](SimConfig& c, std::string_view v) {
                member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_integer(v));
            },
            [member](const SimConfig& c) { return std::to_string(member(const_cast<SimConfig&>(c))); }};
}

template <typename Member>
Field vec2(std::string key, Member member) {
    return {std::move(key), [member](SimConfig& c, std::string_view v) { member(c) = parse_vec2(v); },
            [member](const SimConfig& c) {
                const Vec2d& x = member(const_cast<SimConfig&>(c));
                return format_list({x(0), x(1)});
            }};
}

template <typename Member>
void harmonic_fields(std::vector<Field>& out, const std::string& prefix, Member member) {
    out.push_back({prefix + ".family",
                   [member](SimConfig& c, std::string_view v) {
                       const auto k = parse_harmonic_kind(trim(v));
                       if (!k) throw ConfigError("family must be one of constant, sin, cos");
                       member(c).kind = *k;
                   },
                   [member](const SimConfig& c) {
                       return std::string(to_string(member(const_cast<SimConfig&>(c)).kind));
                   }});
    out.push_back(number(prefix + ".A", [member](SimConfig& c) -> double& { return member(c).offset; }));
    out.push_back(number(prefix + ".B", [member](SimConfig& c) -> double& { return member(c).amplitude; }));
    out.push_back(number(prefix + ".omega", [member](SimConfig& c) -> double& { return member(c).omega; }));
}

template <typename Member>
void rbf_fields(std::vector<Field>& out, const std::string& section, Member member) {
    out.push_back(integer(section + ".neurons", [member](SimConfig& c) -> int& { return member(c).neurons; }));
    out.push_back(number(section + ".center_min", [member](SimConfig& c) -> double& { return member(c).center_min; }));
    out.push_back(number(section + ".center_max", [member](SimConfig& c) -> double& { return member(c).center_max; }));
    out.push_back(number(section + ".width", [member](SimConfig& c) -> double& { return member(c).width; }));
}

template <typename Enum>
Field choice(std::string key, std::function<Enum&(SimConfig&)> member,
             std::vector<std::pair<std::string, Enum>> names) {
    return {std::move(key),
            [member, names](SimConfig& c, std::string_view v) {
                const std::string s = trim(v);
                for (const auto& [name, value] : names)
                    if (name == s) {
                        member(c) = value;
                        return;
                    }
                std::string allowed;
                for (const auto& n : names) allowed += (allowed.empty() ? "" : ", ") + n.first;
                throw ConfigError("expected one of " + allowed + ", got '" + s + "'");
            },
            [member, names](const SimConfig& c) {
                const Enum e = member(const_cast<SimConfig&>(c));
                for (const auto& [name, value] : names)
                    if (value == e) return name;
                return names.front().first;
            }};
}

#define DEFCON_FIELD(expr) [](SimConfig& c) -> auto& { return expr; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(number("sim.dt", DEFCON_FIELD(c.dt)));
        f.push_back(number("sim.t_end", DEFCON_FIELD(c.t_end)));
        f.push_back(integer("sim.substeps", DEFCON_FIELD(c.substeps)));
        f.push_back(number("sim.step_stiffness", DEFCON_FIELD(c.step_stiffness)));
        f.push_back(vec2("sim.q0", DEFCON_FIELD(c.initial.q)));
        f.push_back(vec2("sim.qdot0", DEFCON_FIELD(c.initial.qdot)));
        f.push_back(number("sim.ceiling", DEFCON_FIELD(c.ceiling)));
        f.push_back({"sim.output", [](SimConfig& c, std::string_view v) { c.output = trim(v); },
                     [](const SimConfig& c) { return c.output; }});

        harmonic_fields(f, "trajectory.joint1", DEFCON_FIELD(c.trajectory.joints[0]));
        harmonic_fields(f, "trajectory.joint2", DEFCON_FIELD(c.trajectory.joints[1]));

        f.push_back(number("plant.m1", DEFCON_FIELD(c.plant.m1)));
        f.push_back(number("plant.m2", DEFCON_FIELD(c.plant.m2)));
        f.push_back(number("plant.l1", DEFCON_FIELD(c.plant.l1)));
        f.push_back(number("plant.l2", DEFCON_FIELD(c.plant.l2)));
        f.push_back(number("plant.lc1", DEFCON_FIELD(c.plant.lc1)));
        f.push_back(number("plant.lc2", DEFCON_FIELD(c.plant.lc2)));
        f.push_back(number("plant.I1", DEFCON_FIELD(c.plant.I1)));
        f.push_back(number("plant.I2", DEFCON_FIELD(c.plant.I2)));
        f.push_back(number("plant.g", DEFCON_FIELD(c.plant.g)));

        f.push_back(choice<DisturbanceMode>(
            "disturbance.mode", DEFCON_FIELD(c.disturbance.mode),
            {{"zero", DisturbanceMode::zero}, {"sinusoidal", DisturbanceMode::sinusoidal}}));
        f.push_back(vec2("disturbance.amplitude", DEFCON_FIELD(c.disturbance.amplitude)));
        f.push_back(number("disturbance.frequency", DEFCON_FIELD(c.disturbance.frequency)));

        f.push_back(choice<BoundMode>(
            "constraint.mode", DEFCON_FIELD(c.constraint.mode),
            {{"per_joint", BoundMode::per_joint}, {"scalar_min", BoundMode::scalar_min}}));
        f.push_back(choice<BoundSource>(
            "constraint.source", DEFCON_FIELD(c.constraint.source),
            {{"direct", BoundSource::direct}, {"position", BoundSource::position}}));
        f.push_back(number("constraint.Tc", DEFCON_FIELD(c.constraint.Tc)));
        f.push_back(number("constraint.beta", DEFCON_FIELD(c.constraint.beta)));
        harmonic_fields(f, "constraint.joint1", DEFCON_FIELD(c.constraint.error_bound[0]));
        harmonic_fields(f, "constraint.joint2", DEFCON_FIELD(c.constraint.error_bound[1]));
        harmonic_fields(f, "constraint.upper1", DEFCON_FIELD(c.constraint.upper[0]));
        harmonic_fields(f, "constraint.upper2", DEFCON_FIELD(c.constraint.upper[1]));
        harmonic_fields(f, "constraint.lower1", DEFCON_FIELD(c.constraint.lower[0]));
        harmonic_fields(f, "constraint.lower2", DEFCON_FIELD(c.constraint.lower[1]));

        f.push_back(number("control.K1", DEFCON_FIELD(c.control.K1)));
        f.push_back(number("control.K2", DEFCON_FIELD(c.control.K2)));
        f.push_back(number("control.a", DEFCON_FIELD(c.control.a)));

        f.push_back(number("critic.sigma", DEFCON_FIELD(c.critic.sigma)));
        f.push_back(number("critic.eta", DEFCON_FIELD(c.critic.eta)));
        f.push_back(number("critic.psi", DEFCON_FIELD(c.critic.psi)));
        f.push_back({"critic.Q", [](SimConfig& c, std::string_view v) { c.critic.Q = parse_square<4>(v); },
                     [](const SimConfig& c) { return format_square<4>(c.critic.Q); }});
        f.push_back({"critic.R", [](SimConfig& c, std::string_view v) { c.critic.R = parse_square<2>(v); },
                     [](const SimConfig& c) { return format_square<2>(c.critic.R); }});

        f.push_back(number("actor.sigma", DEFCON_FIELD(c.actor.sigma)));
        f.push_back(number("actor.eta", DEFCON_FIELD(c.actor.eta)));
        f.push_back(number("actor.ka", DEFCON_FIELD(c.actor.ka)));

        rbf_fields(f, "actor_rbf", DEFCON_FIELD(c.actor_rbf));
        rbf_fields(f, "critic_rbf", DEFCON_FIELD(c.critic_rbf));

        f.push_back(integer("verify.samples", DEFCON_FIELD(c.verify.samples)));
        f.push_back(integer("verify.seed", DEFCON_FIELD(c.verify.seed)));
        f.push_back(number("verify.shift_tol", DEFCON_FIELD(c.verify.shift_tol)));
        f.push_back(number("verify.barrier_tol", DEFCON_FIELD(c.verify.barrier_tol)));
        f.push_back(number("verify.skew_tol", DEFCON_FIELD(c.verify.skew_tol)));
        f.push_back(number("verify.gravity_rel_tol", DEFCON_FIELD(c.verify.gravity_rel_tol)));
        f.push_back(number("verify.dynamics_residual_tol", DEFCON_FIELD(c.verify.dynamics_residual_tol)));
        f.push_back(number("verify.rbf_grad_rel_tol", DEFCON_FIELD(c.verify.rbf_grad_rel_tol)));
        f.push_back(integer("verify.rbf_grad_samples", DEFCON_FIELD(c.verify.rbf_grad_samples)));
        f.push_back(number("verify.rk4_ratio_min", DEFCON_FIELD(c.verify.rk4_ratio_min)));
        f.push_back(number("verify.rk4_ratio_max", DEFCON_FIELD(c.verify.rk4_ratio_max)));
        f.push_back(number("verify.td_tol", DEFCON_FIELD(c.verify.td_tol)));
        return f;
    }();
    return table;
}

#undef DEFCON_FIELD

const Field& field(const std::string& full_key) {
    for (const auto& f : fields())
        if (f.key == full_key) return f;
    throw ConfigError("unknown key '" + full_key + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : fields()) keys.push_back(f.key);
    return keys;
}

std::string resolve_key(std::string_view key) {
    const std::string k = trim(key);
    if (k.empty()) throw ConfigError("empty key");
    std::vector<std::string> matches;
    for (const auto& f : fields()) {
        if (f.key == k) return k;
        if (f.key.size() > k.size() && f.key.ends_with(k) && f.key[f.key.size() - k.size() - 1] == '.')
            matches.push_back(f.key);
    }
    if (matches.empty()) throw ConfigError("unknown key '" + k + "'");
    if (matches.size() > 1) {
        std::string all;
        for (const auto& m : matches) all += (all.empty() ? "" : ", ") + m;
        throw ConfigError("ambiguous key '" + k + "' (matches " + all + ")");
    }
    return matches.front();
}

void apply_override(SimConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    const std::string key = resolve_key(assignment.substr(0, eq));
    try {
        field(key).set(config, assignment.substr(eq + 1));
    } catch (const ConfigError& e) {
        throw ConfigError("override " + key + ": " + e.what());
    }
}

SimConfig parse_config(std::string_view text, const std::vector<std::string>& overrides,
                       const std::string& source) {
    SimConfig config;
    std::map<std::string, int> seen;
    std::string section;
    std::istringstream is{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source + ": malformed section header", lineno);
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ": expected 'key = value'", lineno);
        const std::string name = trim(std::string_view(line).substr(0, eq));
        const std::string key = section.empty() ? name : section + "." + name;
        if (auto [it, inserted] = seen.emplace(key, lineno); !inserted)
            throw ConfigError(source + ": duplicate key '" + key + "' (first on line " +
                                  std::to_string(it->second) + ")",
                              lineno);
        const Field* f = nullptr;
        for (const auto& candidate : fields())
            if (candidate.key == key) f = &candidate;
        if (!f) throw ConfigError(source + ": unknown key '" + key + "'", lineno);
        try {
            f->set(config, std::string_view(line).substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ": " + key + ": " + e.what(), lineno);
        }
    }
    for (const auto& o : overrides) apply_override(config, o);
    config.validate();
    return config;
}

SimConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides, path.string());
}

std::string serialize_config(const SimConfig& config) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        const auto dot = f.key.find('.');
        const std::string s = f.key.substr(0, dot);
        if (s != section) {
            if (!section.empty()) out += '\n';
            out += "[" + s + "]\n";
            section = s;
        }
        out += f.key.substr(dot + 1) + " = " + f.get(config) + "\n";
    }
    return out;
}

}  // namespace defcon
