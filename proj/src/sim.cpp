#include "defcon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "defcon/errors.hpp"
#include "defcon/integrator.hpp"

namespace defcon {

DesiredSample desired_trajectory(const TrajectorySpec& spec, double t) {
    DesiredSample d;
    for (int i = 0; i < 2; ++i) {
        d.qd(i) = spec.joints[i].value(t);
        d.qd_dot(i) = spec.joints[i].rate(t);
        d.qd_ddot(i) = spec.joints[i].accel(t);
    }
    return d;
}

void SimConfig::validate() const {
    if (!(dt > 0)) throw ConfigError("sim: dt must be positive");
    if (!(t_end > dt)) throw ConfigError("sim: t_end must exceed dt");
    if (substeps < 1) throw ConfigError("sim: substeps must be >= 1");
    if (!(step_stiffness > 0)) throw ConfigError("sim: step_stiffness must be positive");
    if (!initial.all_finite()) throw ConfigError("sim: initial state must be finite");
    if (!(ceiling > 0)) throw ConfigError("sim: ceiling must be positive");
    if (output.empty()) throw ConfigError("sim: output file name must not be empty");
    plant.validate();
    constraint.validate();
    control.validate();
    critic.validate();
    actor.validate();
    actor_rbf.validate("actor_rbf");
    critic_rbf.validate("critic_rbf");
    disturbance.validate();
    validate_learning_stability(critic, actor, critic_rbf.neurons);
    // Position-derived bounds need q_d strictly inside the limits at t = 0.
    const DesiredSample d0 = desired_trajectory(trajectory, 0.0);
    error_bound(constraint, 0.0, d0.qd, d0.qd_dot);
}

ClosedLoop::ClosedLoop(SimConfig config)
    : config_(std::move(config)),
      actor_(make_diagonal_network(config_.actor_rbf, kActorInputs, 2)),
      critic_(make_diagonal_network(config_.critic_rbf, kCriticInputs, 1)) {}

int ClosedLoop::state_size() const {
    return 4 + actor_.neurons() * 2 + critic_.neurons();
}

VecXd ClosedLoop::initial_state() const {
    VecXd x = VecXd::Zero(state_size());
    x.segment<2>(0) = config_.initial.q;
    x.segment<2>(2) = config_.initial.qdot;
    return x;
}

JointState<> ClosedLoop::joint_state(const VecXd& x) const {
    return {x.segment<2>(0), x.segment<2>(2)};
}

MatXd ClosedLoop::actor_weights(const VecXd& x) const {
    return Eigen::Map<const MatXd>(x.data() + 4, actor_.neurons(), 2);
}

VecXd ClosedLoop::critic_weights(const VecXd& x) const {
    return x.segment(4 + 2 * actor_.neurons(), critic_.neurons());
}

StepSignals ClosedLoop::evaluate(const VecXd& x, double t) const {
    try {
        return evaluate_unchecked(x, t);
    } catch (const ConstraintViolation& e) {
        throw e.at_time(t);
    }
}

StepSignals ClosedLoop::evaluate_unchecked(const VecXd& x, double t) const {
    const auto& cfg = config_;
    const double beta = cfg.constraint.beta;
    const BoundMode mode = cfg.constraint.mode;

    StepSignals s;
    s.t = t;
    s.state = joint_state(x);
    s.desired = desired_trajectory(cfg.trajectory, t);
    const auto sh = shift(t, cfg.constraint.Tc);
    s.gamma = sh.gamma;
    s.gamma_dot = sh.gamma_dot;
    s.bound = error_bound(cfg.constraint, t, s.desired.qd, s.desired.qd_dot);

    const Vec2d Z1 = s.state.q - s.desired.qd;
    const Vec2d Z1gamma = transformed_error(s.gamma, Z1);
    s.alpha = virtual_control(Z1, Z1gamma, s.gamma_dot, s.bound.kc, s.bound.kc_dot,
                              s.desired.qd_dot, cfg.control, beta, mode);
    s.errors = compute_errors(s.state.q, s.state.qdot, s.desired.qd, s.alpha, s.gamma);

    Eigen::Matrix<double, kActorInputs, 1> Za;
    Za << s.state.q, s.state.qdot, s.errors.Z1, s.errors.Z2;
    Eigen::Vector4d Zc;
    Zc << s.errors.Z1, s.errors.Z2;

    s.Sa = basis(actor_, Za);
    s.actor_out = actor_weights(x).transpose() * s.Sa;

    s.Sc = basis(critic_, Zc);
    s.grad_Sc = basis_jacobian(critic_, Zc);
    s.J_hat = critic_value<double>(critic_weights(x), s.Sc);

    s.barrier = torque_barrier(s.errors.Z1gamma, s.gamma, s.bound.kc, beta, mode);
    s.tau = torque(s.actor_out, s.errors.Z2, s.errors.Z1gamma, s.gamma, s.bound.kc, cfg.control,
                   beta, mode);
    s.qddot = forward_dynamics(cfg.plant, s.state, s.tau, disturbance(cfg.disturbance, t));
    return s;
}

void ClosedLoop::complete(StepSignals& s, const Vec2d& alpha_dot) const {
    // Ż1 = q̇ − q̇_d, Ż2 = q̈ − α̇
    s.Zc_dot << s.state.qdot - s.desired.qd_dot, s.qddot - alpha_dot;
    s.Lambda = lambda_vector(s.Sc, s.grad_Sc, s.Zc_dot, config_.critic.psi);
    Eigen::Vector4d Zc;
    Zc << s.errors.Z1, s.errors.Z2;
    s.r = instantaneous_cost<double>(Zc, s.tau, config_.critic.Q, config_.critic.R);
}

VecXd ClosedLoop::derivative(const StepSignals& s, const VecXd& x) const {
    const MatXd Wa = actor_weights(x);
    const VecXd Wc = critic_weights(x);
    VecXd dx(state_size());
    dx.segment<2>(0) = s.state.qdot;
    dx.segment<2>(2) = s.qddot;
    const MatXd dWa = actor_rate<double>(Wa, s.Sa, s.errors.Z2, s.J_hat, config_.actor);
    dx.segment(4, Wa.size()) = Eigen::Map<const VecXd>(dWa.data(), dWa.size());
    dx.tail(Wc.size()) = critic_rate<double>(Wc, s.r, s.Lambda, config_.critic);
    return dx;
}

VecXd ClosedLoop::augmented_derivative(const VecXd& x, double t, const Vec2d& alpha_dot) const {
    StepSignals s = evaluate(x, t);
    complete(s, alpha_dot);
    return derivative(s, x);
}

bool SimRow::all_finite() const {
    const double scalars[] = {t, gamma, r, delta, J, wa_norm, wc_norm, V1, Vr, Vc, Va, sc_norm_sq,
                              sa_norm_sq};
    for (double v : scalars)
        if (!std::isfinite(v)) return false;
    return q.allFinite() && qdot.allFinite() && qd.allFinite() && qd_dot.allFinite() &&
           Z1.allFinite() && Z2.allFinite() && Z1gamma.allFinite() && kc.allFinite() &&
           alpha.allFinite() && tau.allFinite() && wa_col_norm.allFinite();
}

namespace {

SimRow make_row(const StepSignals& s, const VecXd& x, const ClosedLoop& loop) {
    const MatXd Wa = loop.actor_weights(x);
    const VecXd Wc = loop.critic_weights(x);
    SimRow row;
    row.t = s.t;
    row.q = s.state.q;
    row.qdot = s.state.qdot;
    row.qd = s.desired.qd;
    row.qd_dot = s.desired.qd_dot;
    row.Z1 = s.errors.Z1;
    row.Z2 = s.errors.Z2;
    row.Z1gamma = s.errors.Z1gamma;
    row.gamma = s.gamma;
    row.kc = s.bound.kc;
    row.alpha = s.alpha;
    row.tau = s.tau;
    row.r = s.r;
    row.delta = td_error(s.r, Wc, s.Lambda);
    row.J = s.J_hat;
    row.wa_norm = Wa.norm();
    row.wc_norm = Wc.norm();
    row.wa_col_norm = Vec2d(Wa.col(0).norm(), Wa.col(1).norm());
    row.sc_norm_sq = s.Sc.squaredNorm();
    row.sa_norm_sq = s.Sa.squaredNorm();
    const LyapunovEntry v = lyapunov_diagnostics(row, loop.config());
    row.V1 = v.V1;
    row.Vr = v.Vr;
    row.Vc = v.Vc;
    row.Va = v.Va;
    return row;
}

void check_row(const SimRow& row, const SimConfig& cfg) {
    if (!row.all_finite()) throw DivergenceError(row.t, "non-finite value in closed-loop signals");
    if (row.wa_norm > cfg.ceiling || row.wc_norm > cfg.ceiling || row.Z2.norm() > cfg.ceiling) {
        std::ostringstream os;
        os << "signal norm exceeded ceiling " << cfg.ceiling << " (|Wa| = " << row.wa_norm
           << ", |Wc| = " << row.wc_norm << ", |Z2| = " << row.Z2.norm() << ")";
        throw DivergenceError(row.t, os.str());
    }
    if (row.t >= cfg.constraint.Tc) {
        for (int i = 0; i < 2; ++i) {
            if (!(std::abs(row.Z1(i)) < row.kc(i))) {
                std::ostringstream os;
                os << "tracking error left its bound on joint " << i + 1 << ": |Z1| = "
                   << std::abs(row.Z1(i)) << ", k_c = " << row.kc(i);
                throw ConstraintViolation(i, row.t, std::abs(row.Z1(i)), row.kc(i), os.str());
            }
        }
    }
}

}  // namespace

double learning_stiffness(const StepSignals& s, const SimConfig& config) {
    return std::max(config.critic.sigma * (s.Lambda.squaredNorm() + config.critic.eta),
                    config.actor.sigma * (s.Sa.squaredNorm() + config.actor.eta));
}

RunResult run(const SimConfig& config) {
    config.validate();
    const ClosedLoop loop(config);
    RunResult result;
    auto& rows = result.log.rows;

    const auto steps = static_cast<long>(std::llround(config.t_end / config.dt));
    rows.reserve(static_cast<std::size_t>(steps) + 1);

    VecXd x = loop.initial_state();
    const double h_max = config.dt / config.substeps;
    double h_prev = h_max;
    std::optional<Vec2d> prev_alpha;
    double t = 0;
    auto& stats = result.steps;
    stats.min_step = h_max;
    try {
        for (long n = 0; n <= steps; ++n) {
            const double t_log = double(n) * config.dt;
            const double t_next = double(n + 1) * config.dt;
            double offset = 0;
            for (bool first = true;; first = false) {
                t = t_log + offset;
                if (!x.allFinite()) throw DivergenceError(t, "non-finite augmented state");
                StepSignals s = loop.evaluate(x, t);
                // One-step backward difference, frozen over the RK4 stages.
                const Vec2d alpha_dot =
                    prev_alpha ? Vec2d((s.alpha - *prev_alpha) / h_prev) : Vec2d::Zero();
                loop.complete(s, alpha_dot);
                if (first) {
                    SimRow row = make_row(s, x, loop);
                    check_row(row, config);
                    rows.push_back(std::move(row));
                    if (n == steps) break;
                }
                const double remaining = t_next - t;
                double h = std::min(h_max, config.step_stiffness / learning_stiffness(s, config));
                if (h < h_max) ++stats.limited;
                if (h > remaining - 1e-9 * h_max) h = remaining;
                if (!(h > 1e-14)) throw DivergenceError(t, "step size underflow");
                stats.min_step = std::min(stats.min_step, h);
                ++stats.taken;

                prev_alpha = s.alpha;
                h_prev = h;
                x = rk4_step(
                    [&](const VecXd& xs, double ts) {
                        return loop.augmented_derivative(xs, ts, alpha_dot);
                    },
                    x, t, h);
                if (h == remaining) break;
                offset += h;
            }
        }
    } catch (const ConstraintViolation& e) {
        FailureReport f;
        f.kind = FailureKind::constraint_violation;
        f.time = e.time();
        f.joint = e.joint();
        f.message = e.what();
        if (!rows.empty()) f.last_valid = rows.back();
        result.failure = std::move(f);
    } catch (const DivergenceError& e) {
        FailureReport f;
        f.kind = FailureKind::divergence;
        f.time = e.time();
        f.message = e.what();
        if (!rows.empty()) f.last_valid = rows.back();
        result.failure = std::move(f);
    }
    return result;
}

LyapunovEntry lyapunov_diagnostics(const SimRow& row, const SimConfig& config) {
    LyapunovEntry v;
    v.V1 = barrier_lyapunov(row.Z1gamma, row.kc, config.constraint.beta, config.constraint.mode);
    const Mat2<double> M = inertia_matrix(config.plant, row.q);
    v.Vr = v.V1 + 0.5 * row.Z2.dot(M * row.Z2);
    v.Vc = row.wc_norm * row.wc_norm / (2 * config.critic.sigma);
    v.Va = 0.5 * row.wa_norm * row.wa_norm;
    v.V = v.Vr + v.Vc + v.Va;
    v.nonnegative = v.V1 >= 0 && v.Vr >= v.V1 && v.Vc >= 0 && v.Va >= 0;
    v.finite = std::isfinite(v.V);
    return v;
}

LyapunovSummary lyapunov_summary(const SimLog& log, const SimConfig& config) {
    LyapunovSummary s;
    std::tie(s.mu1, s.mu2) = inertia_eigen_bounds(config.plant);
    s.sc_upper = config.critic_rbf.neurons;
    s.sa_upper = config.actor_rbf.neurons;
    s.sc_lower = s.sc_upper;
    double max_wc2 = 0, max_wa2 = 0;
    for (const auto& row : log.rows) {
        s.sc_lower = std::min(s.sc_lower, row.sc_norm_sq);
        max_wc2 = std::max(max_wc2, row.wc_norm * row.wc_norm);
        max_wa2 = std::max(max_wa2, row.wa_norm * row.wa_norm);
        s.max_V = std::max(s.max_V, row.Vr + row.Vc + row.Va);
    }
    const auto& a = config.actor;
    const auto& c = config.critic;
    // K2·I − I/2 has the single eigenvalue K2 − 1/2.
    s.iota1_terms = {config.control.K1, 2 * (config.control.K2 - 0.5) / s.mu2,
                     (c.eta - 2 * a.sigma * a.ka * a.ka * s.sc_lower) / c.sigma, a.sigma * a.eta};
    s.iota1 = *std::min_element(s.iota1_terms.begin(), s.iota1_terms.end());
    s.iota2_proxy = 0.5 * (c.eta + 2 * a.sigma * a.ka * a.ka * s.sc_upper) * max_wc2 +
                    0.5 * a.sigma * (a.eta + s.sa_upper) * max_wa2;
    return s;
}

std::vector<Violation> constraint_monitor(const SimLog& log, double Tc) {
    std::vector<Violation> out;
    for (const auto& row : log.rows) {
        for (int i = 0; i < 2; ++i) {
            if (!(std::abs(row.Z1gamma(i)) < row.kc(i)))
                out.push_back({row.t, i, true, std::abs(row.Z1gamma(i)), row.kc(i)});
            else if (row.t >= Tc && !(std::abs(row.Z1(i)) < row.kc(i)))
                out.push_back({row.t, i, false, std::abs(row.Z1(i)), row.kc(i)});
        }
    }
    return out;
}

std::array<std::optional<double>, 2> last_raw_violation(const SimLog& log) {
    std::array<std::optional<double>, 2> last;
    for (const auto& row : log.rows)
        for (int i = 0; i < 2; ++i)
            if (!(std::abs(row.Z1(i)) < row.kc(i))) last[i] = row.t;
    return last;
}

EnergyProfile energy_profile(const SimLog& log, const SimConfig& config, double low, double high) {
    EnergyProfile e;
    double low_sum = 0, high_sum = 0;
    const double beta = config.constraint.beta;
    for (const auto& row : log.rows) {
        const Vec2d term = torque_barrier(row.Z1gamma, row.gamma, row.kc, beta, config.constraint.mode);
        for (int i = 0; i < 2; ++i) {
            const double ratio = std::abs(row.Z1gamma(i)) / row.kc(i);
            if (ratio < low) {
                low_sum += std::abs(term(i));
                ++e.low_count;
            } else if (ratio > high) {
                high_sum += std::abs(term(i));
                ++e.high_count;
            }
        }
    }
    if (e.low_count) e.low_mean = low_sum / double(e.low_count);
    if (e.high_count) e.high_mean = high_sum / double(e.high_count);
    return e;
}

RunSummary summarize(const SimLog& log, const SimConfig& config) {
    RunSummary s;
    s.rows = log.rows.size();
    s.violations = constraint_monitor(log, config.constraint.Tc).size();
    s.steady_window_start = 0.75 * config.t_end;
    std::size_t steady = 0;
    for (const auto& row : log.rows) {
        s.t_final = row.t;
        s.finite = s.finite && row.all_finite();
        s.max_wa_norm = std::max(s.max_wa_norm, row.wa_norm);
        s.max_wc_norm = std::max(s.max_wc_norm, row.wc_norm);
        s.max_z2_norm = std::max(s.max_z2_norm, row.Z2.norm());
        s.max_abs_tau = std::max(s.max_abs_tau, row.tau.cwiseAbs().maxCoeff());
        if (row.t >= s.steady_window_start) {
            s.steady_mean_z1 += row.Z1.norm();
            s.steady_mean_abs_z1 += row.Z1.cwiseAbs();
            ++steady;
        }
    }
    if (steady) {
        s.steady_mean_z1 /= double(steady);
        s.steady_mean_abs_z1 /= double(steady);
    }
    return s;
}

// ---- CSV -----------------------------------------------------------------

std::vector<std::string> csv_columns() {
    return {"t",        "q1",       "q2",       "qdot1",    "qdot2",   "qd1",     "qd2",
            "qd_dot1",  "qd_dot2",  "Z1_1",     "Z1_2",     "Z2_1",    "Z2_2",    "Z1g_1",
            "Z1g_2",    "gamma",    "kc1",      "kc2",      "alpha1",  "alpha2",  "tau1",
            "tau2",     "r",        "delta",    "J",        "wa_norm", "wc_norm", "V1",
            "Vr",       "Vc",       "Va",       "wa_norm1", "wa_norm2", "sc_norm_sq",
            "sa_norm_sq"};
}

namespace {

std::vector<double> flatten(const SimRow& r) {
    return {r.t,        r.q(0),      r.q(1),      r.qdot(0),   r.qdot(1),    r.qd(0),
            r.qd(1),    r.qd_dot(0), r.qd_dot(1), r.Z1(0),     r.Z1(1),      r.Z2(0),
            r.Z2(1),    r.Z1gamma(0), r.Z1gamma(1), r.gamma,   r.kc(0),      r.kc(1),
            r.alpha(0), r.alpha(1),  r.tau(0),    r.tau(1),    r.r,          r.delta,
            r.J,        r.wa_norm,   r.wc_norm,   r.V1,        r.Vr,         r.Vc,
            r.Va,       r.wa_col_norm(0), r.wa_col_norm(1), r.sc_norm_sq, r.sa_norm_sq};
}

SimRow unflatten(const std::vector<double>& v) {
    SimRow r;
    std::size_t k = 0;
    auto next = [&] { return v[k++]; };
    auto next2 = [&] {
        const double a = next();
        return Vec2d(a, next());
    };
    r.t = next();
    r.q = next2();
    r.qdot = next2();
    r.qd = next2();
    r.qd_dot = next2();
    r.Z1 = next2();
    r.Z2 = next2();
    r.Z1gamma = next2();
    r.gamma = next();
    r.kc = next2();
    r.alpha = next2();
    r.tau = next2();
    r.r = next();
    r.delta = next();
    r.J = next();
    r.wa_norm = next();
    r.wc_norm = next();
    r.V1 = next();
    r.Vr = next();
    r.Vc = next();
    r.Va = next();
    r.wa_col_norm = next2();
    r.sc_norm_sq = next();
    r.sa_norm_sq = next();
    return r;
}

void write_header(std::ostream& os) {
    const auto cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
}

void write_values(std::ostream& os, const SimRow& row) {
    char buf[40];
    const auto values = flatten(row);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        if (i) os << ',';
        os << buf;
    }
    os << '\n';
}

}  // namespace

void write_csv(std::ostream& os, const SimLog& log) {
    write_header(os);
    for (const auto& row : log.rows) write_values(os, row);
}

SimLog read_csv(std::istream& is) {
    const auto cols = csv_columns();
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
    {
        std::istringstream hs(line);
        std::string name;
        std::size_t i = 0;
        while (std::getline(hs, name, ',')) {
            if (i >= cols.size() || name != cols[i])
                throw std::runtime_error("read_csv: unexpected column '" + name + "'");
            ++i;
        }
        if (i != cols.size()) throw std::runtime_error("read_csv: missing columns");
    }
    SimLog log;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        values.clear();
        const char* p = line.c_str();
        while (*p) {
            char* end = nullptr;
            values.push_back(std::strtod(p, &end));
            if (end == p) break;
            p = *end == ',' ? end + 1 : end;
        }
        if (values.size() != cols.size())
            throw std::runtime_error("read_csv: line " + std::to_string(lineno) + " has " +
                                     std::to_string(values.size()) + " fields");
        log.rows.push_back(unflatten(values));
    }
    return log;
}

void write_failure_report(std::ostream& os, const FailureReport& report) {
    os << "kind = "
       << (report.kind == FailureKind::constraint_violation ? "constraint_violation" : "divergence")
       << '\n';
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", report.time);
    os << "time = " << buf << '\n';
    os << "joint = " << (report.joint >= 0 ? std::to_string(report.joint + 1) : "none") << '\n';
    os << "message = " << report.message << '\n';
    os << "[last_valid_row]\n";
    if (report.last_valid) {
        write_header(os);
        write_values(os, *report.last_valid);
    } else {
        os << "none\n";
    }
}

}  // namespace defcon
