#pragma once

// Closed-loop simulation of the arm under the actor-critic barrier
// controller: plant state and both weight sets are integrated together by
// fixed-step RK4.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "defcon/constraint.hpp"
#include "defcon/control.hpp"
#include "defcon/learning.hpp"
#include "defcon/plant.hpp"
#include "defcon/rbf.hpp"
#include "defcon/signal.hpp"

namespace defcon {

using Vec2d = Vec2<double>;
using Mat2d = Mat2<double>;
using VecXd = Eigen::VectorXd;
using MatXd = Eigen::MatrixXd;

struct TrajectorySpec {
    std::array<Harmonic<>, 2> joints = {Harmonic<>::sine(0, 1, 2), Harmonic<>::cosine(0, 1, 1)};
    bool operator==(const TrajectorySpec&) const = default;
};

struct DesiredSample {
    Vec2d qd, qd_dot, qd_ddot;
};

DesiredSample desired_trajectory(const TrajectorySpec& spec, double t);

/// Tolerances and sample counts for the property suites run by `verify`.
struct VerifyTolerances {
    int samples = 10000;
    unsigned seed = 20240917;
    double shift_tol = 1e-12;
    double barrier_tol = 1e-12;
    double skew_tol = 1e-9;
    double gravity_rel_tol = 1e-6;
    double dynamics_residual_tol = 1e-10;
    double rbf_grad_rel_tol = 1e-5;
    int rbf_grad_samples = 100;
    double rk4_ratio_min = 12;
    double rk4_ratio_max = 20;
    double td_tol = 1e-12;
    bool operator==(const VerifyTolerances&) const = default;
};

struct SimConfig {
    double dt = 1e-3;  // log interval
    double t_end = 20;
    /// Fixed RK4 steps per log interval. The critic law is stiff during the
    /// initial transient (σ_c‖Λ‖² reaches ~1e5 /s), so h = dt/substeps must
    /// stay well below 1e-4 s.
    int substeps = 20;
    /// Each step is also capped at step_stiffness / λ, with λ the stiffness of
    /// the weight laws at the step start (see learning_stiffness). RK4 is
    /// stable on the real axis up to hλ ≈ 2.78.
    double step_stiffness = 1.0;
    JointState<> initial{Vec2d(0.60, 1.80), Vec2d::Zero()};
    TrajectorySpec trajectory;
    ManipulatorParams<> plant;
    ConstraintSpec<> constraint;
    ControllerConfig<> control;
    CriticConfig<> critic;
    ActorConfig<> actor;
    RbfShape<> actor_rbf;
    RbfShape<> critic_rbf;
    DisturbanceSpec<> disturbance;
    /// Abort as diverged if ‖Ŵa‖, ‖Ŵc‖ or ‖Z2‖ exceeds this.
    double ceiling = 1e6;
    std::string output = "log.csv";  // CSV file name inside the run directory
    VerifyTolerances verify;

    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

inline constexpr int kActorInputs = 8;   // (q, q̇, Z1, Z2)
inline constexpr int kCriticInputs = 4;  // (Z1, Z2)

/// Everything computed at one evaluation point of the closed loop.
struct StepSignals {
    double t = 0;
    JointState<> state;
    DesiredSample desired;
    double gamma = 0, gamma_dot = 0;
    ErrorBound<> bound;
    Vec2d alpha, tau, qddot, barrier;
    ErrorPair<> errors;
    VecXd Sa, Sc;
    MatXd grad_Sc;
    Vec2d actor_out;
    double J_hat = 0;
    // filled once α̇ is known
    Eigen::Vector4d Zc_dot = Eigen::Vector4d::Zero();
    VecXd Lambda;
    double r = 0, delta = 0;
};

/// Augmented state x = [q; q̇; vec(Ŵa); Ŵc] (Ŵa column-major).
class ClosedLoop {
public:
    explicit ClosedLoop(SimConfig config);

    const SimConfig& config() const { return config_; }
    const RbfNetwork<>& actor_network() const { return actor_; }
    const RbfNetwork<>& critic_network() const { return critic_; }

    int state_size() const;
    VecXd initial_state() const;
    JointState<> joint_state(const VecXd& x) const;
    MatXd actor_weights(const VecXd& x) const;
    VecXd critic_weights(const VecXd& x) const;

    /// γ and bounds → errors → α → Z2 → RBF outputs → τ → q̈. Throws
    /// ConstraintViolation if a barrier precondition fails.
    StepSignals evaluate(const VecXd& x, double t) const;
    /// Completes `s` with Ż_c, Λ, r and δ given an α̇ estimate.
    void complete(StepSignals& s, const Vec2d& alpha_dot) const;
    VecXd derivative(const StepSignals& s, const VecXd& x) const;

    /// ẋ at (x, t) with α̇ supplied externally (it is not observable from x).
    VecXd augmented_derivative(const VecXd& x, double t, const Vec2d& alpha_dot) const;

private:
    StepSignals evaluate_unchecked(const VecXd& x, double t) const;

    SimConfig config_;
    RbfNetwork<> actor_;
    RbfNetwork<> critic_;
};

struct SimRow {
    double t = 0;
    Vec2d q, qdot, qd, qd_dot, Z1, Z2, Z1gamma;
    double gamma = 0;
    Vec2d kc, alpha, tau;
    double r = 0, delta = 0, J = 0, wa_norm = 0, wc_norm = 0;
    double V1 = 0, Vr = 0, Vc = 0, Va = 0;
    // trailing columns
    Vec2d wa_col_norm;
    double sc_norm_sq = 0, sa_norm_sq = 0;

    bool all_finite() const;
    bool operator==(const SimRow&) const = default;
};

struct SimLog {
    std::vector<SimRow> rows;
};

enum class FailureKind { constraint_violation, divergence };

struct FailureReport {
    FailureKind kind = FailureKind::divergence;
    double time = 0;
    int joint = -1;  // 0-based, -1 when not joint-specific
    std::string message;
    std::optional<SimRow> last_valid;
};

struct StepStats {
    std::size_t taken = 0;
    std::size_t limited = 0;  // steps shortened by the stiffness cap
    double min_step = 0;
};

struct RunResult {
    SimLog log;
    std::optional<FailureReport> failure;
    StepStats steps;
    bool ok() const { return !failure.has_value(); }
};

/// Largest eigenvalue magnitude of the weight laws' Jacobians in Ŵ:
/// σ_c(‖Λ‖² + η_c) for the critic, σ_a(‖S_a‖² + η_a) for the actor.
double learning_stiffness(const StepSignals& s, const SimConfig& config);

/// Validates `config` (throws ConfigError) and integrates to t_end, logging
/// every step. Violations and divergence end the run with a failure report.
RunResult run(const SimConfig& config);

struct LyapunovEntry {
    double V1 = 0, Vr = 0, Vc = 0, Va = 0, V = 0;
    bool nonnegative = true;
    bool finite = true;
};

/// V1 from the barrier, V_r = V1 + ½Z2ᵀM Z2, V_c = ‖Ŵc‖²/(2σ_c),
/// V_a = ½‖Ŵa‖². Estimated weights stand in for the weight errors.
LyapunovEntry lyapunov_diagnostics(const SimRow& row, const SimConfig& config);

/// Run-level constants of the decay bound V̇ ≤ −ι₁V + ι₂.
struct LyapunovSummary {
    double mu1 = 0, mu2 = 0;     // eigenvalue bounds of M
    double sc_lower = 0;         // min ‖S_c‖² along the run
    double sc_upper = 0;         // k_c
    double sa_upper = 0;         // k_a
    std::array<double, 4> iota1_terms{};
    double iota1 = 0;
    // ι₂ with the ideal-weight bounds replaced by the largest observed
    // ‖Ŵ‖² and the critic residual bound omitted.
    double iota2_proxy = 0;
    double max_V = 0;
};

LyapunovSummary lyapunov_summary(const SimLog& log, const SimConfig& config);

struct Violation {
    double t = 0;
    int joint = 0;
    bool transformed = false;  // |Z1γ| ≥ k_c rather than |Z1| ≥ k_c after Tc
    double error = 0, bound = 0;
};

std::vector<Violation> constraint_monitor(const SimLog& log, double Tc);

/// Last time at which joint i had |Z1_i| ≥ k_c,i, or nullopt if it never did.
std::array<std::optional<double>, 2> last_raw_violation(const SimLog& log);

struct EnergyProfile {
    double low_mean = 0, high_mean = 0;  // mean |barrier term|
    std::size_t low_count = 0, high_count = 0;
};

/// Mean |γ Z1γ_i / (β(k_c,i² − Z1γ_i²))| over samples with |Z1γ_i| < low·k_c,i
/// and over samples with |Z1γ_i| > high·k_c,i, pooled over joints.
EnergyProfile energy_profile(const SimLog& log, const SimConfig& config, double low = 0.2,
                             double high = 0.8);

struct RunSummary {
    std::size_t rows = 0;
    double t_final = 0;
    std::size_t violations = 0;
    double max_wa_norm = 0, max_wc_norm = 0, max_z2_norm = 0, max_abs_tau = 0;
    double steady_window_start = 0;
    double steady_mean_z1 = 0;  // mean ‖Z1‖ over t ≥ steady_window_start
    Vec2d steady_mean_abs_z1 = Vec2d::Zero();
    bool finite = true;
};

/// Steady-state window is the last quarter of the configured horizon.
RunSummary summarize(const SimLog& log, const SimConfig& config);

// CSV log: header row, one row per step, 17 significant digits.
std::vector<std::string> csv_columns();
void write_csv(std::ostream& os, const SimLog& log);
SimLog read_csv(std::istream& is);

void write_failure_report(std::ostream& os, const FailureReport& report);

}  // namespace defcon
