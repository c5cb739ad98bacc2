#include "defcon/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "defcon/integrator.hpp"

namespace defcon {
namespace {

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

PropertyResult result(std::string name, bool passed, std::string detail) {
    return {std::move(name), passed, std::move(detail)};
}

struct Sampler {
    std::mt19937_64 rng;
    explicit Sampler(unsigned seed) : rng(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    Vec2d vec2(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi)}; }
    /// A point near the diagonal of the center lattice so the basis is not
    /// vanishingly small.
    VecXd near_diagonal(int dim, double lo, double hi) {
        const double c = uniform(lo, hi);
        VecXd z(dim);
        for (int j = 0; j < dim; ++j) z(j) = c + uniform(-1, 1);
        return z;
    }
};

constexpr double kPi = std::numbers::pi;

}  // namespace

LambdaFn default_lambda() {
    return [](const VecXd& Sc, const MatXd& grad, const VecXd& Zc_dot, double psi) {
        return lambda_vector(Sc, grad, Zc_dot, psi);
    };
}

PropertyResult check_shift(const SimConfig& config) {
    const double tol = config.verify.shift_tol;
    const int n = config.verify.samples;
    std::vector<double> horizons = {0.5, 1.0, 10.0};
    if (std::find(horizons.begin(), horizons.end(), config.constraint.Tc) == horizons.end())
        horizons.push_back(config.constraint.Tc);

    for (double Tc : horizons) {
        const auto start = shift(0.0, Tc);
        const auto end = shift(Tc, Tc);
        if (std::abs(start.gamma) > tol)
            return result("shift", false, fmt("gamma(0) = %.3g for Tc = %g", start.gamma, Tc));
        if (std::abs(end.gamma - 1) > tol || std::abs(end.gamma_dot) > tol)
            return result("shift", false, fmt("gamma(Tc) = %.17g, rate %.3g for Tc = %g", end.gamma,
                                              end.gamma_dot, Tc));
        // Left limit of the rate at Tc must meet the zero right limit.
        const auto left = shift(Tc * (1 - 1e-9), Tc);
        if (std::abs(left.gamma_dot) > tol)
            return result("shift", false, fmt("rate jumps at Tc = %g: %.3g", Tc, left.gamma_dot));
        double prev = start.gamma;
        for (int i = 1; i <= n; ++i) {
            const double t = Tc * double(i) / double(n);
            const auto s = shift(t, Tc);
            if (!(s.gamma > prev))
                return result("shift", false, fmt("not increasing at t = %.17g (Tc = %g)", t, Tc));
            if (s.gamma_dot > 3 / Tc + tol)
                return result("shift", false, fmt("rate %.17g exceeds 3/Tc at t = %g", s.gamma_dot, t));
            prev = s.gamma;
        }
    }
    return result("shift", true,
                  fmt("%zu horizons x %d points: endpoints, monotonicity, rate bound and continuity hold",
                      horizons.size(), n));
}

PropertyResult check_barrier_margin(const SimConfig& config) {
    const int n = config.verify.samples;
    double worst = std::numeric_limits<double>::infinity();
    double worst_xi = 0, worst_k = 0, worst_beta = 0;
    for (double k : {0.1, 0.5, 1.0, 5.0})
        for (double beta : {1.0, 10.0, 100.0})
            for (int i = 0; i < n; ++i) {
                const double xi = 0.999 * k * (-1 + 2 * double(i) / double(n - 1));
                const double m = barrier_margin(xi, k, beta);
                if (m < worst) {
                    worst = m;
                    worst_xi = xi;
                    worst_k = k;
                    worst_beta = beta;
                }
            }
    const bool ok = worst >= -config.verify.barrier_tol;
    return result("barrier_margin", ok,
                  fmt("min margin %.3g at xi = %.6g, k = %g, beta = %g over %d points", worst, worst_xi,
                      worst_k, worst_beta, 12 * n));
}

PropertyResult check_skew_symmetry(const SimConfig& config) {
    const auto& p = config.plant;
    Sampler rng(config.verify.seed);
    const auto [mu1, mu2] = inertia_eigen_bounds(p);
    double worst_skew = 0, min_eig = std::numeric_limits<double>::infinity(), max_eig = 0;
    for (int i = 0; i < config.verify.samples; ++i) {
        const Vec2d q = rng.vec2(-kPi, kPi);
        const Vec2d qdot = rng.vec2(-5, 5);
        // Ṁ = (∂M/∂q) q̇ as a central difference along q̇.
        const double h = 1e-6;
        const Mat2d Mdot =
            (inertia_matrix(p, Vec2d(q + h * qdot)) - inertia_matrix(p, Vec2d(q - h * qdot))) / (2 * h);
        const Mat2d N = Mdot - 2 * coriolis_matrix(p, q, qdot);
        worst_skew = std::max(worst_skew, (N + N.transpose()).cwiseAbs().maxCoeff());
        const Eigen::SelfAdjointEigenSolver<Mat2d> es(inertia_matrix(p, q), Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues()(0));
        max_eig = std::max(max_eig, es.eigenvalues()(1));
    }
    const double band = 1e-9 * mu2;
    const bool ok = worst_skew <= config.verify.skew_tol && min_eig > 0 && min_eig >= mu1 - band &&
                    max_eig <= mu2 + band;
    return result("skew_symmetry", ok,
                  fmt("max |N + N^T| = %.3g (tol %.3g), eig(M) in [%.6g, %.6g], mu = [%.6g, %.6g]",
                      worst_skew, config.verify.skew_tol, min_eig, max_eig, mu1, mu2));
}

PropertyResult check_gravity(const SimConfig& config) {
    const auto& p = config.plant;
    Sampler rng(config.verify.seed + 1);
    double worst = 0;
    const double h = 1e-5;
    for (int i = 0; i < config.verify.samples; ++i) {
        const Vec2d q = rng.vec2(-kPi, kPi);
        Vec2d fd;
        for (int j = 0; j < 2; ++j) {
            const Vec2d e = Vec2d::Unit(j) * h;
            fd(j) = (potential_energy(p, Vec2d(q + e)) - potential_energy(p, Vec2d(q - e))) / (2 * h);
        }
        const Vec2d G = gravity_vector(p, q);
        worst = std::max(worst, (fd - G).norm() / std::max(1.0, G.norm()));
    }
    return result("gravity_gradient", worst <= config.verify.gravity_rel_tol,
                  fmt("max relative error %.3g (tol %.3g)", worst, config.verify.gravity_rel_tol));
}

PropertyResult check_dynamics_residual(const SimConfig& config) {
    const auto& p = config.plant;
    Sampler rng(config.verify.seed + 2);
    double worst = 0;
    for (int i = 0; i < config.verify.samples; ++i) {
        JointState<> s{rng.vec2(-kPi, kPi), rng.vec2(-5, 5)};
        const Vec2d tau = rng.vec2(-50, 50), d = rng.vec2(-1, 1);
        const Vec2d qddot = forward_dynamics(p, s, tau, d);
        const Vec2d Cq = coriolis_matrix(p, s.q, s.qdot) * s.qdot;
        const Vec2d G = gravity_vector(p, s.q);
        const Vec2d res = inertia_matrix(p, s.q) * qddot + Cq + G - tau - d;
        const double scale = 1 + tau.norm() + d.norm() + Cq.norm() + G.norm();
        worst = std::max(worst, res.norm() / scale);
    }
    return result("dynamics_residual", worst <= config.verify.dynamics_residual_tol,
                  fmt("max scaled residual %.3g (tol %.3g)", worst, config.verify.dynamics_residual_tol));
}

PropertyResult check_rbf_gradient(const SimConfig& config) {
    Sampler rng(config.verify.seed + 3);
    const double h = 1e-6;
    double worst = 0;
    int count = 0;
    const std::pair<const RbfShape<>*, int> layers[] = {{&config.actor_rbf, kActorInputs},
                                                        {&config.critic_rbf, kCriticInputs}};
    for (const auto& [shape, dim] : layers) {
        const RbfNetwork<> net = make_diagonal_network(*shape, dim, 1);
        for (int i = 0; i < config.verify.rbf_grad_samples; ++i, ++count) {
            const VecXd Z = rng.near_diagonal(dim, shape->center_min, shape->center_max);
            const MatXd J = basis_jacobian(net, Z);
            MatXd fd(J.rows(), J.cols());
            for (int j = 0; j < dim; ++j) {
                VecXd up = Z, down = Z;
                up(j) += h;
                down(j) -= h;
                fd.col(j) = (basis(net, up) - basis(net, down)) / (2 * h);
            }
            const double denom = std::max(J.norm(), std::numeric_limits<double>::min());
            worst = std::max(worst, (fd - J).norm() / denom);
        }
    }
    return result("rbf_gradient", worst <= config.verify.rbf_grad_rel_tol,
                  fmt("max relative error %.3g over %d inputs (tol %.3g)", worst, count,
                      config.verify.rbf_grad_rel_tol));
}

PropertyResult check_rk4_order(const SimConfig& config) {
    const auto f = [](const Eigen::Matrix<double, 1, 1>& x, double) { return Eigen::Matrix<double, 1, 1>(-x); };
    const auto global_error = [&](double dt) {
        Eigen::Matrix<double, 1, 1> x(1.0);
        const int steps = int(std::lround(1.0 / dt));
        for (int i = 0; i < steps; ++i) x = rk4_step(f, x, double(i) * dt, dt);
        return std::abs(x(0) - std::exp(-1.0));
    };
    const double e1 = global_error(0.1), e2 = global_error(0.05);
    const double ratio = e1 / e2;
    const bool ok = ratio >= config.verify.rk4_ratio_min && ratio <= config.verify.rk4_ratio_max;
    return result("rk4_order", ok,
                  fmt("error(0.1) = %.3g, error(0.05) = %.3g, ratio %.4g (band [%g, %g])", e1, e2, ratio,
                      config.verify.rk4_ratio_min, config.verify.rk4_ratio_max));
}

PropertyResult check_td_consistency(const SimConfig& config, const LambdaFn& lambda) {
    Sampler rng(config.verify.seed + 4);
    const RbfNetwork<> net = make_diagonal_network(config.critic_rbf, kCriticInputs, 1);
    const double psi = config.critic.psi;
    double worst = 0;
    const int n = std::min(config.verify.samples, 1000);
    for (int i = 0; i < n; ++i) {
        const VecXd Zc = rng.near_diagonal(kCriticInputs, -2, 2);
        VecXd Zc_dot(kCriticInputs), Wc(net.neurons());
        for (auto& v : Zc_dot) v = rng.uniform(-3, 3);
        for (auto& v : Wc) v = rng.uniform(-1, 1);
        const double r = rng.uniform(0, 10);
        const VecXd Sc = basis(net, Zc);
        const MatXd grad = basis_jacobian(net, Zc);

        const double delta = td_error(r, Wc, lambda(Sc, grad, Zc_dot, psi));
        // δ = r − V̂/ψ + dV̂/dt with V̂ = Ŵcᵀ S_c and dV̂/dt = Ŵcᵀ ∇S_c Ż_c.
        double expected = r - Wc.dot(Sc) / psi;
        for (int t = 0; t < net.neurons(); ++t) expected += Wc(t) * grad.row(t).dot(Zc_dot);
        worst = std::max(worst, std::abs(delta - expected) / (1 + std::abs(expected)));
    }
    return result("td_consistency", worst <= config.verify.td_tol,
                  fmt("max scaled mismatch %.3g over %d samples (tol %.3g)", worst, n, config.verify.td_tol));
}

PropertyResult check_weight_damping(const SimConfig& config) {
    Sampler rng(config.verify.seed + 5);
    const int kc = config.critic_rbf.neurons, ka = config.actor_rbf.neurons;
    VecXd Wc(kc);
    MatXd Wa(ka, 2);
    for (auto& v : Wc) v = rng.uniform(-1, 1);
    for (auto& v : Wa.reshaped()) v = rng.uniform(-1, 1);
    const double r = rng.uniform(0, 10);

    const VecXd critic = critic_rate(Wc, r, VecXd(VecXd::Zero(kc)), config.critic);
    const VecXd critic_expected = -config.critic.sigma * config.critic.eta * Wc;
    const MatXd actor = actor_rate(Wa, VecXd(VecXd::Zero(ka)), rng.vec2(-1, 1), rng.uniform(-1, 1), config.actor);
    const MatXd actor_expected = -config.actor.sigma * config.actor.eta * Wa;
    const double err = std::max((critic - critic_expected).cwiseAbs().maxCoeff(),
                                (actor - actor_expected).cwiseAbs().maxCoeff());
    return result("weight_damping", err <= 1e-15 * (1 + critic_expected.norm() + actor_expected.norm()),
                  fmt("max deviation from pure decay %.3g", err));
}

std::vector<PropertyResult> run_property_suites(const SimConfig& config, const LambdaFn& lambda) {
    return {check_shift(config),          check_barrier_margin(config), check_skew_symmetry(config),
            check_gravity(config),        check_dynamics_residual(config), check_rbf_gradient(config),
            check_rk4_order(config),      check_td_consistency(config, lambda),
            check_weight_damping(config)};
}

}  // namespace defcon
