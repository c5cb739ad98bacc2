#pragma once

// Backstepping errors, the virtual control α and the torque law τ.

#include "defcon/constraint.hpp"
#include "defcon/errors.hpp"
#include "defcon/plant.hpp"

namespace defcon {

template <typename Scalar = double>
struct ControllerConfig {
    Scalar K1 = 15;
    Scalar K2 = 15;  // K2·I
    Scalar a = 1;    // Young's-inequality weight in α

    void validate() const {
        if (!(K1 > 1)) throw ConfigError("control: K1 must be greater than 1");
        if (!(K2 > 0.5)) throw ConfigError("control: K2 - I/2 must be positive definite (K2 > 0.5)");
        if (!(a > 0)) throw ConfigError("control: a must be positive");
    }

    bool operator==(const ControllerConfig&) const = default;
};

template <typename Scalar = double>
struct ErrorPair {
    Vec2<Scalar> Z1;       // q − q_d
    Vec2<Scalar> Z2;       // q̇ − α
    Vec2<Scalar> Z1gamma;  // γ Z1
};

template <typename Scalar>
ErrorPair<Scalar> compute_errors(const Vec2<Scalar>& q, const Vec2<Scalar>& qdot,
                                 const Vec2<Scalar>& qd, const Vec2<Scalar>& alpha, Scalar gamma) {
    ErrorPair<Scalar> e;
    e.Z1 = q - qd;
    e.Z2 = qdot - alpha;
    e.Z1gamma = transformed_error(gamma, e.Z1);
    return e;
}

/// α_i = −K1 Z1_i − a γ̇² Z1_i ‖Z1‖² / (β(k_c,i² − Z1γ_i²)) + q̇_d,i + (k̇_c,i / k_c,i) Z1_i
template <typename Scalar>
Vec2<Scalar> virtual_control(const Vec2<Scalar>& Z1, const Vec2<Scalar>& Z1gamma, Scalar gamma_dot,
                             const Vec2<Scalar>& kc, const Vec2<Scalar>& kc_dot,
                             const Vec2<Scalar>& qd_dot, const ControllerConfig<Scalar>& cfg,
                             Scalar beta, BoundMode mode = BoundMode::per_joint) {
    const Vec2<Scalar> gap = barrier_gaps(Z1gamma, kc, mode);
    const Scalar robust = cfg.a * gamma_dot * gamma_dot * Z1.squaredNorm() / beta;
    return (-cfg.K1 * Z1.array() - robust * Z1.array() / gap.array() + qd_dot.array() +
            (kc_dot.array() / kc.array()) * Z1.array())
        .matrix();
}

/// γ Z1γ_i / (β(k_c,i² − Z1γ_i²)), the barrier part of the torque (entered
/// with a minus sign).
template <typename Scalar>
Vec2<Scalar> torque_barrier(const Vec2<Scalar>& Z1gamma, Scalar gamma, const Vec2<Scalar>& kc,
                            Scalar beta, BoundMode mode = BoundMode::per_joint) {
    const Vec2<Scalar> gap = barrier_gaps(Z1gamma, kc, mode);
    return (gamma * Z1gamma.array() / (beta * gap.array())).matrix();
}

/// τ = Ŵaᵀ S_a − K2 Z2 − γ Z1γ / (β(k_c² − Z1γ²))
template <typename Scalar>
Vec2<Scalar> torque(const Vec2<Scalar>& actor_output, const Vec2<Scalar>& Z2,
                    const Vec2<Scalar>& Z1gamma, Scalar gamma, const Vec2<Scalar>& kc,
                    const ControllerConfig<Scalar>& cfg, Scalar beta,
                    BoundMode mode = BoundMode::per_joint) {
    return actor_output - cfg.K2 * Z2 - torque_barrier(Z1gamma, gamma, kc, beta, mode);
}

}  // namespace defcon
