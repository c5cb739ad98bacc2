#pragma once

// Critic TD error and the actor/critic weight adaptation laws.

#include <string>

#include <Eigen/Dense>

#include "defcon/errors.hpp"
#include "defcon/rbf.hpp"

namespace defcon {

template <typename Scalar = double>
struct CriticConfig {
    Scalar sigma = 50;  // σ_c
    Scalar eta = 0.5;   // η_c
    Scalar psi = 1;     // ψ (s)
    Eigen::Matrix<Scalar, 4, 4> Q = Eigen::Matrix<Scalar, 4, 4>::Identity();
    Eigen::Matrix<Scalar, 2, 2> R = Eigen::Matrix<Scalar, 2, 2>::Identity() * Scalar(0.01);

    void validate() const {
        if (!(sigma > 0)) throw ConfigError("critic: sigma must be positive");
        if (!(eta > 0)) throw ConfigError("critic: eta must be positive");
        if (!(psi > 0)) throw ConfigError("critic: psi must be positive");
        check_psd(Q, "critic: Q");
        check_psd(R, "critic: R");
    }

    bool operator==(const CriticConfig&) const = default;

private:
    template <typename M>
    static void check_psd(const M& m, const std::string& name) {
        if (!m.allFinite() || !m.isApprox(m.transpose(), Scalar(0)))
            throw ConfigError(name + " must be symmetric");
        const Eigen::SelfAdjointEigenSolver<M> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -Scalar(1e-12))
            throw ConfigError(name + " must be positive semidefinite");
    }
};

template <typename Scalar = double>
struct ActorConfig {
    Scalar sigma = 50;   // σ_a
    Scalar eta = 0.01;   // η_a
    Scalar ka = 0.01;    // k_a, critic coupling

    void validate() const {
        if (!(sigma > 0)) throw ConfigError("actor: sigma must be positive");
        if (!(eta > 0)) throw ConfigError("actor: eta must be positive");
        if (!(ka > 0)) throw ConfigError("actor: ka must be positive");
    }

    bool operator==(const ActorConfig&) const = default;
};

/// η_c > 2 σ_a k_a² S̄_c with S̄_c = k (each Gaussian is at most 1).
template <typename Scalar>
void validate_learning_stability(const CriticConfig<Scalar>& critic, const ActorConfig<Scalar>& actor,
                                 int critic_neurons) {
    const Scalar rhs = 2 * actor.sigma * actor.ka * actor.ka * Scalar(critic_neurons);
    if (!(critic.eta > rhs))
        throw ConfigError("learning: stability condition eta_c > 2 sigma_a ka^2 k_c violated (" +
                          std::to_string(double(critic.eta)) + " <= " + std::to_string(double(rhs)) + ")");
}

template <typename Scalar = double>
struct LearningState {
    VecX<Scalar> Wc;  // k_c × 1
    MatX<Scalar> Wa;  // k_a × n
};

/// r = ZᵀQZ + τᵀRτ
template <typename Scalar, typename DZ, typename DQ, typename DT, typename DR>
Scalar instantaneous_cost(const Eigen::MatrixBase<DZ>& Z, const Eigen::MatrixBase<DT>& tau,
                          const Eigen::MatrixBase<DQ>& Q, const Eigen::MatrixBase<DR>& R) {
    return Scalar(Z.dot(Q * Z) + tau.dot(R * tau));
}

template <typename Scalar>
Scalar critic_value(const VecX<Scalar>& Wc, const VecX<Scalar>& Sc) {
    return Wc.dot(Sc);
}

/// Λ = −S_c/ψ + ∇S_c Ż_c
template <typename Scalar, typename DZ>
VecX<Scalar> lambda_vector(const VecX<Scalar>& Sc, const MatX<Scalar>& grad_Sc,
                           const Eigen::MatrixBase<DZ>& Zc_dot, Scalar psi) {
    return -Sc / psi + grad_Sc * Zc_dot;
}

/// δ = r + Ŵ_cᵀΛ
template <typename Scalar>
Scalar td_error(Scalar r, const VecX<Scalar>& Wc, const VecX<Scalar>& Lambda) {
    return r + Wc.dot(Lambda);
}

/// Ẇ_c = −σ_c (r + Ŵ_cᵀΛ) Λ − σ_c η_c Ŵ_c
template <typename Scalar>
VecX<Scalar> critic_rate(const VecX<Scalar>& Wc, Scalar r, const VecX<Scalar>& Lambda,
                         const CriticConfig<Scalar>& cfg) {
    return -cfg.sigma * td_error(r, Wc, Lambda) * Lambda - cfg.sigma * cfg.eta * Wc;
}

/// Column i: −σ_a (Ŵ_a,iᵀS_a + Z2_i/σ_a + k_a Ĵ) S_a − σ_a η_a Ŵ_a,i.
/// The scalar k_a Ĵ is broadcast to every joint.
template <typename Scalar, typename DZ>
MatX<Scalar> actor_rate(const MatX<Scalar>& Wa, const VecX<Scalar>& Sa,
                        const Eigen::MatrixBase<DZ>& Z2, Scalar J_hat, const ActorConfig<Scalar>& cfg) {
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> integrated =
        (Wa.transpose() * Sa + Z2 / cfg.sigma).transpose().array() + cfg.ka * J_hat;
    return -cfg.sigma * Sa * integrated - cfg.sigma * cfg.eta * Wa;
}

}  // namespace defcon
