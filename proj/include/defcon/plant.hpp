#pragma once

// Two-link rigid arm in the vertical plane.
//
// q1 is measured from the downward vertical and q2 relative to link 1, so
// q = 0 is the hanging equilibrium. All quantities are templated on the
// scalar type; the simulator instantiates them with double.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "defcon/errors.hpp"

namespace defcon {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar = double>
struct ManipulatorParams {
    Scalar m1 = 1, m2 = 1;
    Scalar l1 = 0.5, l2 = 0.5;
    Scalar lc1 = 0.25, lc2 = 0.25;
    Scalar I1 = Scalar(1) / 48, I2 = Scalar(1) / 48;  // m l² / 12 for uniform rods
    Scalar g = 9.81;

    /// Uniform rods of the given masses and lengths.
    static ManipulatorParams uniform_rods(Scalar m1, Scalar m2, Scalar l1, Scalar l2,
                                          Scalar g = 9.81) {
        return {m1, m2, l1, l2, l1 / 2, l2 / 2, m1 * l1 * l1 / 12, m2 * l2 * l2 / 12, g};
    }

    void validate() const {
        if (!(m1 > 0 && m2 > 0)) throw ConfigError("plant: masses must be positive");
        if (!(l1 > 0 && l2 > 0)) throw ConfigError("plant: lengths must be positive");
        if (!(lc1 > 0 && lc2 > 0)) throw ConfigError("plant: centre-of-mass distances must be positive");
        if (!(I1 > 0 && I2 > 0)) throw ConfigError("plant: inertias must be positive");
        if (!(lc1 <= l1 && lc2 <= l2)) throw ConfigError("plant: lc_i must not exceed l_i");
        if (!(g >= 0)) throw ConfigError("plant: g must be nonnegative");
    }

    bool operator==(const ManipulatorParams&) const = default;
};

template <typename Scalar = double>
struct JointState {
    Vec2<Scalar> q = Vec2<Scalar>::Zero();
    Vec2<Scalar> qdot = Vec2<Scalar>::Zero();

    bool all_finite() const { return q.allFinite() && qdot.allFinite(); }
    bool operator==(const JointState&) const = default;
};

enum class DisturbanceMode { zero, sinusoidal };

template <typename Scalar = double>
struct DisturbanceSpec {
    DisturbanceMode mode = DisturbanceMode::zero;
    Vec2<Scalar> amplitude = Vec2<Scalar>::Zero();
    Scalar frequency = 1;

    void validate() const {
        if (!(amplitude.array() >= 0).all())
            throw ConfigError("disturbance: amplitudes must be nonnegative");
        if (!std::isfinite(frequency)) throw ConfigError("disturbance: frequency must be finite");
    }

    bool operator==(const DisturbanceSpec&) const = default;
};

// Terms shared by M and C. M depends on q2 only.
namespace detail {
template <typename Scalar>
struct InertiaCoefficients {
    Scalar a;  // constant part of M11
    Scalar b;  // coefficient of cos q2
    Scalar c;  // M22
};

template <typename Scalar>
InertiaCoefficients<Scalar> inertia_coefficients(const ManipulatorParams<Scalar>& p) {
    return {p.m1 * p.lc1 * p.lc1 + p.I1 + p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2) + p.I2,
            p.m2 * p.l1 * p.lc2, p.m2 * p.lc2 * p.lc2 + p.I2};
}
}  // namespace detail

template <typename Scalar>
Mat2<Scalar> inertia_matrix(const ManipulatorParams<Scalar>& p, const Vec2<Scalar>& q) {
    const auto k = detail::inertia_coefficients(p);
    using std::cos;
    const Scalar c2 = cos(q(1));
    Mat2<Scalar> M;
    M(0, 0) = k.a + 2 * k.b * c2;
    M(0, 1) = k.c + k.b * c2;
    M(1, 0) = M(0, 1);
    M(1, 1) = k.c;
    return M;
}

/// Coriolis/centrifugal matrix from the Christoffel symbols of M, so that
/// Ṁ − 2C is skew-symmetric.
template <typename Scalar>
Mat2<Scalar> coriolis_matrix(const ManipulatorParams<Scalar>& p, const Vec2<Scalar>& q,
                             const Vec2<Scalar>& qdot) {
    const auto k = detail::inertia_coefficients(p);
    using std::sin;
    // h = -∂M12/∂q2 = -(1/2)∂M11/∂q2; the only nonzero derivatives of M.
    const Scalar h = -k.b * sin(q(1));
    Mat2<Scalar> C;
    C(0, 0) = h * qdot(1);
    C(0, 1) = h * (qdot(0) + qdot(1));
    C(1, 0) = -h * qdot(0);
    C(1, 1) = 0;
    return C;
}

template <typename Scalar>
Scalar potential_energy(const ManipulatorParams<Scalar>& p, const Vec2<Scalar>& q) {
    using std::cos;
    return -p.g * (p.m1 * p.lc1 * cos(q(0)) + p.m2 * (p.l1 * cos(q(0)) + p.lc2 * cos(q(0) + q(1))));
}

template <typename Scalar>
Vec2<Scalar> gravity_vector(const ManipulatorParams<Scalar>& p, const Vec2<Scalar>& q) {
    using std::sin;
    const Scalar s12 = sin(q(0) + q(1));
    return Vec2<Scalar>(p.g * ((p.m1 * p.lc1 + p.m2 * p.l1) * sin(q(0)) + p.m2 * p.lc2 * s12),
                        p.g * p.m2 * p.lc2 * s12);
}

/// q̈ = M⁻¹(τ + d − C q̇ − G). Throws if M is numerically singular, which
/// only happens with invalid parameters.
template <typename Scalar>
Vec2<Scalar> forward_dynamics(const ManipulatorParams<Scalar>& p, const JointState<Scalar>& s,
                              const Vec2<Scalar>& tau, const Vec2<Scalar>& d) {
    const Mat2<Scalar> M = inertia_matrix(p, s.q);
    const Vec2<Scalar> rhs = tau + d - coriolis_matrix(p, s.q, s.qdot) * s.qdot - gravity_vector(p, s.q);
    const Eigen::LLT<Mat2<Scalar>> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("forward_dynamics: inertia matrix is not positive definite");
    return llt.solve(rhs);
}

template <typename Scalar>
Vec2<Scalar> disturbance(const DisturbanceSpec<Scalar>& spec, Scalar t) {
    if (spec.mode == DisturbanceMode::zero) return Vec2<Scalar>::Zero();
    using std::sin;
    return spec.amplitude * sin(spec.frequency * t);
}

/// Eigenvalue bounds μ₁ ≤ λ(M(q)) ≤ μ₂ over all q, from a dense sweep of q2
/// over one period (M does not depend on q1).
template <typename Scalar>
std::pair<Scalar, Scalar> inertia_eigen_bounds(const ManipulatorParams<Scalar>& p,
                                               int samples = 4096) {
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    Scalar hi = 0;
    for (int i = 0; i <= samples; ++i) {
        const Scalar q2 = 2 * std::numbers::pi_v<Scalar> * Scalar(i) / Scalar(samples);
        const Eigen::SelfAdjointEigenSolver<Mat2<Scalar>> es(
            inertia_matrix(p, Vec2<Scalar>(Scalar(0), q2)), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues()(0));
        hi = std::max(hi, es.eigenvalues()(1));
    }
    return {lo, hi};
}

}  // namespace defcon
