#pragma once

// Deferred time-varying error constraints: the cubic shifting function γ(t),
// the per-joint bounds k_c,i(t), and the smooth zone barrier
//     V(z) = (1/2β) ln(k² / (k² − z²))
// together with the feedback term γ z / (β (k² − z²)) it induces.

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "defcon/errors.hpp"
#include "defcon/plant.hpp"
#include "defcon/signal.hpp"

namespace defcon {

/// Runs abort once k² − z² drops below this.
inline constexpr double kBarrierGuard = 1e-9;

template <typename Scalar = double>
struct ShiftSample {
    Scalar gamma = 0;
    Scalar gamma_dot = 0;
};

template <typename Scalar>
ShiftSample<Scalar> shift(Scalar t, Scalar Tc) {
    if (!(Tc > 0)) throw ConfigError("shift: Tc must be positive");
    if (t >= Tc) return {Scalar(1), Scalar(0)};
    const Scalar u = (Tc - t) / Tc;
    return {1 - u * u * u, 3 * u * u / Tc};
}

/// Per-joint barriers (each joint against its own k_c,i) or a single barrier
/// on ‖Z1γ‖ against min_i k_c,i.
enum class BoundMode { per_joint, scalar_min };

/// Bounds given directly on the error, or derived as the distance from q_d to
/// position limits k̲_i(t) < q_i < k̄_i(t).
enum class BoundSource { direct, position };

template <typename Scalar = double>
struct ConstraintSpec {
    BoundMode mode = BoundMode::per_joint;
    BoundSource source = BoundSource::direct;
    std::array<Harmonic<Scalar>, 2> error_bound = {Harmonic<Scalar>::sine(0.5, 0.1, 0.5),
                                                   Harmonic<Scalar>::cosine(0.45, 0.1, 0.5)};
    std::array<Harmonic<Scalar>, 2> upper = {Harmonic<Scalar>::constant(1),
                                             Harmonic<Scalar>::constant(1)};
    std::array<Harmonic<Scalar>, 2> lower = {Harmonic<Scalar>::constant(-1),
                                             Harmonic<Scalar>::constant(-1)};
    Scalar Tc = 2;
    Scalar beta = 10;

    void validate() const {
        if (!(Tc > 0)) throw ConfigError("constraint: Tc must be positive");
        if (!(beta > 0)) throw ConfigError("constraint: beta must be positive");
        if (source == BoundSource::direct) {
            for (int i = 0; i < 2; ++i)
                if (!(error_bound[i].infimum() > 0))
                    throw ConfigError("constraint: k_c," + std::to_string(i + 1) +
                                      "(t) is not positive for all t");
        } else {
            for (int i = 0; i < 2; ++i)
                if (!(lower[i].value(0) < upper[i].value(0)))
                    throw ConfigError("constraint: lower position bound must lie below upper bound");
        }
    }

    bool operator==(const ConstraintSpec&) const = default;
};

template <typename Scalar = double>
struct ErrorBound {
    Vec2<Scalar> kc;
    Vec2<Scalar> kc_dot;
};

/// k_c,i(t) and its analytic time derivative. `qd` and `qd_dot` are only
/// used when the bounds are derived from position limits.
template <typename Scalar>
ErrorBound<Scalar> error_bound(const ConstraintSpec<Scalar>& spec, Scalar t,
                               const Vec2<Scalar>& qd = Vec2<Scalar>::Zero(),
                               const Vec2<Scalar>& qd_dot = Vec2<Scalar>::Zero()) {
    ErrorBound<Scalar> b;
    for (int i = 0; i < 2; ++i) {
        if (spec.source == BoundSource::direct) {
            b.kc(i) = spec.error_bound[i].value(t);
            b.kc_dot(i) = spec.error_bound[i].rate(t);
        } else {
            const Scalar up = spec.upper[i].value(t) - qd(i);
            const Scalar down = qd(i) - spec.lower[i].value(t);
            if (up <= down) {
                b.kc(i) = up;
                b.kc_dot(i) = spec.upper[i].rate(t) - qd_dot(i);
            } else {
                b.kc(i) = down;
                b.kc_dot(i) = qd_dot(i) - spec.lower[i].rate(t);
            }
        }
    }
    if (spec.mode == BoundMode::scalar_min) {
        const int j = b.kc(0) <= b.kc(1) ? 0 : 1;
        b.kc.setConstant(b.kc(j));
        b.kc_dot.setConstant(b.kc_dot(j));
    }
    for (int i = 0; i < 2; ++i) {
        if (!(b.kc(i) > 0)) {
            std::ostringstream os;
            os << "constraint: k_c," << i + 1 << "(" << t << ") = " << b.kc(i)
               << " is not positive (desired trajectory outside the position bounds?)";
            throw ConfigError(os.str());
        }
    }
    return b;
}

template <typename Derived>
auto transformed_error(typename Derived::Scalar gamma, const Eigen::MatrixBase<Derived>& Z1) {
    return (gamma * Z1).eval();
}

namespace detail {
template <typename Scalar>
Scalar checked_gap(Scalar z, Scalar k, int joint) {
    using std::abs;
    const Scalar gap = k * k - z * z;
    if (!(abs(z) < k) || !(gap >= Scalar(kBarrierGuard))) {
        std::ostringstream os;
        os << "barrier violated";
        if (joint >= 0) os << " on joint " << joint + 1;
        os << ": |z| = " << abs(z) << ", k = " << k;
        throw ConstraintViolation(joint, 0.0, double(abs(z)), double(k), os.str());
    }
    return gap;
}
}  // namespace detail

/// (1/2β) ln(k² / (k² − z²)). Throws ConstraintViolation when |z| ≥ k.
template <typename Scalar>
Scalar szblf_value(Scalar z, Scalar k, Scalar beta, int joint = -1) {
    using std::log1p;
    detail::checked_gap(z, k, joint);
    // ln(k²/gap) = -ln(1 - z²/k²)
    return -log1p(-(z * z) / (k * k)) / (2 * beta);
}

/// γ z / (β (k² − z²)), the barrier's contribution to the torque (with a
/// minus sign applied by the caller).
template <typename Scalar>
Scalar barrier_term(Scalar z, Scalar k, Scalar beta, Scalar gamma, int joint = -1) {
    const Scalar gap = detail::checked_gap(z, k, joint);
    return gamma * z / (beta * gap);
}

/// ξ²/(β(k² − ξ²)) − (1/2β) ln(k²/(k² − ξ²)), nonnegative for |ξ| < k.
template <typename Scalar>
Scalar barrier_margin(Scalar xi, Scalar k, Scalar beta) {
    const Scalar gap = detail::checked_gap(xi, k, -1);
    return xi * xi / (beta * gap) - szblf_value(xi, k, beta);
}

/// Barrier denominators k² − z² per joint. In scalar-min mode both entries
/// hold k_c² − ‖Z1γ‖² (kc is already uniform there).
template <typename Scalar>
Vec2<Scalar> barrier_gaps(const Vec2<Scalar>& Z1gamma, const Vec2<Scalar>& kc, BoundMode mode) {
    if (mode == BoundMode::scalar_min) {
        const Scalar n = Z1gamma.norm();
        const int joint = std::abs(Z1gamma(0)) >= std::abs(Z1gamma(1)) ? 0 : 1;
        return Vec2<Scalar>::Constant(detail::checked_gap(n, kc(0), joint));
    }
    return Vec2<Scalar>(detail::checked_gap(Z1gamma(0), kc(0), 0),
                        detail::checked_gap(Z1gamma(1), kc(1), 1));
}

/// Barrier value V₁ summed over joints (per-joint) or on ‖Z1γ‖ (scalar-min).
template <typename Scalar>
Scalar barrier_lyapunov(const Vec2<Scalar>& Z1gamma, const Vec2<Scalar>& kc, Scalar beta,
                        BoundMode mode) {
    if (mode == BoundMode::scalar_min) return szblf_value(Z1gamma.norm(), kc(0), beta);
    return szblf_value(Z1gamma(0), kc(0), beta, 0) + szblf_value(Z1gamma(1), kc(1), beta, 1);
}

}  // namespace defcon
