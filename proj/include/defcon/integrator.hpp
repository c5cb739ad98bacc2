#pragma once

#include <Eigen/Dense>

namespace defcon {

/// One classical Runge–Kutta step of ẋ = f(x, t).
template <typename F, typename Derived>
typename Derived::PlainObject rk4_step(F&& f, const Eigen::MatrixBase<Derived>& x,
                                       typename Derived::Scalar t, typename Derived::Scalar dt) {
    using State = typename Derived::PlainObject;
    const State k1 = f(State(x), t);
    const State k2 = f(State(x + (dt / 2) * k1), t + dt / 2);
    const State k3 = f(State(x + (dt / 2) * k2), t + dt / 2);
    const State k4 = f(State(x + dt * k3), t + dt);
    return x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace defcon
