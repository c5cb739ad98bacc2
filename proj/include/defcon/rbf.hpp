#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "defcon/errors.hpp"

namespace defcon {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Neuron count, center range and width of a Gaussian RBF layer.
template <typename Scalar = double>
struct RbfShape {
    int neurons = 10;
    Scalar center_min = -5;
    Scalar center_max = 5;
    Scalar width = 1;

    void validate(const char* name) const {
        if (neurons < 1) throw ConfigError(std::string(name) + ": neuron count must be >= 1");
        if (!(width > 0)) throw ConfigError(std::string(name) + ": width must be positive");
        if (!(center_min <= center_max))
            throw ConfigError(std::string(name) + ": center_min must not exceed center_max");
    }

    bool operator==(const RbfShape&) const = default;
};

/// Gaussian RBF layer: S_t(Z) = exp(−‖Z − μ_t‖² / η²), output Ŵᵀ S(Z).
/// centers is k×p (one row per neuron), weights is k×m.
template <typename Scalar = double>
struct RbfNetwork {
    MatX<Scalar> centers;
    Scalar width = 1;
    MatX<Scalar> weights;

    int neurons() const { return int(centers.rows()); }
    int inputs() const { return int(centers.cols()); }
    int outputs() const { return int(weights.cols()); }
};

/// k neurons with centers on the diagonal of the input hypercube: center t
/// has every coordinate equal to the t-th of k evenly spaced values in
/// [center_min, center_max]. Weights start at zero.
template <typename Scalar>
RbfNetwork<Scalar> make_diagonal_network(const RbfShape<Scalar>& shape, int inputs, int outputs) {
    shape.validate("rbf");
    RbfNetwork<Scalar> net;
    net.width = shape.width;
    VecX<Scalar> levels = VecX<Scalar>::Constant(1, (shape.center_min + shape.center_max) / 2);
    if (shape.neurons > 1)
        levels = VecX<Scalar>::LinSpaced(shape.neurons, shape.center_min, shape.center_max);
    net.centers = levels.replicate(1, inputs);
    net.weights = MatX<Scalar>::Zero(shape.neurons, outputs);
    return net;
}

template <typename Scalar, typename Derived>
VecX<Scalar> basis(const RbfNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& Z) {
    const Scalar inv_w2 = Scalar(1) / (net.width * net.width);
    return (-(net.centers.rowwise() - Z.transpose()).rowwise().squaredNorm() * inv_w2)
        .array()
        .exp()
        .matrix();
}

/// ∂S/∂Z, k×p; row t is −(2/η²) S_t (Z − μ_t)ᵀ.
template <typename Scalar, typename Derived>
MatX<Scalar> basis_jacobian(const RbfNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& Z) {
    const VecX<Scalar> S = basis(net, Z);
    const MatX<Scalar> offsets = (-net.centers).rowwise() + Z.transpose();
    return (Scalar(-2) / (net.width * net.width)) * (S.asDiagonal() * offsets);
}

template <typename Scalar, typename Derived>
VecX<Scalar> output(const RbfNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& Z) {
    return net.weights.transpose() * basis(net, Z);
}

}  // namespace defcon
