#pragma once

// Property suites run by `defcon --suite verify`. Each returns one named
// result; tolerances and sample counts come from SimConfig::verify.

#include <functional>
#include <string>
#include <vector>

#include "defcon/sim.hpp"

namespace defcon {

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Λ(S_c, ∇S_c, Ż_c, ψ); swappable so tests can inject a faulty one.
using LambdaFn =
    std::function<VecXd(const VecXd& Sc, const MatXd& grad_Sc, const VecXd& Zc_dot, double psi)>;

LambdaFn default_lambda();

PropertyResult check_shift(const SimConfig& config);
PropertyResult check_barrier_margin(const SimConfig& config);
PropertyResult check_skew_symmetry(const SimConfig& config);
PropertyResult check_gravity(const SimConfig& config);
PropertyResult check_dynamics_residual(const SimConfig& config);
PropertyResult check_rbf_gradient(const SimConfig& config);
PropertyResult check_rk4_order(const SimConfig& config);
/// Compares td_error(r, Ŵc, Λ) built from `lambda` against δ expanded from
/// its definition, on random critic inputs.
PropertyResult check_td_consistency(const SimConfig& config, const LambdaFn& lambda = default_lambda());
/// With Λ = 0 and S_a = 0 both weight laws reduce to pure decay.
PropertyResult check_weight_damping(const SimConfig& config);

std::vector<PropertyResult> run_property_suites(const SimConfig& config,
                                                const LambdaFn& lambda = default_lambda());

}  // namespace defcon
