#include <doctest.h>

#include "defcon/verify.hpp"

using namespace defcon;

TEST_CASE("all property suites pass on defaults") {
    for (const auto& r : run_property_suites(SimConfig{})) {
        INFO(r.name << ": " << r.detail);
        CHECK(r.passed);
    }
}

TEST_CASE("sign error in the critic signal is caught") {
    const LambdaFn flipped = [](const VecXd& Sc, const MatXd& grad, const VecXd& Zc_dot, double psi) {
        return (Sc / psi + grad * Zc_dot).eval();  // wrong sign on the discount term
    };
    const PropertyResult r = check_td_consistency(SimConfig{}, flipped);
    CHECK_FALSE(r.passed);
    CHECK(check_td_consistency(SimConfig{}).passed);
}

TEST_CASE("skew check cannot reach 1e-15 with a differenced inertia rate") {
    SimConfig c;
    c.verify.skew_tol = 1e-15;
    const PropertyResult r = check_skew_symmetry(c);
    CHECK_FALSE(r.passed);
    INFO(r.detail);
}

TEST_CASE("rk4 band is enforced") {
    SimConfig c;
    c.verify.rk4_ratio_min = 17;
    CHECK_FALSE(check_rk4_order(c).passed);
}
