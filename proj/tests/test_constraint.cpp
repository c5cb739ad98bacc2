#include <doctest.h>

#include "defcon/constraint.hpp"

using namespace defcon;
using Vec = Vec2<double>;

TEST_CASE("shift function") {
    auto s = shift(0.0, 2.0);
    CHECK(s.gamma == 0.0);
    CHECK(s.gamma_dot == doctest::Approx(1.5));
    s = shift(2.0, 2.0);
    CHECK(s.gamma == 1.0);
    CHECK(s.gamma_dot == 0.0);
    s = shift(1.0, 2.0);
    CHECK(s.gamma == doctest::Approx(0.875).epsilon(1e-15));
    CHECK(s.gamma_dot == doctest::Approx(0.375).epsilon(1e-15));
    s = shift(7.0, 2.0);
    CHECK(s.gamma == 1.0);
    CHECK(s.gamma_dot == 0.0);
    CHECK_THROWS_AS(shift(1.0, 0.0), ConfigError);
}

TEST_CASE("error bounds") {
    ConstraintSpec<> spec;
    auto b = error_bound(spec, 0.0);
    CHECK(b.kc(0) == doctest::Approx(0.5));
    CHECK(b.kc(1) == doctest::Approx(0.55));
    CHECK(b.kc_dot(0) == doctest::Approx(0.05));
    CHECK(b.kc_dot(1) == doctest::Approx(0.0));

    spec.mode = BoundMode::scalar_min;
    b = error_bound(spec, 0.0);
    CHECK(b.kc(0) == doctest::Approx(0.5));
    CHECK(b.kc(1) == doctest::Approx(0.5));

    ConstraintSpec<> pos;
    pos.source = BoundSource::position;
    pos.upper = {Harmonic<>::constant(0.7), Harmonic<>::constant(0.7)};
    pos.lower = {Harmonic<>::constant(-0.5), Harmonic<>::constant(-0.5)};
    b = error_bound(pos, 3.0, Vec(0.2, 0.2), Vec(0.4, -0.1));
    CHECK(b.kc(0) == doctest::Approx(0.5));
    CHECK(b.kc_dot(0) == doctest::Approx(-0.4));  // distance to the upper limit shrinks
    CHECK(b.kc_dot(1) == doctest::Approx(0.1));

    ConstraintSpec<> flat;
    flat.error_bound = {Harmonic<>::constant(0.3), Harmonic<>::constant(0.2)};
    CHECK(error_bound(flat, 5.0).kc_dot.norm() == 0.0);

    flat.error_bound[0] = Harmonic<>::sine(0.05, 0.1, 1);
    CHECK_THROWS_AS(flat.validate(), ConfigError);
    CHECK_THROWS_AS(error_bound(pos, 0.0, Vec(0.8, 0.0)), ConfigError);
}

TEST_CASE("transformed error") {
    CHECK(transformed_error(0.0, Vec(0.6, 0.8)).norm() == 0.0);
    CHECK(transformed_error(1.0, Vec(0.6, 0.8)) == Vec(0.6, 0.8));
    const Vec z = transformed_error(0.875, Vec(0.6, 0.8));
    CHECK(z(0) == doctest::Approx(0.525));
    CHECK(z(1) == doctest::Approx(0.7));
}

TEST_CASE("barrier value") {
    CHECK(szblf_value(0.0, 0.5, 10.0) == 0.0);
    CHECK(szblf_value(0.3, 0.5, 10.0) == doctest::Approx(0.05 * std::log(0.25 / 0.16)).epsilon(1e-14));
    CHECK(szblf_value(0.3, 0.5, 10.0) == doctest::Approx(0.0223143551).epsilon(1e-9));
    double prev = 0;
    for (double z = 0.4; z < 0.5; z = 0.5 - (0.5 - z) / 4) {
        const double v = szblf_value(z, 0.5, 10.0);
        CHECK(v > prev);
        prev = v;
        if (0.5 - z < 1e-8) break;
    }
    CHECK(prev > 0.5);
    CHECK_THROWS_AS(szblf_value(0.5, 0.5, 10.0), ConstraintViolation);
    CHECK_THROWS_AS(szblf_value(-0.6, 0.5, 10.0), ConstraintViolation);
}

TEST_CASE("barrier torque term") {
    CHECK(barrier_term(0.0, 0.5, 10.0, 1.0) == 0.0);
    CHECK(barrier_term(0.3, 0.5, 10.0, 1.0) == doctest::Approx(0.1875).epsilon(1e-14));
    CHECK(barrier_term(0.3, 0.5, 10.0, 0.0) == 0.0);
    double prev = 0;
    for (double z = 0.01; z < 0.5; z += 0.01) {
        const double v = barrier_term(z, 0.5, 10.0, 1.0);
        CHECK(v > prev);
        prev = v;
    }
    try {
        barrier_term(0.6, 0.5, 10.0, 1.0, 1);
        FAIL("expected a violation");
    } catch (const ConstraintViolation& e) {
        CHECK(e.joint() == 1);
    }
}

TEST_CASE("barrier margin") {
    CHECK(barrier_margin(0.0, 0.5, 10.0) == 0.0);
    CHECK(barrier_margin(0.3, 0.5, 10.0) == doctest::Approx(0.05625 - 0.0223143551).epsilon(1e-9));
    for (double k : {0.1, 1.0})
        for (int i = 0; i < 1000; ++i) {
            const double xi = 0.999 * k * (-1 + 2 * i / 999.0);
            CHECK(barrier_margin(xi, k, 10.0) >= -1e-12);
        }
}

TEST_CASE("scalar-min barrier uses the error norm") {
    const Vec z(0.3, 0.4), kc(0.6, 0.6);
    const Vec g = barrier_gaps(z, kc, BoundMode::scalar_min);
    CHECK(g(0) == doctest::Approx(0.36 - 0.25));
    CHECK(g(1) == g(0));
    CHECK(barrier_lyapunov(z, kc, 10.0, BoundMode::scalar_min) ==
          doctest::Approx(szblf_value(0.5, 0.6, 10.0)));
    CHECK(barrier_lyapunov(z, kc, 10.0, BoundMode::per_joint) ==
          doctest::Approx(szblf_value(0.3, 0.6, 10.0) + szblf_value(0.4, 0.6, 10.0)));
    CHECK_THROWS_AS(barrier_gaps(Vec(0.5, 0.5), kc, BoundMode::scalar_min), ConstraintViolation);
    CHECK_NOTHROW(barrier_gaps(Vec(0.5, 0.5), kc, BoundMode::per_joint));
}
