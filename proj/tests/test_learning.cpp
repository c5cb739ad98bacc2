#include <doctest.h>

#include <random>

#include "defcon/learning.hpp"

using namespace defcon;
using VecXd = VecX<double>;
using MatXd = MatX<double>;

TEST_CASE("instantaneous cost") {
    const Eigen::Matrix4d Q = Eigen::Matrix4d::Identity();
    const Eigen::Matrix2d R = 0.01 * Eigen::Matrix2d::Identity();
    CHECK(instantaneous_cost<double>(Eigen::Vector4d::Zero(), Eigen::Vector2d::Zero(), Q, R) == 0.0);
    CHECK(instantaneous_cost<double>(Eigen::Vector4d(1, 0, 0, 0), Eigen::Vector2d::Zero(), Q,
                                     Eigen::Matrix2d::Zero()) == 1.0);
    CHECK(instantaneous_cost<double>(Eigen::Vector4d(1, 2, 0, 0), Eigen::Vector2d(10, 0), Q, R) ==
          doctest::Approx(5 + 1));
}

TEST_CASE("critic value") {
    VecXd Wc = VecXd::Zero(5), Sc = VecXd::Constant(5, 0.5);
    CHECK(critic_value(Wc, Sc) == 0.0);
    Wc(2) = 2;
    CHECK(critic_value(Wc, Sc) == 1.0);
}

TEST_CASE("lambda vector") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    VecXd Sc(6);
    MatXd grad(6, 4);
    Eigen::Vector4d Zc_dot;
    for (auto& v : Sc) v = u(rng);
    for (auto& v : grad.reshaped()) v = u(rng);
    for (auto& v : Zc_dot) v = u(rng);

    CHECK((lambda_vector(Sc, grad, Eigen::Vector4d::Zero().eval(), 1.0) + Sc).norm() == 0.0);
    CHECK((lambda_vector(Sc, grad, Zc_dot, 1e300) - grad * Zc_dot).norm() < 1e-15);

    const VecXd L = lambda_vector(Sc, grad, Zc_dot, 2.0);
    for (int t = 0; t < 6; ++t) {
        double acc = -Sc(t) / 2.0;
        for (int j = 0; j < 4; ++j) acc += grad(t, j) * Zc_dot(j);
        CHECK(L(t) == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("temporal difference error") {
    const VecXd L = VecXd::Constant(3, 1.0);
    CHECK(td_error(0.0, VecXd(VecXd::Zero(3)), L) == 0.0);
    VecXd Wc = VecXd::Zero(3);
    Wc(0) = -1;
    CHECK(td_error(1.0, Wc, L) == 0.0);
}

TEST_CASE("critic weight law") {
    CriticConfig<> cfg;
    const VecXd L = (VecXd(3) << 0.2, -0.4, 1.0).finished();
    CHECK(critic_rate(VecXd(VecXd::Zero(3)), 0.0, L, cfg).norm() == 0.0);
    CHECK((critic_rate(VecXd(VecXd::Zero(3)), 1.0, L, cfg) + 50 * L).norm() < 1e-14);
    const VecXd Wc = (VecXd(3) << 1.0, 2.0, -3.0).finished();
    CHECK((critic_rate(Wc, 4.0, VecXd(VecXd::Zero(3)), cfg) + cfg.sigma * cfg.eta * Wc).norm() < 1e-14);
}

TEST_CASE("actor weight law") {
    const ActorConfig<> cfg;
    const VecXd Sa = (VecXd(4) << 0.1, 0.5, 0.9, 0.2).finished();
    const MatXd zero = MatXd::Zero(4, 2);
    CHECK(actor_rate(zero, Sa, Eigen::Vector2d::Zero(), 0.0, cfg).norm() == 0.0);

    const MatXd d = actor_rate(zero, Sa, Eigen::Vector2d(1, 0), 0.0, cfg);
    CHECK((d.col(0) + Sa).norm() < 1e-15);
    CHECK(d.col(1).norm() == 0.0);

    MatXd Wa(4, 2);
    Wa << 1, 2, 3, 4, 5, 6, 7, 8;
    const MatXd decay = actor_rate(Wa, VecXd(VecXd::Zero(4)), Eigen::Vector2d(0.3, 0.1), 2.0, cfg);
    CHECK((decay + cfg.sigma * cfg.eta * Wa).norm() < 1e-14);

    // Column by column against the scalar form.
    const double J = 0.7;
    const Eigen::Vector2d Z2(0.3, -0.2);
    const MatXd full = actor_rate(Wa, Sa, Z2, J, cfg);
    for (int i = 0; i < 2; ++i) {
        const double varsigma = Wa.col(i).dot(Sa) + Z2(i) / cfg.sigma + cfg.ka * J;
        const VecXd expected = -cfg.sigma * varsigma * Sa - cfg.sigma * cfg.eta * Wa.col(i);
        CHECK((full.col(i) - expected).norm() < 1e-12);
    }
}

TEST_CASE("learning config validation") {
    CriticConfig<> critic;
    ActorConfig<> actor;
    CHECK_NOTHROW(validate_learning_stability(critic, actor, 10));
    actor.ka = 0.1;  // 2·50·0.01·10 = 10 > 0.5
    CHECK_THROWS_AS(validate_learning_stability(critic, actor, 10), ConfigError);

    critic.Q(0, 0) = -1;
    CHECK_THROWS_AS(critic.validate(), ConfigError);
    critic = {};
    critic.Q(0, 1) = 0.5;  // not symmetric
    CHECK_THROWS_AS(critic.validate(), ConfigError);
    critic = {};
    critic.psi = 0;
    CHECK_THROWS_AS(critic.validate(), ConfigError);
    CHECK_THROWS_AS((ActorConfig<>{50, 0, 0.01}.validate()), ConfigError);
}
