#include <doctest.h>

#include <cmath>
#include <limits>

#include "arnpg/error.hpp"
#include "arnpg/mdp.hpp"
#include "arnpg/policy.hpp"
#include "test_util.hpp"

using namespace arnpg;

namespace {

SoftmaxPolicy row(double a, double b) {
    Eigen::MatrixXd logits(1, 2);
    logits << a, b;
    return SoftmaxPolicy(logits);
}

}  // namespace

TEST_CASE("softmax examples") {
    CHECK(row(0, 0).probs()(0, 0) == 0.5);
    const Eigen::MatrixXd big = row(1000, 1000 + std::log(3.0)).probs();
    CHECK(big(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(big(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
    const double e = std::exp(1.0);
    CHECK(row(0, 1).probs()(0, 1) == doctest::Approx(e / (1 + e)).epsilon(1e-14));
    CHECK(action_probs(row(0, 1))(0, 0) == doctest::Approx(1 / (1 + e)).epsilon(1e-14));
}

TEST_CASE("softmax rejects non-finite logits") {
    Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(2, 2);
    logits(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(SoftmaxPolicy{logits}, ParameterError);
    logits(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(SoftmaxPolicy{logits}, ParameterError);
    CHECK_THROWS_AS(SoftmaxPolicy{Eigen::MatrixXd(0, 2)}, ParameterError);
}

TEST_CASE("probabilities are normalized, positive and shift invariant") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const SoftmaxPolicy pi = testutil::random_policy(rng, 4, 5, 30.0);
        const Eigen::MatrixXd p = pi.probs();
        CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
        CHECK(p.minCoeff() > 0.0);
        Eigen::MatrixXd shifted = pi.logits();
        for (int s = 0; s < 4; ++s) shifted.row(s).array() += 50.0 * (rng.uniform() - 0.5);
        CHECK((SoftmaxPolicy(shifted).probs() - p).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((pi.log_probs().array().exp().matrix() - p).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("uniform policy") {
    CHECK((uniform_policy(2, 2).probs().array() == 0.5).all());
    CHECK(uniform_policy(1, 1).probs()(0, 0) == 1.0);
    CHECK(weighted_kl(Eigen::Vector2d(0.3, 0.7), uniform_policy(2, 3), uniform_policy(2, 3)) == 0.0);
}

TEST_CASE("weighted_kl examples") {
    const SoftmaxPolicy p = row(0, 0);
    const SoftmaxPolicy q = row(0, std::log(3.0));
    const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
    CHECK(weighted_kl(Eigen::VectorXd::Ones(1), p, q) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(weighted_kl(Eigen::VectorXd::Ones(1), p, q) == doctest::Approx(0.143841).epsilon(1e-6));
    CHECK(weighted_kl(Eigen::VectorXd::Ones(1), p, p) == 0.0);

    Eigen::MatrixXd lp(2, 2), lq(2, 2);
    lp << 0.3, -1.0, 2.0, 0.0;
    lq << 0.3, -1.0, -2.0, 1.0;
    CHECK(weighted_kl(Eigen::Vector2d(1.0, 0.0), SoftmaxPolicy(lp), SoftmaxPolicy(lq)) == 0.0);
    CHECK(weighted_kl(Eigen::Vector2d(0.0, 1.0), SoftmaxPolicy(lp), SoftmaxPolicy(lq)) > 0.0);
}

TEST_CASE("pseudo_kl matches weighted_kl") {
    const TabularMdp mdp = testutil::bandit({Eigen::MatrixXd::Zero(1, 2)}, 0.5);
    const SoftmaxPolicy p = row(0, 0);
    const SoftmaxPolicy q = row(0, std::log(3.0));
    CHECK(pseudo_kl(occupancy(mdp, p), occupancy(mdp, q)) == doctest::Approx(0.143841).epsilon(1e-6));
    CHECK(pseudo_kl(occupancy(mdp, p), occupancy(mdp, p)) == 0.0);

    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const TabularMdp m = random_mdp(rng.next_u64(), 5, 3, 1, 0.8);
        const SoftmaxPolicy a = testutil::random_policy(rng, 5, 3, 2.0);
        const SoftmaxPolicy b = testutil::random_policy(rng, 5, 3, 2.0);
        const PolicyEvaluator ea(m, a);
        const double lhs = pseudo_kl(ea.occupancy(), occupancy(m, b));
        CHECK(std::abs(lhs - weighted_kl(ea.state_visitation(), a, b)) <= 1e-10);
    }
}

TEST_CASE("pseudo_kl ignores states without mass") {
    OccupancyMeasure d;
    d.d.resize(2, 2);
    d.d << 0.5, 0.5, 0.0, 0.0;
    OccupancyMeasure e;
    e.d.resize(2, 2);
    e.d << 0.25, 0.25, 0.1, 0.4;
    CHECK(pseudo_kl(d, e) == doctest::Approx(0.0));
}

TEST_CASE("state_kl is per-state KL") {
    Eigen::MatrixXd lp(2, 2), lq(2, 2);
    lp << 0, 0, 0, 0;
    lq << 0, std::log(3.0), 0, 0;
    const Eigen::VectorXd kl = state_kl(SoftmaxPolicy(lp), SoftmaxPolicy(lq));
    CHECK(kl(0) == doctest::Approx(0.143841).epsilon(1e-6));
    CHECK(kl(1) == 0.0);
}
