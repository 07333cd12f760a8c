#include <doctest.h>

#include <cmath>

#include "arnpg/error.hpp"
#include "arnpg/mdp.hpp"
#include "test_util.hpp"

using namespace arnpg;

TEST_CASE("random_mdp is deterministic and valid") {
    const TabularMdp a = random_mdp(7, 20, 10, 2, 0.8);
    const TabularMdp b = random_mdp(7, 20, 10, 2, 0.8);
    CHECK(a == b);
    CHECK(a.num_states() == 20);
    CHECK(a.num_actions() == 10);
    CHECK(a.num_objectives() == 2);
    CHECK_FALSE(a == random_mdp(8, 20, 10, 2, 0.8));
    for (int row = 0; row < 200; ++row) CHECK(std::abs(a.transitions().row(row).sum() - 1.0) <= 1e-12);
}

TEST_CASE("random_mdp single state") {
    const TabularMdp mdp = random_mdp(7, 1, 1, 1, 0.5);
    CHECK(mdp.transitions()(0, 0) == 1.0);
    CHECK(mdp.rho()(0) == 1.0);
    CHECK(mdp.reward(0)(0, 0) >= 0.0);
    CHECK(mdp.reward(0)(0, 0) <= 1.0);
}

TEST_CASE("random_mdp rejects bad parameters") {
    CHECK_THROWS_AS(random_mdp(1, 0, 2, 1, 0.5), ParameterError);
    CHECK_THROWS_AS(random_mdp(1, 2, 2, 1, 1.0), ParameterError);
    CHECK_THROWS_AS(random_mdp(1, 2, 2, 0, 0.5), ParameterError);
}

TEST_CASE("TabularMdp validates invariants") {
    Eigen::MatrixXd p(1, 1);
    p << 0.9;
    CHECK_THROWS_AS(TabularMdp(p, {Eigen::MatrixXd::Zero(1, 1)}, Eigen::VectorXd::Ones(1), 0.5), ParameterError);
    CHECK_THROWS_AS(TabularMdp(Eigen::MatrixXd::Ones(1, 1), {Eigen::MatrixXd::Constant(1, 1, 2.0)},
                               Eigen::VectorXd::Ones(1), 0.5),
                    ParameterError);
}

TEST_CASE("policy_eval geometric series") {
    const TabularMdp mdp = testutil::bandit({Eigen::MatrixXd::Ones(1, 1)}, 0.8);
    const Evaluation ev = policy_eval(mdp, uniform_policy(1, 1), mdp.reward(0));
    CHECK(ev.v(0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(ev.q(0, 0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("policy_eval zero reward and signed rewards") {
    const TabularMdp mdp = random_mdp(3, 6, 3, 1, 0.9);
    Rng rng(11);
    const SoftmaxPolicy pi = testutil::random_policy(rng, 6, 3, 2.0);
    CHECK(policy_eval(mdp, pi, Eigen::MatrixXd::Zero(6, 3)).v.cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd r = testutil::random_reward(rng, 6, 3, -3.0, 5.0);
    const Evaluation ev = policy_eval(mdp, pi, r);
    const Eigen::VectorXd v_from_q = (pi.probs().array() * ev.q.array()).rowwise().sum();
    CHECK((v_from_q - ev.v).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((ev.q - r - mdp.gamma() * expected_next(mdp, ev.v)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("chain values and occupancy") {
    const TabularMdp mdp = testutil::chain(0.5);
    const SoftmaxPolicy pi = uniform_policy(2, 1);
    const Evaluation ev = policy_eval(mdp, pi, mdp.reward(0));
    CHECK(ev.v(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev.v(1) == doctest::Approx(2.0).epsilon(1e-12));
    const OccupancyMeasure occ = occupancy(mdp, pi);
    CHECK(occ.d(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(occ.d(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("value_vector on a bandit") {
    const TabularMdp mdp = testutil::bandit({Eigen::MatrixXd::Ones(1, 2), Eigen::MatrixXd::Zero(1, 2)}, 0.8);
    const ValueVector v = value_vector(mdp, uniform_policy(1, 2));
    CHECK(v(0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(v(1) == 0.0);
    CHECK(v == value_vector(mdp, uniform_policy(1, 2)));
}

TEST_CASE("occupancy duality and flow on random instances") {
    Rng rng(5);
    double worst = 0.0;
    double flow = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const TabularMdp mdp = random_mdp(rng.next_u64(), 5, 3, 2, 0.9);
        const SoftmaxPolicy pi = testutil::random_policy(rng, 5, 3, 3.0);
        const OccupancyMeasure occ = occupancy(mdp, pi);
        const ValueVector v = value_vector(mdp, pi);
        for (int i = 0; i < 2; ++i)
            worst = std::max(worst, std::abs(v(i) - occ.d.cwiseProduct(mdp.reward(i)).sum() / (1.0 - mdp.gamma())));
        flow = std::max(flow, flow_residual(mdp, occ));
        CHECK(std::abs(occ.d.sum() - 1.0) <= 1e-12);
        CHECK(occ.d.maxCoeff() <= 1.0 / (1.0 - mdp.gamma()) + 1e-9);
    }
    CHECK(worst <= 1e-9);
    CHECK(flow <= 1e-9);
}

TEST_CASE("paper-sized instance flow residual") {
    const TabularMdp mdp = random_mdp(7, 20, 10, 2, 0.8);
    CHECK(flow_residual(mdp, occupancy(mdp, uniform_policy(20, 10))) <= 1e-9);
}

TEST_CASE("policy_eval shape mismatch") {
    const TabularMdp mdp = random_mdp(1, 3, 2, 1, 0.5);
    CHECK_THROWS_AS(policy_eval(mdp, uniform_policy(3, 3), Eigen::MatrixXd::Zero(3, 3)), ParameterError);
    CHECK_THROWS_AS(policy_eval(mdp, uniform_policy(3, 2), Eigen::MatrixXd::Zero(2, 2)), ParameterError);
}
