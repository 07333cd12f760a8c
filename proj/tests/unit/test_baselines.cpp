#include <doctest.h>

#include <cmath>

#include "arnpg/baselines.hpp"
#include "arnpg/oracle.hpp"
#include "test_util.hpp"

using namespace arnpg;

namespace {

SoftmaxPolicy npg_step(const TabularMdp& mdp, const SoftmaxPolicy& pi, const Eigen::MatrixXd& r, double eta) {
    const Evaluation ev = policy_eval(mdp, pi, r);
    Eigen::MatrixXd next = pi.probs().array() * (eta * ev.q.array() / (1.0 - mdp.gamma())).exp();
    next.array().colwise() /= next.rowwise().sum().array();
    return SoftmaxPolicy(next.array().log().matrix());
}

}  // namespace

TEST_CASE("NPG-PD first step is NPG on the objective when feasible") {
    const TabularMdp mdp = random_mdp(3, 5, 3, 2, 0.8);
    NpgPdOptions options;
    options.thresholds = Eigen::VectorXd::Constant(1, 0.5);
    options.macro_steps = 1;
    const RunHistory history = npg_pd(mdp, options);
    const SoftmaxPolicy expected = npg_step(mdp, uniform_policy(5, 3), mdp.reward(0), 1.0);
    CHECK((history.final_policy.probs() - expected.probs()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("NPG-PD multipliers stay in the box and hit the floor") {
    const TabularMdp mdp = random_mdp(4, 5, 3, 2, 0.8);
    NpgPdOptions options;
    options.thresholds = Eigen::VectorXd::Constant(1, 0.5);
    options.macro_steps = 50;
    for (const RunRecord& r : npg_pd(mdp, options).records) CHECK(r.duals(0) == 0.0);

    options.thresholds(0) = 4.0;
    options.lambda_max = 2.0;
    options.macro_steps = 200;
    for (const RunRecord& r : npg_pd(mdp, options).records) {
        CHECK(r.duals(0) >= 0.0);
        CHECK(r.duals(0) <= 2.0);
    }
}

TEST_CASE("CRPO only takes objective steps when feasible within tolerance") {
    const TabularMdp mdp = random_mdp(7, 20, 10, 2, 0.8);
    CrpoOptions options;
    options.thresholds = Eigen::VectorXd::Constant(1, 3.0);
    options.macro_steps = 100;
    const RunHistory history = crpo(mdp, options);
    ValueVector previous = value_vector(mdp, uniform_policy(20, 10));
    int constraint_steps = 0;
    for (const RunRecord& r : history.records) {
        const bool feasible = previous(1) >= 3.0 - options.tolerance;
        CHECK(*r.step_target == (feasible ? 0 : 1));
        constraint_steps += feasible ? 0 : 1;
        previous = r.values;
    }
    CHECK(history.records.size() == 100);
}

TEST_CASE("CRPO steps on the violated constraint") {
    const TabularMdp mdp = random_mdp(5, 4, 3, 3, 0.8);
    CrpoOptions options;
    options.thresholds = Eigen::Vector2d(4.9, 4.9);  // infeasible for uniform
    options.macro_steps = 1;
    const RunHistory history = crpo(mdp, options);
    CHECK(*history.records[0].step_target == 1);
    const SoftmaxPolicy expected = npg_step(mdp, uniform_policy(4, 3), mdp.reward(1), 0.4);
    CHECK((history.final_policy.probs() - expected.probs()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("MO-NPG steps along the smallest scaled objective") {
    Eigen::MatrixXd r1(1, 2), r2(1, 2);
    r1 << 0.2, 0.2;
    r2 << 0.8, 0.8;
    const TabularMdp mdp = testutil::bandit({r1, r2}, 0.5);
    MoNpgOptions options;
    options.macro_steps = 1;
    const RunHistory history = mo_npg(mdp, MaxMinBifunction{Eigen::Vector2d(1, 1)}, options);
    CHECK(*history.records[0].step_target == 0);

    const TabularMdp tie = testutil::bandit({r1, r1}, 0.5);
    CHECK(*mo_npg(tie, MaxMinBifunction{Eigen::Vector2d(1, 1)}, options).records[0].step_target == 0);
}

TEST_CASE("MO-NPG reports F at the running average") {
    const TabularMdp mdp = random_mdp(6, 5, 3, 2, 0.8);
    const MaxMinBifunction phi{Eigen::Vector2d(1, 1)};
    MoNpgOptions options;
    options.macro_steps = 20;
    const RunHistory history = mo_npg(mdp, phi, options);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
    for (const RunRecord& r : history.records) {
        sum += r.values;
        CHECK(*r.scalarized == doctest::Approx(maxmin_value(phi, sum / r.k)).epsilon(1e-12));
    }
}
