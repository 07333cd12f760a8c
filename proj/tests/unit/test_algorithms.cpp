#include <doctest.h>

#include <cmath>

#include "arnpg/algorithms.hpp"
#include "arnpg/error.hpp"
#include "arnpg/oracle.hpp"
#include "test_util.hpp"

using namespace arnpg;

TEST_CASE("tk_schedule examples") {
    ScheduleSpec fixed;
    fixed.fixed_steps = 1;
    CHECK(tk_schedule(fixed) == 1);

    ScheduleSpec imd;
    imd.mode = ScheduleMode::theorem;
    imd.rule = ScheduleRule::imd;
    imd.horizon = 100;
    imd.lipschitz = 20;
    imd.smoothness = 200;
    imd.num_actions = 10;
    imd.gamma = 0.8;
    CHECK(tk_schedule(imd) == 17);

    ScheduleSpec epd = imd;
    epd.rule = ScheduleRule::epd;
    epd.num_objectives = 2;
    epd.eta_prime = 1.0;
    DualState zero{Eigen::VectorXd::Zero(1)};
    const int expected = static_cast<int>(std::ceil(std::log(5.0 * 6.0 * 100.0 / (4.0 * std::log(10.0))) / 0.2 + 1));
    CHECK(tk_schedule(epd, &zero) == expected);
    DualState big{Eigen::VectorXd::Constant(1, 10.0)};
    CHECK(tk_schedule(epd, &big) > expected);
}

TEST_CASE("EPD direction reward and dual update examples") {
    const TabularMdp mdp = random_mdp(2, 3, 2, 2, 0.8);
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 3.0);
    const Eigen::MatrixXd r = epd_direction_reward(mdp, DualState{Eigen::VectorXd::Constant(1, 1.5)}, 1.0,
                                                   Eigen::Vector2d(0.0, 2.0), b);
    CHECK((r - (mdp.reward(0) + 2.5 * mdp.reward(1))).cwiseAbs().maxCoeff() <= 1e-15);
    const Eigen::MatrixXd r0 =
        epd_direction_reward(mdp, DualState{Eigen::VectorXd::Zero(1)}, 1.0, Eigen::Vector2d(0.0, 3.0), b);
    CHECK(r0 == mdp.reward(0));

    CHECK(epd_dual_update(DualState{Eigen::VectorXd::Constant(1, 0.5)}, 1.0, Eigen::Vector2d(0, 2), b).lambda(0) ==
          1.5);
    CHECK(epd_dual_update(DualState{Eigen::VectorXd::Zero(1)}, 1.0, Eigen::Vector2d(0, 3), b).lambda(0) == 0.0);
    CHECK(epd_initial_dual(Eigen::Vector2d(0, 4), b, 2.0).lambda(0) == 2.0);
    CHECK(epd_initial_dual(Eigen::Vector2d(0, 1), b, 2.0).lambda(0) == 0.0);
}

TEST_CASE("dual property checker rejects bad multipliers") {
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 3.0);
    CHECK_THROWS_AS(check_dual_properties(DualState{Eigen::VectorXd::Constant(1, -0.1)}, 1.0, Eigen::Vector2d(0, 3),
                                          b, false),
                    NumericalError);
    CHECK_THROWS_AS(
        check_dual_properties(DualState{Eigen::VectorXd::Constant(1, 0.5)}, 1.0, Eigen::Vector2d(0, 4), b, false),
        NumericalError);
    CHECK_THROWS_AS(
        check_dual_properties(DualState{Eigen::VectorXd::Constant(1, 0.5)}, 1.0, Eigen::Vector2d(0, 2), b, true),
        NumericalError);
    CHECK_NOTHROW(
        check_dual_properties(DualState{Eigen::VectorXd::Constant(1, 1.5)}, 1.0, Eigen::Vector2d(0, 2), b, true));
}

TEST_CASE("simplex mirror step example") {
    const Eigen::VectorXd out = simplex_mirror_step(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1, 0), std::log(2.0));
    CHECK(out(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(out(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    const Eigen::VectorXd extreme = simplex_mirror_step(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1e4, 0), 1.0);
    CHECK(extreme.allFinite());
    CHECK(std::abs(extreme.sum() - 1.0) <= 1e-12);
}

TEST_CASE("IMD with m=1 and identity F is plain NPG") {
    const TabularMdp mdp = random_mdp(5, 6, 3, 1, 0.8);
    ImdOptions options;
    options.alpha = 0.5;
    options.eta = 0.3;
    options.macro_steps = 20;
    const RunHistory history = arnpg_imd(mdp, linear_scalarizer(Eigen::VectorXd::Ones(1)), options);
    SoftmaxPolicy pi = uniform_policy(6, 3);
    for (const RunRecord& record : history.records) {
        const Evaluation ev = policy_eval(mdp, pi, mdp.reward(0));
        Eigen::MatrixXd next = pi.probs().array() * (options.eta * ev.q.array() / 0.2).exp();
        next.array().colwise() /= next.rowwise().sum().array();
        pi = SoftmaxPolicy(next.array().log().matrix());
        CHECK(std::abs(record.values(0) - value_vector(mdp, pi)(0)) <= 1e-10);
    }
    CHECK((history.final_policy.probs() - pi.probs()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("IMD returns the best iterate and records gaps") {
    const TabularMdp mdp = random_mdp(9, 5, 3, 2, 0.8);
    const SmoothScalarizer f = sum_log_scalarizer(Eigen::Vector2d(1, 1));
    ImdOptions options;
    options.macro_steps = 30;
    options.optimum = smooth_fw(mdp, f).value;
    const RunHistory history = arnpg_imd(mdp, f, options);
    REQUIRE(history.records.size() == 30);
    double best = -1e300;
    for (const RunRecord& r : history.records) best = std::max(best, *r.scalarized);
    CHECK(scalarize(f, value_vector(mdp, history.returned_policy)).value == doctest::Approx(best).epsilon(1e-12));
    CHECK(history.records.back().avg_gap.has_value());
    CHECK(history.records.back().cumulative_iterations == 30);
}

TEST_CASE("EPD without constraints approaches the unconstrained optimum") {
    const TabularMdp mdp = random_mdp(10, 5, 3, 1, 0.8);
    EpdOptions options;
    options.thresholds = Eigen::VectorXd(0);
    options.alpha = 0.05;
    options.eta = default_inner_eta(0.05, 0.8);
    options.macro_steps = 300;
    const RunHistory history = arnpg_epd(mdp, options);
    const double best = value_iteration(mdp, mdp.reward(0)).value_at_rho;
    CHECK(std::abs(history.records.back().values(0) - best) <= 1e-4);
}

TEST_CASE("EPD run keeps dual properties and is deterministic") {
    const TabularMdp mdp = random_mdp(11, 8, 4, 2, 0.8);
    EpdOptions options;
    options.thresholds = Eigen::VectorXd::Constant(1, 3.0);
    options.macro_steps = 100;
    const RunHistory a = arnpg_epd(mdp, options);
    const RunHistory b = arnpg_epd(mdp, options);
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        const RunRecord& r = a.records[k];
        CHECK(r.duals(0) >= 0.0);
        CHECK(r.duals(0) + (3.0 - r.values(1)) >= 0.0);
        CHECK(std::abs(r.duals(0)) >= std::abs(r.values(1) - 3.0));
        CHECK(r.values == b.records[k].values);
        CHECK(r.duals == b.records[k].duals);
    }
}

TEST_CASE("OMDA keeps uniform weights for identical objectives") {
    const TabularMdp base = random_mdp(12, 4, 3, 1, 0.8);
    const TabularMdp mdp(base.transitions(), {base.reward(0), base.reward(0)}, base.rho(), 0.8);
    OmdaOptions options;
    options.alpha = 0.5;
    options.eta = default_inner_eta(0.5, 0.8);
    options.macro_steps = 20;
    const RunHistory history = arnpg_omda(mdp, MaxMinBifunction{Eigen::Vector2d(1, 1)}, options);
    for (const RunRecord& r : history.records) {
        CHECK(r.duals(0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(r.duals.sum() - 1.0) <= 1e-12);
        CHECK(r.cumulative_iterations == 2 * r.k);
    }
}

TEST_CASE("theorem mode rejects hyperparameters outside the theorem") {
    const TabularMdp mdp = random_mdp(13, 4, 3, 2, 0.8);
    ImdOptions options;
    options.schedule.mode = ScheduleMode::theorem;
    options.macro_steps = 5;
    CHECK_THROWS_AS(arnpg_imd(mdp, sum_log_scalarizer(Eigen::Vector2d(1, 1)), options), ParameterError);
}

TEST_CASE("bound expressions") {
    CHECK(imd_gap_bound(1.0, 0.5, 3, 10) == doctest::Approx(2.0 * std::log(3.0) / 5.0));
    CHECK(epd_gap_bound(1.0, 0.5, 3, 10) == doctest::Approx(3.0 * std::log(3.0) / 5.0));
    CHECK(omda_gap_bound(1.0, 0.5, 3, 0.5, 2, 10) ==
          doctest::Approx(3.0 * std::log(3.0) / 5.0 + std::log(2.0) / 5.0));
    CHECK(epd_violation_bound(1.0, 0.5, 3, 1.0, 2.0, 4) ==
          doctest::Approx((4.0 + 3.0 * std::sqrt(2.0 * std::log(3.0))) / 4.0));
}
