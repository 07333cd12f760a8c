#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "arnpg/oracle.hpp"
#include "arnpg/simplex.hpp"
#include "test_util.hpp"

using namespace arnpg;

namespace {

// Enumerates every basis of {Ax = b, x >= 0} and keeps the best feasible one.
double brute_force_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c, bool& feasible) {
    const int rows = static_cast<int>(a.rows());
    const int cols = static_cast<int>(a.cols());
    double best = -1e300;
    feasible = false;
    std::vector<int> pick(rows);
    std::vector<bool> mask(cols, false);
    std::fill(mask.begin(), mask.begin() + rows, true);
    std::sort(mask.begin(), mask.end());
    do {
        int j = 0;
        for (int col = 0; col < cols; ++col)
            if (mask[col]) pick[j++] = col;
        Eigen::MatrixXd basis(rows, rows);
        for (int i = 0; i < rows; ++i) basis.col(i) = a.col(pick[i]);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
        if (lu.rank() < rows) continue;
        const Eigen::VectorXd xb = lu.solve(b);
        if (xb.minCoeff() < -1e-10) continue;
        double obj = 0.0;
        for (int i = 0; i < rows; ++i) obj += c(pick[i]) * xb(i);
        feasible = true;
        best = std::max(best, obj);
    } while (std::next_permutation(mask.begin(), mask.end()));
    return best;
}

}  // namespace

TEST_CASE("simplex matches vertex enumeration") {
    Rng rng(1);
    int optimal = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int rows = 2 + static_cast<int>(rng.below(2));
        const int cols = rows + 2 + static_cast<int>(rng.below(3));
        Eigen::MatrixXd a = testutil::random_reward(rng, rows, cols, -1.0, 2.0);
        // Bounded feasible region: one row forces sum x = 1.
        a.row(0).setOnes();
        Eigen::VectorXd b(rows);
        b(0) = 1.0;
        for (int i = 1; i < rows; ++i) b(i) = rng.uniform() - 0.2;
        const Eigen::VectorXd c = testutil::random_reward(rng, cols, 1, -1.0, 1.0);
        bool feasible = false;
        const double best = brute_force_lp(a, b, c, feasible);
        const SimplexResult lp = solve_standard_lp(a, b, c);
        if (!feasible) {
            CHECK(lp.status == LpStatus::infeasible);
            continue;
        }
        REQUIRE(lp.status == LpStatus::optimal);
        ++optimal;
        CHECK(std::abs(lp.objective - best) <= 1e-9);
        CHECK((a * lp.x - b).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(lp.x.minCoeff() >= -1e-12);
        CHECK(std::abs(lp.duals.dot(b) - lp.objective) <= 1e-9);  // strong duality
    }
    CHECK(optimal > 10);
}

TEST_CASE("simplex detects unbounded problems") {
    Eigen::MatrixXd a(1, 2);
    a << 1, -1;
    const SimplexResult lp = solve_standard_lp(a, Eigen::VectorXd::Ones(1), Eigen::Vector2d(1, 0));
    CHECK(lp.status == LpStatus::unbounded);
}

TEST_CASE("cmdp_lp against value iteration and brute force over deterministic policies") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const TabularMdp mdp = random_mdp(rng.next_u64(), 6, 3, 2, 0.8);
        const LpSolution lp = cmdp_lp(mdp, Eigen::VectorXd::Zero(1));
        REQUIRE(lp.status == LpStatus::optimal);
        CHECK(std::abs(lp.value - value_iteration(mdp, mdp.reward(0)).value_at_rho) <= 1e-8);
        CHECK(lp.primal_residual <= 1e-9);
    }
    const TabularMdp small = random_mdp(3, 3, 2, 1, 0.7);
    double best = -1e300;
    for (int code = 0; code < 8; ++code) {
        const std::vector<int> actions{code & 1, (code >> 1) & 1, (code >> 2) & 1};
        best = std::max(best, deterministic_values(small, actions)(0));
    }
    CHECK(std::abs(value_iteration(small, small.reward(0)).value_at_rho - best) <= 1e-10);
}

TEST_CASE("cmdp_lp infeasible thresholds and duals") {
    const TabularMdp mdp = random_mdp(7, 20, 10, 2, 0.8);
    CHECK(cmdp_lp(mdp, Eigen::VectorXd::Constant(1, 6.0)).status == LpStatus::infeasible);
    const LpSolution lp = cmdp_lp(mdp, Eigen::VectorXd::Constant(1, 3.0));
    REQUIRE(lp.status == LpStatus::optimal);
    CHECK(lp.duals(0) >= 0.0);
    CHECK(lp.values(1) >= 3.0 - 1e-9);
    CHECK(lp.complementary_residual <= 1e-9);
    // lambda* is the sensitivity of the optimum to b.
    const double h = 1e-4;
    const double up = cmdp_lp(mdp, Eigen::VectorXd::Constant(1, 3.0 + h)).value;
    const double down = cmdp_lp(mdp, Eigen::VectorXd::Constant(1, 3.0 - h)).value;
    CHECK(std::abs(-(up - down) / (2 * h) - lp.duals(0)) <= 1e-6);
    // The optimal occupancy is achievable and its policy reproduces the values.
    const ValueVector v = value_vector(mdp, occupancy_to_policy(lp.occupancy));
    CHECK((v - lp.values).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("maxmin_lp trivial cases") {
    const TabularMdp base = random_mdp(8, 4, 3, 1, 0.8);
    const double vi = value_iteration(base, base.reward(0)).value_at_rho;
    const TabularMdp twin(base.transitions(), {base.reward(0), base.reward(0)}, base.rho(), 0.8);
    CHECK(std::abs(maxmin_lp(twin, Eigen::Vector2d(1, 1)).value - vi) <= 1e-8);
    CHECK(std::abs(maxmin_lp(base, Eigen::VectorXd::Constant(1, 2.0)).value - vi / 2.0) <= 1e-8);
    const LpSolution lp = maxmin_lp(random_mdp(9, 5, 3, 3, 0.8), Eigen::Vector3d(1, 2, 1));
    CHECK(std::abs(lp.duals.sum() - 1.0) <= 1e-9);
    CHECK(lp.duals.minCoeff() >= -1e-12);
}

TEST_CASE("smooth_fw trivial cases and region brute force") {
    const TabularMdp mdp = random_mdp(10, 5, 3, 2, 0.8);
    const FrankWolfeResult lin = smooth_fw(mdp, linear_scalarizer(Eigen::Vector2d(0.3, 0.7)));
    CHECK(lin.gap <= 1e-12);
    const Eigen::MatrixXd mixed = 0.3 * mdp.reward(0) + 0.7 * mdp.reward(1);
    CHECK(std::abs(lin.value - value_iteration(mdp, mixed).value_at_rho) <= 1e-9);

    const TabularMdp one = random_mdp(11, 5, 3, 1, 0.8);
    CHECK(std::abs(smooth_fw(one, linear_scalarizer(Eigen::VectorXd::Ones(1))).value -
                   value_iteration(one, one.reward(0)).value_at_rho) <= 1e-9);

    // Two states, two actions, conflicting rewards: the value region is the hull of four vertices.
    const TabularMdp tiny_base = random_mdp(12, 2, 2, 1, 0.8);
    const Eigen::MatrixXd r2 = Eigen::MatrixXd::Ones(2, 2) - tiny_base.reward(0);
    const TabularMdp tiny(tiny_base.transitions(), {tiny_base.reward(0), r2}, tiny_base.rho(), 0.8);
    const SmoothScalarizer f = sum_log_scalarizer(Eigen::Vector2d(1, 2));
    std::vector<ValueVector> vertices;
    for (int code = 0; code < 4; ++code) vertices.push_back(deterministic_values(tiny, {code & 1, code >> 1}));
    double grid_best = -1e300;
    const int n = 200;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j)
            for (int k = 0; i + j + k <= n; ++k) {
                const double w0 = double(i) / n, w1 = double(j) / n, w2 = double(k) / n;
                const ValueVector v =
                    w0 * vertices[0] + w1 * vertices[1] + w2 * vertices[2] + (1 - w0 - w1 - w2) * vertices[3];
                grid_best = std::max(grid_best, scalarize(f, v).value);
            }
    const FrankWolfeResult fw = smooth_fw(tiny, f);
    CHECK(fw.converged);
    CHECK(fw.gap <= 1e-6);
    CHECK(fw.value >= grid_best - 1e-12);
    CHECK(fw.value <= grid_best + 1e-3);
    CHECK((value_vector(tiny, occupancy_to_policy(fw.occupancy)) - fw.values).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("soft_vi examples") {
    Eigen::MatrixXd r(1, 2);
    r << 1, 0;
    const TabularMdp bandit = testutil::bandit({r}, 0.5);
    const double e = std::exp(1.0);
    const SoftViResult out = soft_vi(bandit, r, uniform_policy(1, 2), 1.0);
    CHECK(out.policy.probs()(0, 0) == doctest::Approx(e / (1 + e)).epsilon(1e-12));
    CHECK(out.residual <= 1e-12);

    Rng rng(3);
    const TabularMdp mdp = random_mdp(13, 4, 3, 1, 0.8);
    const SoftmaxPolicy anchor = testutil::random_policy(rng, 4, 3, 2.0);
    const SoftViResult zero = soft_vi(mdp, Eigen::MatrixXd::Zero(4, 3), anchor, 0.7);
    CHECK((zero.policy.probs() - anchor.probs()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(zero.v.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("occupancy_to_policy round trip and conventions") {
    Rng rng(4);
    const TabularMdp mdp = random_mdp(14, 5, 3, 1, 0.8);
    const SoftmaxPolicy pi = testutil::random_policy(rng, 5, 3, 2.0);
    CHECK((occupancy_to_policy(occupancy(mdp, pi)).probs() - pi.probs()).cwiseAbs().maxCoeff() <= 1e-9);

    OccupancyMeasure occ;
    occ.d.resize(2, 2);
    occ.d << 0.25, 0.75, 0.0, 0.0;
    const Eigen::MatrixXd p = occupancy_to_policy(occ).probs();
    CHECK(p(0, 1) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(p(1, 0) == 0.5);

    const TabularMdp one = testutil::bandit({Eigen::MatrixXd::Zero(1, 3)}, 0.5);
    CHECK((occupancy_to_policy(occupancy(one, uniform_policy(1, 3))).probs().array() - 1.0 / 3.0).abs().maxCoeff() <=
          1e-14);
}
