#pragma once

#include <vector>

#include <Eigen/Dense>

#include "arnpg/criteria.hpp"
#include "arnpg/mdp.hpp"
#include "arnpg/policy.hpp"
#include "arnpg/simplex.hpp"

namespace arnpg {

struct ValueIterationResult {
    Eigen::VectorXd v;        // optimal per-state values
    std::vector<int> greedy;  // optimal deterministic action per state
    double value_at_rho = 0.0;
    int sweeps = 0;
};

/// Optimal values of an arbitrary finite reward. Value iteration until the
/// sup-norm change is below `tol`, then policy-iteration polishing: the
/// greedy policy is evaluated exactly and improved until it is stable.
ValueIterationResult value_iteration(const TabularMdp& mdp, const Eigen::MatrixXd& reward, double tol = 1e-12);

/// Exact V(rho) vector of a deterministic policy.
ValueVector deterministic_values(const TabularMdp& mdp, const std::vector<int>& actions);
OccupancyMeasure deterministic_occupancy(const TabularMdp& mdp, const std::vector<int>& actions);

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double value = 0.0;
    OccupancyMeasure occupancy;
    /// cmdp: lambda*_2..lambda*_m (>= 0). maxmin: optimal simplex weights.
    Eigen::VectorXd duals;
    ValueVector values;               // <r_i, d>/(1-gamma)
    double primal_residual = 0.0;     // flow and reward-constraint residual, sup norm
    double complementary_residual = 0.0;
};

/// max V_1 subject to V_i >= b_i over the occupancy polytope.
LpSolution cmdp_lp(const TabularMdp& mdp, const Eigen::VectorXd& thresholds);

/// max t subject to V_i / c_i >= t over the occupancy polytope.
LpSolution maxmin_lp(const TabularMdp& mdp, const Eigen::VectorXd& scales);

struct FrankWolfeResult {
    double value = 0.0;      // F at the returned point
    ValueVector values;
    OccupancyMeasure occupancy;
    double gap = 0.0;        // Frank-Wolfe certificate: F* - value <= gap
    int iterations = 0;
    bool converged = false;
};

/// Maximizes a smooth concave F over the achievable value region with
/// pairwise Frank-Wolfe. Vertices are deterministic policies found by value
/// iteration on the gradient-weighted reward; line search is exact (bisection
/// on the directional derivative).
FrankWolfeResult smooth_fw(const TabularMdp& mdp, const SmoothScalarizer& scalarizer, int iterations = 20000,
                           double tol = 1e-6);

struct SoftViResult {
    SoftmaxPolicy policy;  // pi* proportional to anchor * exp((r + gamma P V*) / alpha)
    Eigen::MatrixXd q;     // Q~* = r + alpha log anchor + gamma P V~*
    Eigen::VectorXd v;     // V~* = alpha log sum_a exp(Q~* / alpha)
    double residual = 0.0;
    int sweeps = 0;
};

/// Optimum of the KL-regularized value for a fixed anchor.
SoftViResult soft_vi(const TabularMdp& mdp, const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor, double alpha,
                     double tol = 1e-12);

/// pi(a|s) = d(s,a)/d(s); states with no mass get uniform rows. Zero entries
/// become logits of log(DBL_MIN) so the result stays a finite softmax.
SoftmaxPolicy occupancy_to_policy(const OccupancyMeasure& occ);

}  // namespace arnpg
