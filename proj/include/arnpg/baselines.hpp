#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "arnpg/criteria.hpp"
#include "arnpg/history.hpp"
#include "arnpg/inner_loop.hpp"
#include "arnpg/mdp.hpp"

namespace arnpg {

// All three baselines take one unregularized softmax NPG step per macro step,
// the same closed-form update the inner loop uses with alpha = 0.

struct NpgPdOptions {
    Eigen::VectorXd thresholds;  // b_2..b_m
    double eta = 1.0;
    double eta_prime = 1.0;
    double lambda_max = 1e4;
    int macro_steps = 100;
    std::optional<double> optimum;
};

/// Primal-dual NPG: primal step on r_1 + sum lambda_i r_i, then
/// lambda_i <- clamp(lambda_i - eta'(V_i - b_i), [0, lambda_max]) with V from
/// the policy before the primal step. lambda_0 = 0.
RunHistory npg_pd(const TabularMdp& mdp, const NpgPdOptions& options, Estimator* estimator = nullptr);

struct CrpoOptions {
    Eigen::VectorXd thresholds;
    double eta = 0.4;
    double tolerance = 0.01;
    int macro_steps = 100;
    std::optional<double> optimum;
};

/// Constraint-rectified policy optimization. If every V_i >= b_i - tolerance
/// the step ascends r_1, otherwise it ascends r_j for the lowest violated j.
/// RunRecord::step_target is 0 for objective steps and j - 1 otherwise.
RunHistory crpo(const TabularMdp& mdp, const CrpoOptions& options, Estimator* estimator = nullptr);

struct MoNpgOptions {
    double eta = 0.93;
    int macro_steps = 100;
    std::optional<double> optimum;
};

/// Subgradient NPG for F(v) = min_i v_i / c_i: each step ascends
/// r_j / c_j with j the lowest argmin. `scalarized` holds F of the running
/// average value vector, as for OMDA.
RunHistory mo_npg(const TabularMdp& mdp, const MaxMinBifunction& phi, const MoNpgOptions& options,
                  Estimator* estimator = nullptr);

}  // namespace arnpg
