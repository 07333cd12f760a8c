#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "arnpg/criteria.hpp"
#include "arnpg/history.hpp"
#include "arnpg/inner_loop.hpp"
#include "arnpg/mdp.hpp"

namespace arnpg {

enum class ScheduleMode { fixed, theorem };
enum class ScheduleRule { imd, epd, omda };

/// How many micro steps each InnerLoop call runs.
///
/// In fixed mode every macro step uses `fixed_steps`. In theorem mode the
/// count follows the prescription of the matching convergence theorem:
///   imd:  ceil(log(5 L K / (beta log|A|)) / (1-gamma) + 1)
///   epd:  ceil(log(5 L_k K / (2 eta' m log|A|)) / (1-gamma) + 1),
///         L_k = 1 + eta'(m-1)/(1-gamma) + sum_i lambda_{k,i}
///   omda: ceil(log(5 L K / (6 beta log|A|)) / (1-gamma) + 1)
/// The drivers fill the rule-specific fields themselves; callers only set
/// `mode` (and `fixed_steps` for fixed mode).
struct ScheduleSpec {
    ScheduleMode mode = ScheduleMode::fixed;
    int fixed_steps = 1;
    ScheduleRule rule = ScheduleRule::imd;
    int horizon = 1;  // K
    double lipschitz = 0.0;
    double smoothness = 0.0;
    int num_objectives = 1;
    double eta_prime = 1.0;
    int num_actions = 2;
    double gamma = 0.5;
};

/// Lagrange multipliers lambda_2..lambda_m, stored 0-based.
struct DualState {
    Eigen::VectorXd lambda;
};

/// Result is always >= 1. `dual` is required for the epd rule in theorem mode.
int tk_schedule(const ScheduleSpec& spec, const DualState* dual = nullptr);

struct ImdOptions {
    double alpha = 0.01;
    double eta = 4.5;
    ScheduleSpec schedule;
    int macro_steps = 100;
    std::uint64_t seed = 0;
    /// F(V*) from an oracle; enables gap columns and theorem-mode assertions.
    std::optional<double> optimum;
};

/// Implicit mirror descent for max F(V(pi)) with smooth concave F.
/// The returned policy is the iterate with the largest F (earliest on ties).
RunHistory arnpg_imd(const TabularMdp& mdp, const SmoothScalarizer& scalarizer, const ImdOptions& options,
                     Estimator* estimator = nullptr);

struct EpdOptions {
    Eigen::VectorXd thresholds;  // b_2..b_m
    double eta_prime = 1.0;
    double alpha = 0.2;
    double eta = 1.0;
    ScheduleSpec schedule;
    int macro_steps = 100;
    std::uint64_t seed = 0;
    std::optional<double> optimum;                // V_1 of the constrained optimum
    std::optional<Eigen::VectorXd> optimal_duals; // lambda*, enables the violation bound
};

/// lambda_0,i = max(eta'(V_i(pi_0) - b_i), 0).
DualState epd_initial_dual(const ValueVector& values, const Eigen::VectorXd& thresholds, double eta_prime);

/// r~ = r_1 + sum_i (lambda_i + eta'(b_i - V_i)) r_i.
Eigen::MatrixXd epd_direction_reward(const TabularMdp& mdp, const DualState& dual, double eta_prime,
                                     const ValueVector& current_values, const Eigen::VectorXd& thresholds);

/// lambda_i <- max(eta'(V_i - b_i), lambda_i + eta'(b_i - V_i)).
DualState epd_dual_update(const DualState& dual, double eta_prime, const ValueVector& new_values,
                          const Eigen::VectorXd& thresholds);

/// Throws NumericalError unless lambda_i >= 0 and lambda_i + eta'(b_i - V_i) >= 0,
/// and (when `after_update`) |lambda_i| >= eta'|V_i - b_i|. No tolerance.
void check_dual_properties(const DualState& dual, double eta_prime, const ValueVector& values,
                           const Eigen::VectorXd& thresholds, bool after_update);

/// Extra primal-dual method for max V_1 s.t. V_i >= b_i.
RunHistory arnpg_epd(const TabularMdp& mdp, const EpdOptions& options, Estimator* estimator = nullptr);

/// State carried between OMDA macro steps.
struct OmdaState {
    SoftmaxPolicy anchor;
    SoftmaxPolicy half_policy;
    Eigen::VectorXd anchor_weights;
    Eigen::VectorXd half_weights;
};

/// argmin_lambda <g, lambda> + KL(lambda || prior)/eta' over the simplex,
/// i.e. lambda proportional to prior * exp(-eta' g), computed in log space.
Eigen::VectorXd simplex_mirror_step(const Eigen::VectorXd& prior, const Eigen::VectorXd& gradient, double eta_prime);

struct OmdaOptions {
    double eta_prime = 2.0;
    double alpha = 1.0;
    double eta = 0.08;
    ScheduleSpec schedule;
    int macro_steps = 100;
    std::uint64_t seed = 0;
    std::optional<double> optimum;  // max-min optimum F(V*)
};

/// Optimistic mirror descent ascent for max_pi min_lambda Phi(V(pi), lambda).
/// Records report the half-step policies; `scalarized` holds F of the running
/// average value vector.
RunHistory arnpg_omda(const TabularMdp& mdp, const MaxMinBifunction& phi, const OmdaOptions& options,
                      Estimator* estimator = nullptr);

/// Theorem bound expressions, evaluated at macro step k.
double imd_gap_bound(double alpha, double gamma, int num_actions, int k);
double epd_gap_bound(double alpha, double gamma, int num_actions, int k);
double epd_violation_bound(double alpha, double gamma, int num_actions, double eta_prime, double dual_norm, int k);
double omda_gap_bound(double alpha, double gamma, int num_actions, double eta_prime, int num_objectives, int k);

}  // namespace arnpg
