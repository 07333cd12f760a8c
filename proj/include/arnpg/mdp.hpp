#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "arnpg/policy.hpp"

namespace arnpg {

/// m-dimensional vector of discounted returns V_{1:m}(rho).
using ValueVector = Eigen::VectorXd;

/// Finite discounted MDP with m reward functions.
///
/// Transitions are stored as an (S*A) x S matrix whose row s*A + a is
/// P(.|s,a). Rewards are m matrices of shape S x A with entries in [0,1].
class TabularMdp {
public:
    TabularMdp() = default;
    /// Validates every invariant; throws ParameterError on violation.
    TabularMdp(Eigen::MatrixXd transitions, std::vector<Eigen::MatrixXd> rewards, Eigen::VectorXd rho,
               double gamma);

    int num_states() const noexcept { return num_states_; }
    int num_actions() const noexcept { return num_actions_; }
    int num_objectives() const noexcept { return static_cast<int>(rewards_.size()); }
    double gamma() const noexcept { return gamma_; }
    const Eigen::VectorXd& rho() const noexcept { return rho_; }
    const Eigen::MatrixXd& transitions() const noexcept { return transitions_; }
    const std::vector<Eigen::MatrixXd>& rewards() const noexcept { return rewards_; }
    const Eigen::MatrixXd& reward(int i) const { return rewards_.at(static_cast<std::size_t>(i)); }

    /// P(s'|s,a) as a row vector over s'.
    auto transition_row(int s, int a) const { return transitions_.row(s * num_actions_ + a); }
    double transition(int s, int a, int s_next) const { return transitions_(s * num_actions_ + a, s_next); }

    friend bool operator==(const TabularMdp& lhs, const TabularMdp& rhs);

private:
    int num_states_ = 0;
    int num_actions_ = 0;
    double gamma_ = 0.0;
    Eigen::VectorXd rho_;
    Eigen::MatrixXd transitions_;
    std::vector<Eigen::MatrixXd> rewards_;
};

/// Discounted state-action visitation d(s,a); entries sum to 1.
struct OccupancyMeasure {
    Eigen::MatrixXd d;

    Eigen::VectorXd state_marginal() const { return d.rowwise().sum(); }
};

struct Evaluation {
    Eigen::VectorXd v;  // per state
    Eigen::MatrixXd q;  // per state-action
};

/// Seeded instance of the random family: rows of P are normalized
/// Unif([0,1]^S) vectors, rewards are Unif([0,1]), rho uniform.
/// Draw order: P[s][a][s'] (s, a, s' nested), then R[i][s][a].
TabularMdp random_mdp(std::uint64_t seed, int num_states, int num_actions, int num_objectives, double gamma);

/// Exact V and Q of `policy` for an arbitrary finite reward table.
Evaluation policy_eval(const TabularMdp& mdp, const SoftmaxPolicy& policy, const Eigen::MatrixXd& reward);

OccupancyMeasure occupancy(const TabularMdp& mdp, const SoftmaxPolicy& policy);

ValueVector value_vector(const TabularMdp& mdp, const SoftmaxPolicy& policy);

/// Sum_s gamma P(s|s',a') d(s',a') + (1-gamma) rho(s) - sum_a d(s,a), sup norm.
double flow_residual(const TabularMdp& mdp, const OccupancyMeasure& occ);

/// Factorizes (I - gamma P_pi) once and answers repeated queries for the
/// same policy. Every solve checks its Bellman residual.
class PolicyEvaluator {
public:
    PolicyEvaluator(const TabularMdp& mdp, const SoftmaxPolicy& policy);

    const Eigen::MatrixXd& probs() const noexcept { return probs_; }

    /// Solves V = r_pi + gamma P_pi V for a per-state reward vector.
    Eigen::VectorXd solve_state_values(const Eigen::VectorXd& reward_pi) const;
    Evaluation evaluate(const Eigen::MatrixXd& reward) const;
    /// V_r(rho).
    double value_at_rho(const Eigen::MatrixXd& reward) const;
    ValueVector value_vector() const;
    OccupancyMeasure occupancy() const;
    /// d(s) = (1-gamma) rho^T (I - gamma P_pi)^{-1}.
    const Eigen::VectorXd& state_visitation() const noexcept { return visitation_; }

private:
    const TabularMdp* mdp_;
    Eigen::MatrixXd probs_;
    Eigen::MatrixXd p_pi_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::VectorXd visitation_;
};

/// Expected next-state values: (P V)(s,a) = sum_s' P(s'|s,a) V(s').
Eigen::MatrixXd expected_next(const TabularMdp& mdp, const Eigen::VectorXd& v);

}  // namespace arnpg
