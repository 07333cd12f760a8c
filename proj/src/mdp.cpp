#include "arnpg/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "arnpg/error.hpp"
#include "arnpg/rng.hpp"

namespace arnpg {

namespace {

constexpr double kSimplexTol = 1e-12;
constexpr double kBellmanTol = 1e-10;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require(bool ok, const std::string& message) {
    if (!ok) throw ParameterError(message);
}

}  // namespace

TabularMdp::TabularMdp(Eigen::MatrixXd transitions, std::vector<Eigen::MatrixXd> rewards, Eigen::VectorXd rho,
                       double gamma)
    : gamma_(gamma), rho_(std::move(rho)), transitions_(std::move(transitions)), rewards_(std::move(rewards)) {
    require(gamma_ > 0.0 && gamma_ < 1.0, "TabularMdp: gamma must lie in (0,1)");
    num_states_ = static_cast<int>(rho_.size());
    require(num_states_ >= 1, "TabularMdp: need at least one state");
    require(transitions_.cols() == num_states_, "TabularMdp: transition columns must equal num_states");
    require(transitions_.rows() % num_states_ == 0 && transitions_.rows() > 0,
            "TabularMdp: transition rows must be num_states * num_actions");
    num_actions_ = static_cast<int>(transitions_.rows() / num_states_);
    require(!rewards_.empty(), "TabularMdp: need at least one objective");

    require(rho_.allFinite() && rho_.minCoeff() >= 0.0, "TabularMdp: rho entries must be >= 0");
    require(std::abs(rho_.sum() - 1.0) <= kSimplexTol, "TabularMdp: rho must sum to 1");
    require(transitions_.allFinite() && transitions_.minCoeff() >= 0.0,
            "TabularMdp: transition probabilities must be >= 0");
    for (Eigen::Index row = 0; row < transitions_.rows(); ++row) {
        if (std::abs(transitions_.row(row).sum() - 1.0) > kSimplexTol) {
            throw ParameterError("TabularMdp: transition row (s=" + std::to_string(row / num_actions_) +
                                 ", a=" + std::to_string(row % num_actions_) + ") does not sum to 1");
        }
    }
    for (std::size_t i = 0; i < rewards_.size(); ++i) {
        const auto& r = rewards_[i];
        require(r.rows() == num_states_ && r.cols() == num_actions_,
                "TabularMdp: reward " + std::to_string(i) + " must be num_states x num_actions");
        require(r.allFinite() && r.minCoeff() >= 0.0 && r.maxCoeff() <= 1.0,
                "TabularMdp: reward " + std::to_string(i) + " entries must lie in [0,1]");
    }
}

bool operator==(const TabularMdp& lhs, const TabularMdp& rhs) {
    if (lhs.gamma_ != rhs.gamma_ || lhs.rho_ != rhs.rho_ || lhs.transitions_ != rhs.transitions_ ||
        lhs.rewards_.size() != rhs.rewards_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < lhs.rewards_.size(); ++i) {
        if (lhs.rewards_[i] != rhs.rewards_[i]) return false;
    }
    return true;
}

TabularMdp random_mdp(std::uint64_t seed, int num_states, int num_actions, int num_objectives, double gamma) {
    require(num_states >= 1 && num_actions >= 1 && num_objectives >= 1, "random_mdp: counts must be >= 1");
    require(gamma > 0.0 && gamma < 1.0, "random_mdp: gamma must lie in (0,1)");
    Rng rng(seed);
    Eigen::MatrixXd transitions(num_states * num_actions, num_states);
    for (int row = 0; row < num_states * num_actions; ++row) {
        double total = 0.0;
        for (int s_next = 0; s_next < num_states; ++s_next) {
            const double u = rng.uniform();
            transitions(row, s_next) = u;
            total += u;
        }
        if (total <= 0.0) {
            // Probability-zero event for S > 1; fall back to uniform.
            transitions.row(row).setConstant(1.0 / num_states);
        } else {
            transitions.row(row) /= total;
        }
    }
    std::vector<Eigen::MatrixXd> rewards;
    rewards.reserve(static_cast<std::size_t>(num_objectives));
    for (int i = 0; i < num_objectives; ++i) {
        Eigen::MatrixXd r(num_states, num_actions);
        for (int s = 0; s < num_states; ++s) {
            for (int a = 0; a < num_actions; ++a) r(s, a) = rng.uniform();
        }
        rewards.push_back(std::move(r));
    }
    Eigen::VectorXd rho = Eigen::VectorXd::Constant(num_states, 1.0 / num_states);
    return TabularMdp(std::move(transitions), std::move(rewards), std::move(rho), gamma);
}

Eigen::MatrixXd expected_next(const TabularMdp& mdp, const Eigen::VectorXd& v) {
    const Eigen::VectorXd flat = mdp.transitions() * v;
    return Eigen::Map<const RowMajorMatrix>(flat.data(), mdp.num_states(), mdp.num_actions());
}

PolicyEvaluator::PolicyEvaluator(const TabularMdp& mdp, const SoftmaxPolicy& policy)
    : mdp_(&mdp), probs_(policy.probs()) {
    const int n_s = mdp.num_states();
    const int n_a = mdp.num_actions();
    if (policy.num_states() != n_s || policy.num_actions() != n_a) {
        throw ParameterError("PolicyEvaluator: policy shape does not match the MDP");
    }
    p_pi_.setZero(n_s, n_s);
    for (int s = 0; s < n_s; ++s) {
        for (int a = 0; a < n_a; ++a) p_pi_.row(s) += probs_(s, a) * mdp.transition_row(s, a);
    }
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n_s, n_s) - mdp.gamma() * p_pi_;
    lu_.compute(system);
    visitation_ = lu_.transpose().solve(mdp.rho());
    visitation_ *= 1.0 - mdp.gamma();
}

Eigen::VectorXd PolicyEvaluator::solve_state_values(const Eigen::VectorXd& reward_pi) const {
    Eigen::VectorXd v = lu_.solve(reward_pi);
    const double residual = (v - mdp_->gamma() * (p_pi_ * v) - reward_pi).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, reward_pi.lpNorm<Eigen::Infinity>() / (1.0 - mdp_->gamma()));
    if (!(residual <= kBellmanTol * scale)) {
        throw NumericalError("policy evaluation: Bellman residual " + std::to_string(residual) +
                             " exceeds tolerance");
    }
    return v;
}

Evaluation PolicyEvaluator::evaluate(const Eigen::MatrixXd& reward) const {
    if (reward.rows() != mdp_->num_states() || reward.cols() != mdp_->num_actions()) {
        throw ParameterError("policy_eval: reward shape does not match the MDP");
    }
    if (!reward.allFinite()) throw ParameterError("policy_eval: reward must be finite");
    const Eigen::VectorXd reward_pi = (probs_.array() * reward.array()).rowwise().sum();
    Evaluation out;
    out.v = solve_state_values(reward_pi);
    out.q = reward + mdp_->gamma() * expected_next(*mdp_, out.v);
    return out;
}

double PolicyEvaluator::value_at_rho(const Eigen::MatrixXd& reward) const {
    const Eigen::VectorXd reward_pi = (probs_.array() * reward.array()).rowwise().sum();
    return mdp_->rho().dot(solve_state_values(reward_pi));
}

ValueVector PolicyEvaluator::value_vector() const {
    ValueVector out(mdp_->num_objectives());
    for (int i = 0; i < mdp_->num_objectives(); ++i) out(i) = value_at_rho(mdp_->reward(i));
    return out;
}

OccupancyMeasure PolicyEvaluator::occupancy() const {
    OccupancyMeasure occ;
    occ.d = probs_.array().colwise() * visitation_.array();
    return occ;
}

Evaluation policy_eval(const TabularMdp& mdp, const SoftmaxPolicy& policy, const Eigen::MatrixXd& reward) {
    return PolicyEvaluator(mdp, policy).evaluate(reward);
}

OccupancyMeasure occupancy(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    return PolicyEvaluator(mdp, policy).occupancy();
}

ValueVector value_vector(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    return PolicyEvaluator(mdp, policy).value_vector();
}

double flow_residual(const TabularMdp& mdp, const OccupancyMeasure& occ) {
    const int n_s = mdp.num_states();
    const int n_a = mdp.num_actions();
    Eigen::VectorXd inflow = (1.0 - mdp.gamma()) * mdp.rho();
    for (int s = 0; s < n_s; ++s) {
        for (int a = 0; a < n_a; ++a) {
            inflow += mdp.gamma() * occ.d(s, a) * mdp.transition_row(s, a).transpose();
        }
    }
    return (inflow - occ.state_marginal()).lpNorm<Eigen::Infinity>();
}

}  // namespace arnpg
