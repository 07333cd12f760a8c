#include "arnpg/inner_loop.hpp"

#include <algorithm>
#include <cmath>

#include "arnpg/error.hpp"

namespace arnpg {

namespace {

// Relative slack when comparing eta against (1-gamma)/alpha, which is
// usually computed by the caller with its own rounding.
constexpr double kEtaSlack = 1e-12;

Eigen::VectorXd regularized_state_reward(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& log_pi,
                                         const Eigen::MatrixXd& effective_reward, double alpha) {
    return (probs.array() * (effective_reward - alpha * log_pi).array()).rowwise().sum();
}

}  // namespace

double default_inner_eta(double alpha, double gamma) {
    if (!(alpha > 0.0)) throw ParameterError("default_inner_eta: alpha must be > 0");
    return (1.0 - gamma) / alpha;
}

void validate(const InnerLoopSpec& spec, const TabularMdp& mdp) {
    if (!(spec.alpha > 0.0) || !std::isfinite(spec.alpha)) {
        throw ParameterError("InnerLoopSpec: alpha must be a positive finite number");
    }
    const double eta_max = (1.0 - mdp.gamma()) / spec.alpha;
    if (!(spec.eta > 0.0) || spec.eta > eta_max * (1.0 + kEtaSlack)) {
        throw ParameterError("InnerLoopSpec: eta must lie in (0, (1-gamma)/alpha]");
    }
    if (spec.steps < 1) throw ParameterError("InnerLoopSpec: steps must be >= 1");
    if (spec.direction_reward.rows() != mdp.num_states() || spec.direction_reward.cols() != mdp.num_actions()) {
        throw ParameterError("InnerLoopSpec: direction reward shape does not match the MDP");
    }
    if (!spec.direction_reward.allFinite()) {
        throw ParameterError("InnerLoopSpec: direction reward must be finite");
    }
    if (spec.anchor.num_states() != mdp.num_states() || spec.anchor.num_actions() != mdp.num_actions()) {
        throw ParameterError("InnerLoopSpec: anchor shape does not match the MDP");
    }
}

Eigen::MatrixXd ExactEstimator::regularized_q(const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor,
                                              double alpha, const SoftmaxPolicy& policy) {
    const PolicyEvaluator evaluator(mdp_, policy);
    if (alpha == 0.0) return evaluator.evaluate(reward).q;
    const Eigen::MatrixXd effective = reward + alpha * anchor.log_probs();
    const Eigen::VectorXd v = evaluator.solve_state_values(
        regularized_state_reward(evaluator.probs(), policy.log_probs(), effective, alpha));
    return effective + mdp_.gamma() * expected_next(mdp_, v);
}

ValueVector ExactEstimator::values(const SoftmaxPolicy& policy) { return value_vector(mdp_, policy); }

Evaluation regularized_q(const TabularMdp& mdp, const InnerLoopSpec& spec, const SoftmaxPolicy& policy) {
    validate(spec, mdp);
    const PolicyEvaluator evaluator(mdp, policy);
    const Eigen::MatrixXd effective = spec.direction_reward + spec.alpha * spec.anchor.log_probs();
    Evaluation out;
    out.v = evaluator.solve_state_values(
        regularized_state_reward(evaluator.probs(), policy.log_probs(), effective, spec.alpha));
    out.q = effective + mdp.gamma() * expected_next(mdp, out.v);
    return out;
}

SoftmaxPolicy npg_update(const SoftmaxPolicy& current, const Eigen::MatrixXd& q_reg, double alpha, double eta,
                         double gamma) {
    const double keep = 1.0 - eta * alpha / (1.0 - gamma);
    const double step = eta / (1.0 - gamma);
    const Eigen::MatrixXd logits = keep * current.log_probs() + step * q_reg;
    return SoftmaxPolicy(log_softmax_rows(logits));
}

SoftmaxPolicy inner_loop(const InnerLoopSpec& spec, double gamma, Estimator& estimator) {
    SoftmaxPolicy current = spec.anchor;
    for (int t = 0; t < spec.steps; ++t) {
        const Eigen::MatrixXd q = estimator.regularized_q(spec.direction_reward, spec.anchor, spec.alpha, current);
        current = npg_update(current, q, spec.alpha, spec.eta, gamma);
    }
    return current;
}

SoftmaxPolicy inner_loop(const TabularMdp& mdp, const InnerLoopSpec& spec) {
    validate(spec, mdp);
    ExactEstimator exact(mdp);
    return inner_loop(spec, mdp.gamma(), exact);
}

std::vector<SoftmaxPolicy> inner_loop_iterates(const TabularMdp& mdp, const InnerLoopSpec& spec) {
    validate(spec, mdp);
    ExactEstimator exact(mdp);
    std::vector<SoftmaxPolicy> iterates{spec.anchor};
    iterates.reserve(static_cast<std::size_t>(spec.steps) + 1);
    for (int t = 0; t < spec.steps; ++t) {
        const Eigen::MatrixXd q = exact.regularized_q(spec.direction_reward, spec.anchor, spec.alpha, iterates.back());
        iterates.push_back(npg_update(iterates.back(), q, spec.alpha, spec.eta, mdp.gamma()));
    }
    return iterates;
}

int inner_steps_for_accuracy(double gamma, double reward_sup, double epsilon) {
    if (!(epsilon > 0.0)) throw ParameterError("inner_steps_for_accuracy: epsilon must be > 0");
    if (reward_sup <= 0.0) return 1;
    const double one_minus = 1.0 - gamma;
    const double raw = std::log(5.0 * reward_sup / (one_minus * one_minus * epsilon)) / one_minus + 1.0;
    return std::max(1, static_cast<int>(std::ceil(raw)));
}

FundamentalInequality fundamental_inequality_check(const TabularMdp& mdp, const InnerLoopSpec& spec,
                                         const SoftmaxPolicy& comparison, double epsilon) {
    validate(spec, mdp);
    const double gamma = mdp.gamma();
    const double prescribed_eta = default_inner_eta(spec.alpha, gamma);
    if (std::abs(spec.eta - prescribed_eta) > kEtaSlack * prescribed_eta) {
        throw ParameterError("fundamental_inequality_check: eta must equal (1-gamma)/alpha");
    }
    const double reward_sup = spec.direction_reward.lpNorm<Eigen::Infinity>();
    if (spec.steps < inner_steps_for_accuracy(gamma, reward_sup, epsilon)) {
        throw ParameterError("fundamental_inequality_check: steps below the prescribed lower bound");
    }
    const SoftmaxPolicy next = inner_loop(mdp, spec);

    const PolicyEvaluator eval_next(mdp, next);
    const PolicyEvaluator eval_cmp(mdp, comparison);
    const double scale = spec.alpha / (1.0 - gamma);

    FundamentalInequality out;
    out.lhs = eval_next.value_at_rho(spec.direction_reward) -
              scale * weighted_kl(eval_next.state_visitation(), next, spec.anchor);
    const Eigen::VectorXd& d_cmp = eval_cmp.state_visitation();
    out.rhs = eval_cmp.value_at_rho(spec.direction_reward) -
              scale * (weighted_kl(d_cmp, comparison, spec.anchor) - weighted_kl(d_cmp, comparison, next)) - epsilon;
    out.slack = out.lhs - out.rhs;
    out.holds = out.slack >= 0.0;
    return out;
}

}  // namespace arnpg
