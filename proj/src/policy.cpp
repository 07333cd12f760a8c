#include "arnpg/policy.hpp"

#include <cmath>

#include "arnpg/error.hpp"
#include "arnpg/mdp.hpp"

namespace arnpg {

SoftmaxPolicy::SoftmaxPolicy(Eigen::MatrixXd logits) : logits_(std::move(logits)) {
    if (logits_.rows() == 0 || logits_.cols() == 0) {
        throw ParameterError("SoftmaxPolicy: logits must have at least one state and one action");
    }
    if (!logits_.allFinite()) {
        throw ParameterError("SoftmaxPolicy: logits must be finite");
    }
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
        const double top = logits.row(s).maxCoeff();
        const double lse = top + std::log((logits.row(s).array() - top).exp().sum());
        out.row(s) = logits.row(s).array() - lse;
    }
    return out;
}

Eigen::MatrixXd SoftmaxPolicy::log_probs() const { return log_softmax_rows(logits_); }

Eigen::MatrixXd SoftmaxPolicy::probs() const {
    Eigen::MatrixXd out(logits_.rows(), logits_.cols());
    for (Eigen::Index s = 0; s < logits_.rows(); ++s) {
        const auto shifted = (logits_.row(s).array() - logits_.row(s).maxCoeff()).exp();
        out.row(s) = shifted / shifted.sum();
    }
    return out;
}

Eigen::MatrixXd action_probs(const SoftmaxPolicy& policy) { return policy.probs(); }

SoftmaxPolicy uniform_policy(int num_states, int num_actions) {
    if (num_states < 1 || num_actions < 1) {
        throw ParameterError("uniform_policy: counts must be >= 1");
    }
    return SoftmaxPolicy(Eigen::MatrixXd::Zero(num_states, num_actions));
}

Eigen::VectorXd state_kl(const SoftmaxPolicy& p, const SoftmaxPolicy& q) {
    if (p.num_states() != q.num_states() || p.num_actions() != q.num_actions()) {
        throw ParameterError("state_kl: policy shapes differ");
    }
    const Eigen::MatrixXd log_p = p.log_probs();
    const Eigen::MatrixXd log_q = q.log_probs();
    const Eigen::MatrixXd prob_p = log_p.array().exp();
    Eigen::VectorXd kl = (prob_p.array() * (log_p - log_q).array()).rowwise().sum();
    // KL is nonnegative; clamp away round-off below zero.
    return kl.cwiseMax(0.0);
}

double weighted_kl(const Eigen::VectorXd& state_dist, const SoftmaxPolicy& p, const SoftmaxPolicy& q) {
    if (state_dist.size() != p.num_states()) {
        throw ParameterError("weighted_kl: state distribution size mismatch");
    }
    return state_dist.dot(state_kl(p, q));
}

double pseudo_kl(const OccupancyMeasure& d, const OccupancyMeasure& d_prime) {
    if (d.d.rows() != d_prime.d.rows() || d.d.cols() != d_prime.d.cols()) {
        throw ParameterError("pseudo_kl: occupancy shapes differ");
    }
    const Eigen::VectorXd marg = d.state_marginal();
    const Eigen::VectorXd marg_prime = d_prime.state_marginal();
    double total = 0.0;
    for (Eigen::Index s = 0; s < d.d.rows(); ++s) {
        if (marg(s) <= 0.0) continue;
        for (Eigen::Index a = 0; a < d.d.cols(); ++a) {
            const double mass = d.d(s, a);
            if (mass <= 0.0) continue;
            const double cond = mass / marg(s);
            const double cond_prime = d_prime.d(s, a) / marg_prime(s);
            total += mass * (std::log(cond) - std::log(cond_prime));
        }
    }
    return total;
}

}  // namespace arnpg
