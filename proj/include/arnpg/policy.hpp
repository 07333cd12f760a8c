#pragma once

#include <Eigen/Dense>

namespace arnpg {

struct OccupancyMeasure;

/// Tabular softmax policy pi(a|s) = exp(theta[s][a]) / sum_b exp(theta[s][b]).
///
/// Only logits are stored. Probabilities and log-probabilities are always
/// derived (shift-by-max), so normalization can never drift and every
/// action keeps strictly positive mass.
class SoftmaxPolicy {
public:
    SoftmaxPolicy() = default;
    /// Throws ParameterError on empty shape or non-finite logits.
    explicit SoftmaxPolicy(Eigen::MatrixXd logits);

    int num_states() const noexcept { return static_cast<int>(logits_.rows()); }
    int num_actions() const noexcept { return static_cast<int>(logits_.cols()); }
    const Eigen::MatrixXd& logits() const noexcept { return logits_; }

    /// Row-wise log-softmax of the logits.
    Eigen::MatrixXd log_probs() const;
    /// Row-wise softmax; rows sum to 1 within 1e-12.
    Eigen::MatrixXd probs() const;

private:
    Eigen::MatrixXd logits_;
};

/// Row-wise softmax of an arbitrary logit table.
Eigen::MatrixXd action_probs(const SoftmaxPolicy& policy);

/// Row-wise log-softmax, computed as theta - max - log(sum exp(theta - max)).
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits);

SoftmaxPolicy uniform_policy(int num_states, int num_actions);

/// Sum_s d(s) KL(p(.|s) || q(.|s)), evaluated in log space from logits.
double weighted_kl(const Eigen::VectorXd& state_dist, const SoftmaxPolicy& p, const SoftmaxPolicy& q);

/// Per-state KL(p(.|s) || q(.|s)).
Eigen::VectorXd state_kl(const SoftmaxPolicy& p, const SoftmaxPolicy& q);

/// Pseudo-KL between occupancy measures:
///   sum_{s,a} d(s,a) log[(d(s,a)/d(s)) / (d'(s,a)/d'(s))].
/// States with d(s) = 0 contribute 0.
double pseudo_kl(const OccupancyMeasure& d, const OccupancyMeasure& d_prime);

}  // namespace arnpg
