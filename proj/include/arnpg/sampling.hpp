#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "arnpg/inner_loop.hpp"
#include "arnpg/mdp.hpp"
#include "arnpg/rng.hpp"
#include "arnpg/run.hpp"

namespace arnpg {

/// Generative model: independent next-state draws from any (s, a).
class GenerativeSampler {
public:
    explicit GenerativeSampler(const TabularMdp& mdp) : mdp_(&mdp) {}
    const TabularMdp& mdp() const noexcept { return *mdp_; }
    /// Inverse-CDF draw from P(.|s,a).
    int next_state(int s, int a, Rng& rng) const;
    /// Inverse-CDF draw from a probability row.
    static int draw(const Eigen::Ref<const Eigen::RowVectorXd>& probs, Rng& rng);

private:
    const TabularMdp* mdp_;
};

struct EstimatorConfig {
    int horizon = 28;  // bias <= 0.01 at gamma = 0.8
    int batch = 10;    // rollouts per (s,a) for Q, per start state for V
    std::uint64_t seed = 0;
};

/// Smallest H with gamma^H / (1 - gamma) <= bias.
int horizon_for_bias(double gamma, double bias);
/// gamma^H / (1 - gamma), the truncation bias for rewards in [0, 1].
double truncation_bias(double gamma, int horizon);

struct QEstimate {
    Eigen::MatrixXd mean;
    Eigen::MatrixXd std_error;  // empirical std / sqrt(batch)
};

struct ValueEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Truncated Monte-Carlo Q of `reward` under `policy`. Each (s,a) uses its own
/// stream split_seed(cfg.seed, s*A + a), so results do not depend on the
/// order in which pairs are visited.
QEstimate mc_q_estimate(const GenerativeSampler& sampler, const SoftmaxPolicy& policy, const Eigen::MatrixXd& reward,
                        const EstimatorConfig& cfg);

/// Regularized variant: the first step earns r + alpha log anchor, later
/// steps earn r + alpha log anchor - alpha log pi. alpha = 0 is mc_q_estimate.
QEstimate mc_regularized_q(const GenerativeSampler& sampler, const SoftmaxPolicy& policy,
                           const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor, double alpha,
                           const EstimatorConfig& cfg);

/// V(rho) stratified over start states: `batch` rollouts from every state s
/// (stream split_seed(cfg.seed, S*A + s)), combined with weights rho(s).
ValueEstimate mc_value_estimate(const GenerativeSampler& sampler, const SoftmaxPolicy& policy,
                                const Eigen::MatrixXd& reward, const EstimatorConfig& cfg);

/// All m objectives from the same trajectories.
ValueVector mc_values(const GenerativeSampler& sampler, const SoftmaxPolicy& policy, const EstimatorConfig& cfg);

/// Estimator backed by rollouts. Call number n uses seed split_seed(cfg.seed, n),
/// so a run is reproducible for a fixed call sequence.
class SampledEstimator final : public Estimator {
public:
    SampledEstimator(const TabularMdp& mdp, EstimatorConfig cfg);
    Eigen::MatrixXd regularized_q(const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor, double alpha,
                                  const SoftmaxPolicy& policy) override;
    ValueVector values(const SoftmaxPolicy& policy) override;
    long long calls() const noexcept { return calls_; }

private:
    EstimatorConfig next_config();

    GenerativeSampler sampler_;
    EstimatorConfig cfg_;
    long long calls_ = 0;
};

/// Runs `id` with every Q~ and V replaced by rollout estimates. Records still
/// report exact values of the iterates; metadata["estimator"] holds cfg.
RunHistory sampled_run(AlgorithmId id, const TabularMdp& mdp, const CriterionSpec& criterion,
                       const Hyperparameters& hyper, const EstimatorConfig& cfg);

}  // namespace arnpg
