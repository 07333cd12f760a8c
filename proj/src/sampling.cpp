#include "arnpg/sampling.hpp"

#include <cmath>

#include "arnpg/error.hpp"

namespace arnpg {

namespace {

void check_config(const EstimatorConfig& cfg) {
    if (cfg.horizon < 1) throw ParameterError("estimator: horizon must be >= 1");
    if (cfg.batch < 1) throw ParameterError("estimator: batch must be >= 1");
}

/// Welford accumulator.
struct Moments {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    double std_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

/// One truncated rollout from (s, a): sum_t gamma^t step_reward(t, s_t, a_t).
template <typename StepReward>
double rollout(const GenerativeSampler& sampler, const Eigen::MatrixXd& probs, int s, int a, int horizon, Rng& rng,
               StepReward&& step_reward) {
    const double gamma = sampler.mdp().gamma();
    double total = 0.0;
    double discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
        total += discount * step_reward(t, s, a);
        if (t + 1 == horizon) break;
        s = sampler.next_state(s, a, rng);
        a = GenerativeSampler::draw(probs.row(s), rng);
        discount *= gamma;
    }
    return total;
}

}  // namespace

int GenerativeSampler::draw(const Eigen::Ref<const Eigen::RowVectorXd>& probs, Rng& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    const Eigen::Index last = probs.size() - 1;
    for (Eigen::Index i = 0; i < last; ++i) {
        cumulative += probs(i);
        if (u < cumulative) return static_cast<int>(i);
    }
    return static_cast<int>(last);
}

int GenerativeSampler::next_state(int s, int a, Rng& rng) const { return draw(mdp_->transition_row(s, a), rng); }

int horizon_for_bias(double gamma, double bias) {
    if (!(gamma > 0.0 && gamma < 1.0) || !(bias > 0.0)) throw ParameterError("horizon_for_bias: bad arguments");
    return std::max(1, static_cast<int>(std::ceil(std::log(bias * (1.0 - gamma)) / std::log(gamma))));
}

double truncation_bias(double gamma, int horizon) { return std::pow(gamma, horizon) / (1.0 - gamma); }

QEstimate mc_regularized_q(const GenerativeSampler& sampler, const SoftmaxPolicy& policy,
                           const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor, double alpha,
                           const EstimatorConfig& cfg) {
    check_config(cfg);
    const TabularMdp& mdp = sampler.mdp();
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (reward.rows() != S || reward.cols() != A) throw ParameterError("mc_q_estimate: reward shape mismatch");
    const Eigen::MatrixXd probs = policy.probs();
    const Eigen::MatrixXd first = alpha == 0.0 ? reward : Eigen::MatrixXd(reward + alpha * anchor.log_probs());
    const Eigen::MatrixXd tail = alpha == 0.0 ? reward : Eigen::MatrixXd(first - alpha * policy.log_probs());
    auto step_reward = [&](int t, int s, int a) { return t == 0 ? first(s, a) : tail(s, a); };

    QEstimate out{Eigen::MatrixXd(S, A), Eigen::MatrixXd(S, A)};
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(s) * A + a));
            Moments moments;
            for (int n = 0; n < cfg.batch; ++n) moments.add(rollout(sampler, probs, s, a, cfg.horizon, rng, step_reward));
            out.mean(s, a) = moments.mean;
            out.std_error(s, a) = moments.std_error();
        }
    }
    return out;
}

QEstimate mc_q_estimate(const GenerativeSampler& sampler, const SoftmaxPolicy& policy, const Eigen::MatrixXd& reward,
                        const EstimatorConfig& cfg) {
    return mc_regularized_q(sampler, policy, reward, policy, 0.0, cfg);
}

namespace {

/// Per-state rollouts of several rewards at once; returns rho-weighted means
/// and, for the first reward, the stratified standard error.
std::pair<Eigen::VectorXd, double> stratified_values(const GenerativeSampler& sampler, const SoftmaxPolicy& policy,
                                                     const std::vector<const Eigen::MatrixXd*>& rewards,
                                                     const EstimatorConfig& cfg) {
    check_config(cfg);
    const TabularMdp& mdp = sampler.mdp();
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const Eigen::MatrixXd probs = policy.probs();
    const Eigen::Index m = static_cast<Eigen::Index>(rewards.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    double variance = 0.0;
    for (int s0 = 0; s0 < S; ++s0) {
        const double weight = mdp.rho()(s0);
        if (weight == 0.0) continue;
        Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(S) * A + s0));
        std::vector<Moments> moments(rewards.size());
        for (int n = 0; n < cfg.batch; ++n) {
            Eigen::VectorXd totals = Eigen::VectorXd::Zero(m);
            int a0 = GenerativeSampler::draw(probs.row(s0), rng);
            rollout(sampler, probs, s0, a0, cfg.horizon, rng, [&](int t, int s, int a) {
                const double discount = std::pow(mdp.gamma(), t);
                for (Eigen::Index i = 0; i < m; ++i) totals(i) += discount * (*rewards[static_cast<std::size_t>(i)])(s, a);
                return 0.0;
            });
            for (Eigen::Index i = 0; i < m; ++i) moments[static_cast<std::size_t>(i)].add(totals(i));
        }
        for (Eigen::Index i = 0; i < m; ++i) mean(i) += weight * moments[static_cast<std::size_t>(i)].mean;
        const double se = moments.front().std_error();
        variance += weight * weight * se * se;
    }
    return {mean, std::sqrt(variance)};
}

}  // namespace

ValueEstimate mc_value_estimate(const GenerativeSampler& sampler, const SoftmaxPolicy& policy,
                                const Eigen::MatrixXd& reward, const EstimatorConfig& cfg) {
    const auto [mean, se] = stratified_values(sampler, policy, {&reward}, cfg);
    return {mean(0), se};
}

ValueVector mc_values(const GenerativeSampler& sampler, const SoftmaxPolicy& policy, const EstimatorConfig& cfg) {
    std::vector<const Eigen::MatrixXd*> rewards;
    for (const Eigen::MatrixXd& r : sampler.mdp().rewards()) rewards.push_back(&r);
    return stratified_values(sampler, policy, rewards, cfg).first;
}

SampledEstimator::SampledEstimator(const TabularMdp& mdp, EstimatorConfig cfg) : sampler_(mdp), cfg_(cfg) {
    check_config(cfg_);
}

EstimatorConfig SampledEstimator::next_config() {
    EstimatorConfig cfg = cfg_;
    cfg.seed = split_seed(cfg_.seed, static_cast<std::uint64_t>(calls_++));
    return cfg;
}

Eigen::MatrixXd SampledEstimator::regularized_q(const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor,
                                                double alpha, const SoftmaxPolicy& policy) {
    return mc_regularized_q(sampler_, policy, reward, anchor, alpha, next_config()).mean;
}

ValueVector SampledEstimator::values(const SoftmaxPolicy& policy) { return mc_values(sampler_, policy, next_config()); }

RunHistory sampled_run(AlgorithmId id, const TabularMdp& mdp, const CriterionSpec& criterion,
                       const Hyperparameters& hyper, const EstimatorConfig& cfg) {
    SampledEstimator estimator(mdp, cfg);
    RunHistory history = run_algorithm(id, mdp, criterion, hyper, &estimator);
    history.metadata["sampled"] = true;
    history.metadata["estimator"] = {{"horizon", cfg.horizon},
                                     {"batch", cfg.batch},
                                     {"sample_seed", cfg.seed},
                                     {"truncation_bias", truncation_bias(mdp.gamma(), cfg.horizon)},
                                     {"estimator_calls", estimator.calls()}};
    return history;
}

}  // namespace arnpg
