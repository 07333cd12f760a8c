#include "arnpg/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "arnpg/error.hpp"

namespace arnpg {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_common(const TabularMdp& mdp, const Eigen::VectorXd* thresholds, double eta, int macro_steps,
                  const char* who) {
    if (!(eta > 0.0)) throw ParameterError(std::string(who) + ": eta must be > 0");
    if (macro_steps < 0) throw ParameterError(std::string(who) + ": macro_steps must be >= 0");
    if (thresholds != nullptr && thresholds->size() != mdp.num_objectives() - 1) {
        throw ParameterError(std::string(who) + ": need one threshold per constraint (m - 1)");
    }
}

SoftmaxPolicy npg_step(Estimator& source, const Eigen::MatrixXd& reward, const SoftmaxPolicy& policy, double eta,
                       double gamma) {
    const Eigen::MatrixXd q = source.regularized_q(reward, policy, 0.0, policy);
    return npg_update(policy, q, 0.0, eta, gamma);
}

/// Fills the CMDP columns of a record whose `values` are already set.
void fill_constrained(RunRecord& record, ValueVector& value_sum, const Eigen::VectorXd& b,
                      const std::optional<double>& optimum) {
    const Eigen::Index nc = b.size();
    value_sum += record.values;
    const ValueVector average = value_sum / record.k;
    record.avg_signed_violation = b - average.tail(nc);
    record.avg_violation = record.avg_signed_violation.cwiseMax(0.0);
    record.last_violation = b - record.values.tail(nc);
    if (optimum) record.avg_gap = *optimum - average(0);
}

RunHistory start_history(AlgorithmId id, const TabularMdp& mdp, int constraints, int macro_steps) {
    RunHistory history;
    history.algorithm = id;
    history.num_objectives = mdp.num_objectives();
    history.num_constraints = constraints;
    history.dual_first_index = constraints > 0 ? 2 : 1;
    history.records.reserve(static_cast<std::size_t>(macro_steps));
    return history;
}

void finish_history(RunHistory& history, const SoftmaxPolicy& policy, const ValueVector& value_sum, int macro_steps,
                    int m) {
    history.final_policy = policy;
    history.returned_policy = policy;
    history.returned_index = macro_steps;
    history.average_values = macro_steps > 0 ? ValueVector(value_sum / macro_steps) : ValueVector::Zero(m);
    history.metadata["returned"] = "last iterate";
}

}  // namespace

RunHistory npg_pd(const TabularMdp& mdp, const NpgPdOptions& options, Estimator* estimator) {
    check_common(mdp, &options.thresholds, options.eta, options.macro_steps, "npg_pd");
    if (!(options.eta_prime > 0.0)) throw ParameterError("npg_pd: eta' must be > 0");
    if (!(options.lambda_max > 0.0)) throw ParameterError("npg_pd: lambda_max must be > 0");
    const int m = mdp.num_objectives();
    const Eigen::VectorXd& b = options.thresholds;

    ExactEstimator exact(mdp);
    const bool exact_mode = estimator == nullptr;
    Estimator& source = exact_mode ? static_cast<Estimator&>(exact) : *estimator;

    RunHistory history = start_history(AlgorithmId::npg_pd, mdp, m - 1, options.macro_steps);
    history.metadata["lambda_max"] = options.lambda_max;

    SoftmaxPolicy policy = uniform_policy(mdp.num_states(), mdp.num_actions());
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m - 1);
    ValueVector estimated = source.values(policy);
    ValueVector value_sum = ValueVector::Zero(m);
    const auto start = Clock::now();

    for (int k = 0; k < options.macro_steps; ++k) {
        Eigen::MatrixXd reward = mdp.reward(0);
        for (int i = 0; i < m - 1; ++i) reward += lambda(i) * mdp.reward(i + 1);
        policy = npg_step(source, reward, policy, options.eta, mdp.gamma());
        for (int i = 0; i < m - 1; ++i) {
            lambda(i) = std::clamp(lambda(i) - options.eta_prime * (estimated(i + 1) - b(i)), 0.0, options.lambda_max);
        }
        estimated = source.values(policy);

        RunRecord record;
        record.k = k + 1;
        record.inner_steps = 1;
        record.cumulative_iterations = record.k;
        record.values = exact_mode ? estimated : value_vector(mdp, policy);
        record.duals = lambda;
        fill_constrained(record, value_sum, b, options.optimum);
        record.wall_ms = elapsed_ms(start);
        history.records.push_back(std::move(record));
    }
    finish_history(history, policy, value_sum, options.macro_steps, m);
    return history;
}

RunHistory crpo(const TabularMdp& mdp, const CrpoOptions& options, Estimator* estimator) {
    check_common(mdp, &options.thresholds, options.eta, options.macro_steps, "crpo");
    if (!(options.tolerance >= 0.0)) throw ParameterError("crpo: tolerance must be >= 0");
    const int m = mdp.num_objectives();
    const Eigen::VectorXd& b = options.thresholds;

    ExactEstimator exact(mdp);
    const bool exact_mode = estimator == nullptr;
    Estimator& source = exact_mode ? static_cast<Estimator&>(exact) : *estimator;

    RunHistory history = start_history(AlgorithmId::crpo, mdp, m - 1, options.macro_steps);
    history.metadata["tolerance"] = options.tolerance;

    SoftmaxPolicy policy = uniform_policy(mdp.num_states(), mdp.num_actions());
    ValueVector estimated = source.values(policy);
    ValueVector value_sum = ValueVector::Zero(m);
    const auto start = Clock::now();

    for (int k = 0; k < options.macro_steps; ++k) {
        int target = 0;
        for (int i = 0; i < m - 1; ++i) {
            if (estimated(i + 1) < b(i) - options.tolerance) {
                target = i + 1;
                break;
            }
        }
        policy = npg_step(source, mdp.reward(target), policy, options.eta, mdp.gamma());
        estimated = source.values(policy);

        RunRecord record;
        record.k = k + 1;
        record.inner_steps = 1;
        record.cumulative_iterations = record.k;
        record.values = exact_mode ? estimated : value_vector(mdp, policy);
        record.step_target = target;
        fill_constrained(record, value_sum, b, options.optimum);
        record.wall_ms = elapsed_ms(start);
        history.records.push_back(std::move(record));
    }
    finish_history(history, policy, value_sum, options.macro_steps, m);
    return history;
}

RunHistory mo_npg(const TabularMdp& mdp, const MaxMinBifunction& phi, const MoNpgOptions& options,
                  Estimator* estimator) {
    check_common(mdp, nullptr, options.eta, options.macro_steps, "mo_npg");
    const int m = mdp.num_objectives();
    if (phi.scales.size() != m) throw ParameterError("mo_npg: scale vector does not match the MDP");

    ExactEstimator exact(mdp);
    const bool exact_mode = estimator == nullptr;
    Estimator& source = exact_mode ? static_cast<Estimator&>(exact) : *estimator;

    RunHistory history = start_history(AlgorithmId::mo_npg, mdp, 0, options.macro_steps);

    SoftmaxPolicy policy = uniform_policy(mdp.num_states(), mdp.num_actions());
    ValueVector estimated = source.values(policy);
    ValueVector value_sum = ValueVector::Zero(m);
    const auto start = Clock::now();

    for (int k = 0; k < options.macro_steps; ++k) {
        const int j = maxmin_argmin(phi, estimated);
        policy = npg_step(source, mdp.reward(j) / phi.scales(j), policy, options.eta, mdp.gamma());
        estimated = source.values(policy);

        RunRecord record;
        record.k = k + 1;
        record.inner_steps = 1;
        record.cumulative_iterations = record.k;
        record.values = exact_mode ? estimated : value_vector(mdp, policy);
        record.step_target = j;
        value_sum += record.values;
        const double f_avg = maxmin_value(phi, value_sum / record.k);
        record.scalarized = f_avg;
        if (options.optimum) record.avg_gap = *options.optimum - f_avg;
        record.wall_ms = elapsed_ms(start);
        history.records.push_back(std::move(record));
    }
    finish_history(history, policy, value_sum, options.macro_steps, m);
    history.metadata["scalarized_column"] = "F at the running-average value vector";
    return history;
}

}  // namespace arnpg
