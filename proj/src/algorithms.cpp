#include "arnpg/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "arnpg/error.hpp"
#include "arnpg/rng.hpp"

namespace arnpg {

namespace {

constexpr double kConditionSlack = 1e-12;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

int ceil_schedule(double log_argument, double gamma) {
    const double raw = std::log(log_argument) / (1.0 - gamma) + 1.0;
    return std::max(1, static_cast<int>(std::ceil(raw)));
}

void check_step_sizes(double alpha, double eta, double gamma, const char* who) {
    if (!(alpha > 0.0)) throw ParameterError(std::string(who) + ": alpha must be > 0");
    if (!(eta > 0.0) || eta > (1.0 - gamma) / alpha * (1.0 + kConditionSlack)) {
        throw ParameterError(std::string(who) + ": eta must lie in (0, (1-gamma)/alpha]");
    }
}

void require_theorem_condition(bool ok, const std::string& message) {
    if (!ok) throw ParameterError("theorem mode: " + message);
}

void require_prescribed_eta(double alpha, double eta, double gamma) {
    const double prescribed = (1.0 - gamma) / alpha;
    require_theorem_condition(std::abs(eta - prescribed) <= kConditionSlack * prescribed,
                              "eta must equal (1-gamma)/alpha");
}

/// Values used for reporting are always exact, whatever the algorithm saw.
ValueVector reported_values(const TabularMdp& mdp, const SoftmaxPolicy& policy, const ValueVector& estimated,
                            bool exact_mode) {
    return exact_mode ? estimated : value_vector(mdp, policy);
}

std::string format_bound_failure(const char* what, int k, double measured, double bound) {
    std::ostringstream os;
    os.precision(17);
    os << what << " violated at k=" << k << ": measured " << measured << " > bound " << bound;
    return os.str();
}

}  // namespace

std::string to_string(AlgorithmId id) {
    switch (id) {
        case AlgorithmId::imd: return "imd";
        case AlgorithmId::epd: return "epd";
        case AlgorithmId::omda: return "omda";
        case AlgorithmId::npg_pd: return "npg_pd";
        case AlgorithmId::crpo: return "crpo";
        case AlgorithmId::mo_npg: return "mo_npg";
    }
    return "unknown";
}

AlgorithmId algorithm_from_string(const std::string& name) {
    for (AlgorithmId id : {AlgorithmId::imd, AlgorithmId::epd, AlgorithmId::omda, AlgorithmId::npg_pd,
                           AlgorithmId::crpo, AlgorithmId::mo_npg}) {
        if (to_string(id) == name) return id;
    }
    throw ParameterError("unknown algorithm '" + name + "'");
}

int tk_schedule(const ScheduleSpec& spec, const DualState* dual) {
    if (spec.mode == ScheduleMode::fixed) {
        if (spec.fixed_steps < 1) throw ParameterError("tk_schedule: fixed t must be >= 1");
        return spec.fixed_steps;
    }
    if (spec.num_actions < 2) throw ParameterError("tk_schedule: theorem mode needs at least two actions");
    if (spec.horizon < 1) throw ParameterError("tk_schedule: horizon K must be >= 1");
    const double log_actions = std::log(static_cast<double>(spec.num_actions));
    const double k_total = spec.horizon;
    switch (spec.rule) {
        case ScheduleRule::imd:
            if (!(spec.smoothness > 0.0)) throw ParameterError("tk_schedule: imd rule needs beta > 0");
            return ceil_schedule(5.0 * spec.lipschitz * k_total / (spec.smoothness * log_actions), spec.gamma);
        case ScheduleRule::omda:
            if (!(spec.smoothness > 0.0)) throw ParameterError("tk_schedule: omda rule needs beta > 0");
            return ceil_schedule(5.0 * spec.lipschitz * k_total / (6.0 * spec.smoothness * log_actions), spec.gamma);
        case ScheduleRule::epd: {
            const double dual_sum = dual != nullptr ? dual->lambda.sum() : 0.0;
            const double lk = 1.0 + spec.eta_prime * (spec.num_objectives - 1) / (1.0 - spec.gamma) + dual_sum;
            return ceil_schedule(5.0 * lk * k_total / (2.0 * spec.eta_prime * spec.num_objectives * log_actions),
                                 spec.gamma);
        }
    }
    return 1;
}

double imd_gap_bound(double alpha, double gamma, int num_actions, int k) {
    return 2.0 * alpha * std::log(static_cast<double>(num_actions)) / ((1.0 - gamma) * k);
}

double epd_gap_bound(double alpha, double gamma, int num_actions, int k) {
    return 3.0 * alpha * std::log(static_cast<double>(num_actions)) / ((1.0 - gamma) * k);
}

double epd_violation_bound(double alpha, double gamma, int num_actions, double eta_prime, double dual_norm, int k) {
    const double log_actions = std::log(static_cast<double>(num_actions));
    return (2.0 * dual_norm / eta_prime + 3.0 * std::sqrt(alpha * log_actions / ((1.0 - gamma) * eta_prime))) / k;
}

double omda_gap_bound(double alpha, double gamma, int num_actions, double eta_prime, int num_objectives, int k) {
    return 3.0 * alpha * std::log(static_cast<double>(num_actions)) / ((1.0 - gamma) * k) +
           std::log(static_cast<double>(num_objectives)) / (eta_prime * k);
}

// ---------------------------------------------------------------------------
// ARNPG-IMD

RunHistory arnpg_imd(const TabularMdp& mdp, const SmoothScalarizer& scalarizer, const ImdOptions& options,
                     Estimator* estimator) {
    const double gamma = mdp.gamma();
    check_step_sizes(options.alpha, options.eta, gamma, "arnpg_imd");
    if (options.macro_steps < 0) throw ParameterError("arnpg_imd: macro_steps must be >= 0");
    if (scalarizer.weights.size() != mdp.num_objectives()) {
        throw ParameterError("arnpg_imd: scalarizer dimension does not match the MDP");
    }

    ScheduleSpec schedule = options.schedule;
    const bool theorem = schedule.mode == ScheduleMode::theorem;
    if (theorem) {
        schedule.rule = ScheduleRule::imd;
        schedule.horizon = std::max(1, options.macro_steps);
        schedule.lipschitz = scalarizer.lipschitz();
        schedule.smoothness = scalarizer.smoothness();
        schedule.num_objectives = mdp.num_objectives();
        schedule.num_actions = mdp.num_actions();
        schedule.gamma = gamma;
        const double min_alpha = schedule.smoothness / std::pow(1.0 - gamma, 3);
        require_theorem_condition(options.alpha >= min_alpha * (1.0 - kConditionSlack),
                                  "alpha must be >= beta/(1-gamma)^3");
        require_prescribed_eta(options.alpha, options.eta, gamma);
    }

    ExactEstimator exact(mdp);
    const bool exact_mode = estimator == nullptr;
    Estimator& source = exact_mode ? static_cast<Estimator&>(exact) : *estimator;

    RunHistory history;
    history.algorithm = AlgorithmId::imd;
    history.num_objectives = mdp.num_objectives();
    history.records.reserve(static_cast<std::size_t>(options.macro_steps));

    SoftmaxPolicy policy = uniform_policy(mdp.num_states(), mdp.num_actions());
    history.returned_policy = policy;
    ValueVector estimated = source.values(policy);
    ValueVector value_sum = ValueVector::Zero(mdp.num_objectives());
    double f_sum = 0.0;
    double best_f = -std::numeric_limits<double>::infinity();
    long long total_steps = 0;
    const auto start = Clock::now();

    for (int k = 0; k < options.macro_steps; ++k) {
        const ScalarizedValue grad = scalarize(scalarizer, estimated);
        InnerLoopSpec spec{direction_reward(grad.gradient, mdp), policy, options.alpha, options.eta,
                           tk_schedule(schedule)};
        validate(spec, mdp);
        policy = inner_loop(spec, gamma, source);
        estimated = source.values(policy);

        RunRecord record;
        record.k = k + 1;
        record.inner_steps = spec.steps;
        total_steps += spec.steps;
        record.cumulative_iterations = total_steps;
        record.values = reported_values(mdp, policy, estimated, exact_mode);
        const double f = scalarize(scalarizer, record.values).value;
        record.scalarized = f;
        f_sum += f;
        value_sum += record.values;
        if (options.optimum) {
            record.avg_gap = *options.optimum - f_sum / record.k;
            if (theorem) {
                const double bound = imd_gap_bound(options.alpha, gamma, mdp.num_actions(), record.k);
                if (*record.avg_gap > bound) {
                    throw NumericalError(format_bound_failure("IMD average-gap bound", record.k, *record.avg_gap, bound));
                }
            }
        }
        if (f > best_f) {
            best_f = f;
            history.returned_policy = policy;
            history.returned_index = record.k;
        }
        record.wall_ms = elapsed_ms(start);
        history.records.push_back(std::move(record));
    }

    history.final_policy = policy;
    history.average_values =
        options.macro_steps > 0 ? ValueVector(value_sum / options.macro_steps) : ValueVector::Zero(mdp.num_objectives());
    history.metadata["returned"] = "largest F iterate (earliest on ties)";
    return history;
}

// ---------------------------------------------------------------------------
// ARNPG-EPD

DualState epd_initial_dual(const ValueVector& values, const Eigen::VectorXd& thresholds, double eta_prime) {
    DualState dual;
    dual.lambda.resize(thresholds.size());
    for (Eigen::Index i = 0; i < thresholds.size(); ++i) {
        dual.lambda(i) = std::max(eta_prime * (values(i + 1) - thresholds(i)), 0.0);
    }
    return dual;
}

Eigen::MatrixXd epd_direction_reward(const TabularMdp& mdp, const DualState& dual, double eta_prime,
                                     const ValueVector& current_values, const Eigen::VectorXd& thresholds) {
    if (dual.lambda.size() != mdp.num_objectives() - 1 || thresholds.size() != dual.lambda.size()) {
        throw ParameterError("epd_direction_reward: need one dual and one threshold per constraint");
    }
    Eigen::MatrixXd out = mdp.reward(0);
    for (Eigen::Index i = 0; i < thresholds.size(); ++i) {
        const double coefficient = dual.lambda(i) + eta_prime * (thresholds(i) - current_values(i + 1));
        out += coefficient * mdp.reward(static_cast<int>(i) + 1);
    }
    return out;
}

DualState epd_dual_update(const DualState& dual, double eta_prime, const ValueVector& new_values,
                          const Eigen::VectorXd& thresholds) {
    DualState next;
    next.lambda.resize(dual.lambda.size());
    for (Eigen::Index i = 0; i < dual.lambda.size(); ++i) {
        const double slack = thresholds(i) - new_values(i + 1);
        next.lambda(i) = std::max(eta_prime * -slack, dual.lambda(i) + eta_prime * slack);
    }
    return next;
}

void check_dual_properties(const DualState& dual, double eta_prime, const ValueVector& values,
                           const Eigen::VectorXd& thresholds, bool after_update) {
    for (Eigen::Index i = 0; i < dual.lambda.size(); ++i) {
        const double slack = thresholds(i) - values(i + 1);
        const double lambda = dual.lambda(i);
        std::ostringstream os;
        os.precision(17);
        if (!(lambda >= 0.0)) {
            os << "dual property 1 failed: lambda_" << i + 2 << " = " << lambda;
            throw NumericalError(os.str());
        }
        if (!(lambda + eta_prime * slack >= 0.0)) {
            os << "dual property 2 failed: lambda_" << i + 2 << " + eta'(b - V) = " << lambda + eta_prime * slack;
            throw NumericalError(os.str());
        }
        if (after_update && !(std::abs(lambda) >= std::abs(eta_prime * slack))) {
            os << "dual property 3 failed: |lambda_" << i + 2 << "| = " << lambda << " < eta'|V - b| = "
               << std::abs(eta_prime * slack);
            throw NumericalError(os.str());
        }
    }
}

RunHistory arnpg_epd(const TabularMdp& mdp, const EpdOptions& options, Estimator* estimator) {
    const double gamma = mdp.gamma();
    const int m = mdp.num_objectives();
    check_step_sizes(options.alpha, options.eta, gamma, "arnpg_epd");
    if (options.macro_steps < 0) throw ParameterError("arnpg_epd: macro_steps must be >= 0");
    if (options.thresholds.size() != m - 1) {
        throw ParameterError("arnpg_epd: need one threshold per constraint (m - 1)");
    }
    if (!(options.eta_prime > 0.0)) throw ParameterError("arnpg_epd: eta' must be > 0");
    const Eigen::VectorXd& b = options.thresholds;

    ScheduleSpec schedule = options.schedule;
    const bool theorem = schedule.mode == ScheduleMode::theorem;
    if (theorem) {
        schedule.rule = ScheduleRule::epd;
        schedule.horizon = std::max(1, options.macro_steps);
        schedule.num_objectives = m;
        schedule.eta_prime = options.eta_prime;
        schedule.num_actions = mdp.num_actions();
        schedule.gamma = gamma;
        require_theorem_condition(options.eta_prime <= 1.0, "eta' must lie in (0,1]");
        const double min_alpha = 2.0 * options.eta_prime * m / std::pow(1.0 - gamma, 3);
        require_theorem_condition(options.alpha >= min_alpha * (1.0 - kConditionSlack),
                                  "alpha must be >= 2 eta' m/(1-gamma)^3");
        require_prescribed_eta(options.alpha, options.eta, gamma);
    }

    ExactEstimator exact(mdp);
    const bool exact_mode = estimator == nullptr;
    Estimator& source = exact_mode ? static_cast<Estimator&>(exact) : *estimator;

    RunHistory history;
    history.algorithm = AlgorithmId::epd;
    history.num_objectives = m;
    history.num_constraints = m - 1;
    history.dual_first_index = 2;
    history.records.reserve(static_cast<std::size_t>(options.macro_steps));

    Rng picker(options.seed);
    const int pick = options.macro_steps > 0 ? 1 + static_cast<int>(picker.below(options.macro_steps)) : 0;

    SoftmaxPolicy policy = uniform_policy(mdp.num_states(), mdp.num_actions());
    history.returned_policy = policy;
    ValueVector estimated = source.values(policy);
    DualState dual = epd_initial_dual(estimated, b, options.eta_prime);
    check_dual_properties(dual, options.eta_prime, estimated, b, false);

    ValueVector value_sum = ValueVector::Zero(m);
    long long total_steps = 0;
    const auto start = Clock::now();

    for (int k = 0; k < options.macro_steps; ++k) {
        InnerLoopSpec spec{epd_direction_reward(mdp, dual, options.eta_prime, estimated, b), policy, options.alpha,
                           options.eta, tk_schedule(schedule, &dual)};
        validate(spec, mdp);
        policy = inner_loop(spec, gamma, source);
        estimated = source.values(policy);
        dual = epd_dual_update(dual, options.eta_prime, estimated, b);
        check_dual_properties(dual, options.eta_prime, estimated, b, true);

        RunRecord record;
        record.k = k + 1;
        record.inner_steps = spec.steps;
        total_steps += spec.steps;
        record.cumulative_iterations = total_steps;
        record.values = reported_values(mdp, policy, estimated, exact_mode);
        record.duals = dual.lambda;
        value_sum += record.values;
        const ValueVector average = value_sum / record.k;
        record.avg_signed_violation = b - average.tail(m - 1);
        record.avg_violation = record.avg_signed_violation.cwiseMax(0.0);
        record.last_violation = b - record.values.tail(m - 1);
        if (options.optimum) {
            record.avg_gap = *options.optimum - average(0);
            if (theorem) {
                const double bound = epd_gap_bound(options.alpha, gamma, mdp.num_actions(), record.k);
                if (*record.avg_gap > bound) {
                    throw NumericalError(format_bound_failure("EPD average-gap bound", record.k, *record.avg_gap, bound));
                }
            }
        }
        if (theorem && options.optimal_duals) {
            const double bound = epd_violation_bound(options.alpha, gamma, mdp.num_actions(), options.eta_prime,
                                                     options.optimal_duals->norm(), record.k);
            for (Eigen::Index i = 0; i < record.avg_violation.size(); ++i) {
                if (record.avg_violation(i) > bound) {
                    throw NumericalError(
                        format_bound_failure("EPD average-violation bound", record.k, record.avg_violation(i), bound));
                }
            }
        }
        if (record.k == pick) {
            history.returned_policy = policy;
            history.returned_index = pick;
        }
        record.wall_ms = elapsed_ms(start);
        history.records.push_back(std::move(record));
    }

    history.final_policy = policy;
    history.average_values = options.macro_steps > 0 ? ValueVector(value_sum / options.macro_steps) : ValueVector::Zero(m);
    history.metadata["returned"] = "uniformly random iterate drawn with the run seed";
    return history;
}

// ---------------------------------------------------------------------------
// ARNPG-OMDA

Eigen::VectorXd simplex_mirror_step(const Eigen::VectorXd& prior, const Eigen::VectorXd& gradient, double eta_prime) {
    if (prior.size() != gradient.size() || prior.size() == 0) {
        throw ParameterError("simplex_mirror_step: dimension mismatch");
    }
    Eigen::ArrayXd logits = prior.array().log() - eta_prime * gradient.array();
    logits -= logits.maxCoeff();
    const Eigen::ArrayXd weights = logits.exp();
    return (weights / weights.sum()).matrix();
}

RunHistory arnpg_omda(const TabularMdp& mdp, const MaxMinBifunction& phi, const OmdaOptions& options,
                      Estimator* estimator) {
    const double gamma = mdp.gamma();
    const int m = mdp.num_objectives();
    check_step_sizes(options.alpha, options.eta, gamma, "arnpg_omda");
    if (options.macro_steps < 0) throw ParameterError("arnpg_omda: macro_steps must be >= 0");
    if (phi.scales.size() != m) throw ParameterError("arnpg_omda: scale vector does not match the MDP");
    if (!(options.eta_prime > 0.0)) throw ParameterError("arnpg_omda: eta' must be > 0");

    ScheduleSpec schedule = options.schedule;
    const bool theorem = schedule.mode == ScheduleMode::theorem;
    if (theorem) {
        schedule.rule = ScheduleRule::omda;
        schedule.horizon = std::max(1, options.macro_steps);
        schedule.lipschitz = phi.lipschitz();
        schedule.smoothness = phi.smoothness();
        schedule.num_objectives = m;
        schedule.num_actions = mdp.num_actions();
        schedule.gamma = gamma;
        require_theorem_condition(options.eta_prime <= 1.0 / (6.0 * schedule.smoothness) * (1.0 + kConditionSlack),
                                  "eta' must be <= 1/(6 beta)");
        const double min_alpha = 6.0 * schedule.smoothness / std::pow(1.0 - gamma, 3);
        require_theorem_condition(options.alpha >= min_alpha * (1.0 - kConditionSlack),
                                  "alpha must be >= 6 beta/(1-gamma)^3");
        require_prescribed_eta(options.alpha, options.eta, gamma);
    }

    ExactEstimator exact(mdp);
    const bool exact_mode = estimator == nullptr;
    Estimator& source = exact_mode ? static_cast<Estimator&>(exact) : *estimator;

    RunHistory history;
    history.algorithm = AlgorithmId::omda;
    history.num_objectives = m;
    history.dual_first_index = 1;
    history.records.reserve(static_cast<std::size_t>(options.macro_steps));

    Rng picker(options.seed);
    const int pick = options.macro_steps > 0 ? 1 + static_cast<int>(picker.below(options.macro_steps)) : 0;

    const SoftmaxPolicy initial = uniform_policy(mdp.num_states(), mdp.num_actions());
    const Eigen::VectorXd uniform_weights = Eigen::VectorXd::Constant(m, 1.0 / m);
    OmdaState state{initial, initial, uniform_weights, uniform_weights};
    history.returned_policy = initial;

    BifunctionValue grad = maxmin_phi(phi, source.values(state.half_policy), state.half_weights);
    ValueVector value_sum = ValueVector::Zero(m);
    long long total_steps = 0;
    const auto start = Clock::now();

    for (int k = 0; k < options.macro_steps; ++k) {
        const int steps = tk_schedule(schedule);

        InnerLoopSpec half_spec{direction_reward(grad.grad_v, mdp), state.anchor, options.alpha, options.eta, steps};
        validate(half_spec, mdp);
        state.half_policy = inner_loop(half_spec, gamma, source);
        state.half_weights = simplex_mirror_step(state.anchor_weights, grad.grad_lambda, options.eta_prime);

        const ValueVector half_estimated = source.values(state.half_policy);
        grad = maxmin_phi(phi, half_estimated, state.half_weights);

        InnerLoopSpec full_spec{direction_reward(grad.grad_v, mdp), state.anchor, options.alpha, options.eta, steps};
        state.anchor = inner_loop(full_spec, gamma, source);
        state.anchor_weights = simplex_mirror_step(state.anchor_weights, grad.grad_lambda, options.eta_prime);

        RunRecord record;
        record.k = k + 1;
        record.inner_steps = steps;
        total_steps += 2LL * steps;
        record.cumulative_iterations = total_steps;
        record.values = reported_values(mdp, state.half_policy, half_estimated, exact_mode);
        record.duals = state.half_weights;
        value_sum += record.values;
        const double f_avg = maxmin_value(phi, value_sum / record.k);
        record.scalarized = f_avg;
        if (options.optimum) {
            record.avg_gap = *options.optimum - f_avg;
            if (theorem) {
                const double bound =
                    omda_gap_bound(options.alpha, gamma, mdp.num_actions(), options.eta_prime, m, record.k);
                if (*record.avg_gap > bound) {
                    throw NumericalError(format_bound_failure("OMDA average-gap bound", record.k, *record.avg_gap, bound));
                }
            }
        }
        if (record.k == pick) {
            history.returned_policy = state.half_policy;
            history.returned_index = pick;
        }
        record.wall_ms = elapsed_ms(start);
        history.records.push_back(std::move(record));
    }

    history.final_policy = state.half_policy;
    history.average_values = options.macro_steps > 0 ? ValueVector(value_sum / options.macro_steps) : ValueVector::Zero(m);
    history.metadata["returned"] = "uniformly random half-step iterate drawn with the run seed";
    history.metadata["scalarized_column"] = "F at the running-average value vector";
    return history;
}

}  // namespace arnpg
