#include "arnpg/criteria.hpp"

#include <cmath>

#include "arnpg/error.hpp"

namespace arnpg {

namespace {

void check_weights(const Eigen::VectorXd& weights, const char* what) {
    if (weights.size() == 0 || !weights.allFinite() || weights.minCoeff() <= 0.0) {
        throw ParameterError(std::string(what) + ": weights must be positive and finite");
    }
}

}  // namespace

SmoothScalarizer sum_log_scalarizer(Eigen::VectorXd weights, double delta) {
    check_weights(weights, "sum_log_scalarizer");
    if (!(delta > 0.0)) throw ParameterError("sum_log_scalarizer: delta must be > 0");
    return {ScalarizerKind::sum_log, std::move(weights), delta};
}

SmoothScalarizer linear_scalarizer(Eigen::VectorXd weights) {
    check_weights(weights, "linear_scalarizer");
    return {ScalarizerKind::weighted_linear, std::move(weights), 0.0};
}

double SmoothScalarizer::smoothness() const {
    return kind == ScalarizerKind::sum_log ? weights.sum() / (delta * delta) : 0.0;
}

double SmoothScalarizer::lipschitz() const {
    return kind == ScalarizerKind::sum_log ? weights.sum() / delta : weights.sum();
}

ScalarizedValue scalarize(const SmoothScalarizer& scalarizer, const ValueVector& v) {
    if (v.size() != scalarizer.weights.size()) throw ParameterError("scalarize: dimension mismatch");
    ScalarizedValue out;
    if (scalarizer.kind == ScalarizerKind::weighted_linear) {
        out.value = scalarizer.weights.dot(v);
        out.gradient = scalarizer.weights;
        return out;
    }
    const Eigen::ArrayXd shifted = v.array() + scalarizer.delta;
    if (shifted.minCoeff() <= 0.0) throw ParameterError("scalarize: v_i + delta must be > 0");
    out.value = (scalarizer.weights.array() * shifted.log()).sum();
    out.gradient = (scalarizer.weights.array() / shifted).matrix();
    return out;
}

double MaxMinBifunction::smoothness() const { return 1.0 / scales.minCoeff(); }

double MaxMinBifunction::lipschitz() const { return 1.0 / scales.minCoeff(); }

BifunctionValue maxmin_phi(const MaxMinBifunction& phi, const ValueVector& v, const Eigen::VectorXd& lambda) {
    check_weights(phi.scales, "maxmin_phi");
    if (v.size() != phi.scales.size() || lambda.size() != phi.scales.size()) {
        throw ParameterError("maxmin_phi: dimension mismatch");
    }
    BifunctionValue out;
    out.grad_v = (lambda.array() / phi.scales.array()).matrix();
    out.grad_lambda = (v.array() / phi.scales.array()).matrix();
    out.value = v.dot(out.grad_v);
    return out;
}

double maxmin_value(const MaxMinBifunction& phi, const ValueVector& v) {
    const int i = maxmin_argmin(phi, v);
    return v(i) / phi.scales(i);
}

int maxmin_argmin(const MaxMinBifunction& phi, const ValueVector& v) {
    check_weights(phi.scales, "maxmin_argmin");
    if (v.size() != phi.scales.size()) throw ParameterError("maxmin_argmin: dimension mismatch");
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) / phi.scales(i) < v(best) / phi.scales(best)) best = i;
    }
    return best;
}

Eigen::MatrixXd direction_reward(const Eigen::VectorXd& gradient, const TabularMdp& mdp) {
    if (gradient.size() != mdp.num_objectives()) throw ParameterError("direction_reward: dimension mismatch");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mdp.num_states(), mdp.num_actions());
    for (int i = 0; i < mdp.num_objectives(); ++i) out += gradient(i) * mdp.reward(i);
    return out;
}

}  // namespace arnpg
