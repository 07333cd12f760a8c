#pragma once

#include <Eigen/Dense>

#include "arnpg/mdp.hpp"

namespace arnpg {

enum class ScalarizerKind { sum_log, weighted_linear };

/// Smooth concave scalarizer F over value vectors.
///   sum_log:         F(v) = sum_i a_i log(delta + v_i)
///   weighted_linear: F(v) = sum_i a_i v_i
struct SmoothScalarizer {
    ScalarizerKind kind = ScalarizerKind::sum_log;
    Eigen::VectorXd weights;
    double delta = 0.1;

    /// beta such that ||grad F(u) - grad F(v)||_1 <= beta ||u - v||_inf on the
    /// nonnegative orthant: sum a_i / delta^2 (sum_log), 0 (linear).
    double smoothness() const;
    /// L >= ||grad F(v)||_1 for v >= 0: sum a_i / delta (sum_log), sum a_i (linear).
    double lipschitz() const;
};

SmoothScalarizer sum_log_scalarizer(Eigen::VectorXd weights, double delta = 0.1);
SmoothScalarizer linear_scalarizer(Eigen::VectorXd weights);

struct ScalarizedValue {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Value and gradient of F at v. Requires v_i >= 0 for sum_log (v_i > -delta
/// is accepted so that slightly negative estimates remain usable).
ScalarizedValue scalarize(const SmoothScalarizer& scalarizer, const ValueVector& v);

/// Bilinear max-min bifunction Phi(v, lambda) = sum_i v_i lambda_i / c_i over
/// the full simplex.
struct MaxMinBifunction {
    Eigen::VectorXd scales;

    /// beta w.r.t. Psi(v, lambda) = ||v||_inf + ||lambda||_1: 1 / min_i c_i.
    double smoothness() const;
    /// L >= ||grad_v Phi||_1 over the simplex: 1 / min_i c_i.
    double lipschitz() const;
};

struct BifunctionValue {
    double value = 0.0;
    Eigen::VectorXd grad_v;
    Eigen::VectorXd grad_lambda;
};

BifunctionValue maxmin_phi(const MaxMinBifunction& phi, const ValueVector& v, const Eigen::VectorXd& lambda);

/// F(v) = min_{lambda in simplex} Phi(v, lambda) = min_i v_i / c_i.
double maxmin_value(const MaxMinBifunction& phi, const ValueVector& v);

/// Index attaining min_i v_i / c_i; lowest index on ties.
int maxmin_argmin(const MaxMinBifunction& phi, const ValueVector& v);

/// r~(s,a) = <gradient, r_{1:m}(s,a)>.
Eigen::MatrixXd direction_reward(const Eigen::VectorXd& gradient, const TabularMdp& mdp);

}  // namespace arnpg
