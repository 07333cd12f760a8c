#pragma once

#include <vector>

#include <Eigen/Dense>

#include "arnpg/mdp.hpp"
#include "arnpg/policy.hpp"

namespace arnpg {

/// Parameters of one InnerLoop call: NPG on the KL-regularized value
///   V~(pi) = V_r~(pi) - alpha * D_{d^pi}(pi || anchor) / (1 - gamma).
struct InnerLoopSpec {
    Eigen::MatrixXd direction_reward;
    SoftmaxPolicy anchor;
    double alpha = 1.0;
    double eta = 0.0;
    int steps = 1;
};

/// Throws ParameterError unless alpha > 0, 0 < eta <= (1-gamma)/alpha,
/// steps >= 1 and shapes match.
void validate(const InnerLoopSpec& spec, const TabularMdp& mdp);

/// (1 - gamma) / alpha, the step every guarantee is stated for.
double default_inner_eta(double alpha, double gamma);

/// Source of the quantities a driver needs from the environment. The exact
/// implementation solves linear systems; the sampled one (see sampling.hpp)
/// uses Monte-Carlo rollouts.
class Estimator {
public:
    virtual ~Estimator() = default;

    /// Regularized Q~ of `policy` for direction reward `reward` and anchor:
    ///   Q~(s,a) = r(s,a) + alpha log anchor(a|s) + gamma E[V~(s')],
    ///   V~(s)   = E_{a~pi}[Q~(s,a) - alpha log pi(a|s)].
    /// With alpha = 0 this is the ordinary Q of `reward`.
    virtual Eigen::MatrixXd regularized_q(const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor, double alpha,
                                          const SoftmaxPolicy& policy) = 0;

    /// V_{1:m}(rho) of `policy`.
    virtual ValueVector values(const SoftmaxPolicy& policy) = 0;
};

class ExactEstimator final : public Estimator {
public:
    explicit ExactEstimator(const TabularMdp& mdp) : mdp_(mdp) {}

    Eigen::MatrixXd regularized_q(const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor, double alpha,
                                  const SoftmaxPolicy& policy) override;
    ValueVector values(const SoftmaxPolicy& policy) override;

private:
    const TabularMdp& mdp_;
};

/// Exact regularized values: `v` holds V~ per state and `q` holds Q~.
Evaluation regularized_q(const TabularMdp& mdp, const InnerLoopSpec& spec, const SoftmaxPolicy& policy);

/// One closed-form NPG step in log space:
///   log pi'(a|s) = (1 - eta alpha/(1-gamma)) log pi(a|s) + eta Q~(s,a)/(1-gamma) - const(s).
/// alpha = 0 gives the unregularized softmax NPG step.
SoftmaxPolicy npg_update(const SoftmaxPolicy& current, const Eigen::MatrixXd& q_reg, double alpha, double eta,
                         double gamma);

/// Runs spec.steps NPG updates starting from the anchor.
SoftmaxPolicy inner_loop(const TabularMdp& mdp, const InnerLoopSpec& spec);

/// Same update with Q~ supplied by `estimator` (exact or sampled).
SoftmaxPolicy inner_loop(const InnerLoopSpec& spec, double gamma, Estimator& estimator);

/// All iterates pi^(0) = anchor, ..., pi^(steps).
std::vector<SoftmaxPolicy> inner_loop_iterates(const TabularMdp& mdp, const InnerLoopSpec& spec);

/// ceil((1/(1-gamma)) log(5 ||r~||_inf / ((1-gamma)^2 eps)) + 1), at least 1.
int inner_steps_for_accuracy(double gamma, double reward_sup, double epsilon);

struct FundamentalInequality {
    bool holds = false;
    double slack = 0.0;  // lhs - rhs, where rhs already includes -epsilon
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Evaluates both sides of the fundamental inequality for
/// pi_{k+1} = InnerLoop(spec) against `comparison`:
///   V_r~(pi_{k+1}) - alpha D_{d^{pi_{k+1}}}(pi_{k+1}||pi_k)/(1-gamma)
///     >= V_r~(pi) - alpha [D_{d^pi}(pi||pi_k) - D_{d^pi}(pi||pi_{k+1})]/(1-gamma) - eps.
/// Requires eta = (1-gamma)/alpha and spec.steps >= inner_steps_for_accuracy(...).
FundamentalInequality fundamental_inequality_check(const TabularMdp& mdp, const InnerLoopSpec& spec,
                                         const SoftmaxPolicy& comparison, double epsilon);

}  // namespace arnpg
