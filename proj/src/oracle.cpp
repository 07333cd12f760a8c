#include "arnpg/oracle.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "arnpg/error.hpp"

namespace arnpg {

namespace {

Eigen::MatrixXd deterministic_transition(const TabularMdp& mdp, const std::vector<int>& actions) {
    const int S = mdp.num_states();
    if (static_cast<int>(actions.size()) != S) throw ParameterError("deterministic policy: one action per state");
    Eigen::MatrixXd p(S, S);
    for (int s = 0; s < S; ++s) {
        const int a = actions[static_cast<std::size_t>(s)];
        if (a < 0 || a >= mdp.num_actions()) throw ParameterError("deterministic policy: action out of range");
        p.row(s) = mdp.transition_row(s, a);
    }
    return p;
}

Eigen::VectorXd deterministic_state_values(const TabularMdp& mdp, const std::vector<int>& actions,
                                           const Eigen::MatrixXd& reward) {
    const int S = mdp.num_states();
    const Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(S, S) - mdp.gamma() * deterministic_transition(mdp, actions);
    Eigen::VectorXd r_pi(S);
    for (int s = 0; s < S; ++s) r_pi(s) = reward(s, actions[static_cast<std::size_t>(s)]);
    return system.partialPivLu().solve(r_pi);
}

Eigen::VectorXd logsumexp_rows(const Eigen::MatrixXd& x) {
    const Eigen::VectorXd top = x.rowwise().maxCoeff();
    return top.array() + (x.colwise() - top).array().exp().rowwise().sum().log();
}

double max_abs_or_zero(const Eigen::VectorXd& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

/// Flow rows of the occupancy LP over the first S*A columns of `a`.
void add_flow_rows(const TabularMdp& mdp, Eigen::MatrixXd& a, Eigen::VectorXd& b) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    for (int s = 0; s < S; ++s) {
        for (int act = 0; act < A; ++act) {
            const int j = s * A + act;
            a(s, j) += 1.0;
            for (int s_next = 0; s_next < S; ++s_next) a(s_next, j) -= mdp.gamma() * mdp.transition(s, act, s_next);
        }
        b(s) = (1.0 - mdp.gamma()) * mdp.rho()(s);
    }
}

OccupancyMeasure occupancy_from_solution(const TabularMdp& mdp, const Eigen::VectorXd& x) {
    OccupancyMeasure occ;
    occ.d = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        x.data(), mdp.num_states(), mdp.num_actions());
    return occ;
}

ValueVector occupancy_values(const TabularMdp& mdp, const OccupancyMeasure& occ) {
    ValueVector v(mdp.num_objectives());
    for (int i = 0; i < mdp.num_objectives(); ++i) v(i) = occ.d.cwiseProduct(mdp.reward(i)).sum() / (1.0 - mdp.gamma());
    return v;
}

}  // namespace

ValueIterationResult value_iteration(const TabularMdp& mdp, const Eigen::MatrixXd& reward, double tol) {
    if (reward.rows() != mdp.num_states() || reward.cols() != mdp.num_actions()) {
        throw ParameterError("value_iteration: reward shape mismatch");
    }
    ValueIterationResult out;
    out.v = Eigen::VectorXd::Zero(mdp.num_states());
    constexpr int kMaxSweeps = 1000000;
    for (out.sweeps = 0; out.sweeps < kMaxSweeps; ++out.sweeps) {
        const Eigen::VectorXd next = (reward + mdp.gamma() * expected_next(mdp, out.v)).rowwise().maxCoeff();
        const double change = (next - out.v).lpNorm<Eigen::Infinity>();
        out.v = next;
        if (change <= tol) break;
    }

    out.greedy.assign(static_cast<std::size_t>(mdp.num_states()), 0);
    Eigen::MatrixXd q = reward + mdp.gamma() * expected_next(mdp, out.v);
    for (int s = 0; s < mdp.num_states(); ++s) q.row(s).maxCoeff(&out.greedy[static_cast<std::size_t>(s)]);
    for (int round = 0; round < 1000; ++round) {
        out.v = deterministic_state_values(mdp, out.greedy, reward);
        q = reward + mdp.gamma() * expected_next(mdp, out.v);
        bool changed = false;
        for (int s = 0; s < mdp.num_states(); ++s) {
            int& current = out.greedy[static_cast<std::size_t>(s)];
            const double margin = 1e-13 * std::max(1.0, std::abs(q(s, current)));
            for (int a = 0; a < mdp.num_actions(); ++a) {
                if (q(s, a) > q(s, current) + margin) {
                    current = a;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    out.value_at_rho = mdp.rho().dot(out.v);
    return out;
}

ValueVector deterministic_values(const TabularMdp& mdp, const std::vector<int>& actions) {
    ValueVector v(mdp.num_objectives());
    for (int i = 0; i < mdp.num_objectives(); ++i) {
        v(i) = mdp.rho().dot(deterministic_state_values(mdp, actions, mdp.reward(i)));
    }
    return v;
}

OccupancyMeasure deterministic_occupancy(const TabularMdp& mdp, const std::vector<int>& actions) {
    const int S = mdp.num_states();
    const Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(S, S) - mdp.gamma() * deterministic_transition(mdp, actions);
    const Eigen::VectorXd state = (1.0 - mdp.gamma()) * system.transpose().partialPivLu().solve(mdp.rho());
    OccupancyMeasure occ;
    occ.d = Eigen::MatrixXd::Zero(S, mdp.num_actions());
    for (int s = 0; s < S; ++s) occ.d(s, actions[static_cast<std::size_t>(s)]) = state(s);
    return occ;
}

LpSolution cmdp_lp(const TabularMdp& mdp, const Eigen::VectorXd& thresholds) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int nc = mdp.num_objectives() - 1;
    if (thresholds.size() != nc) throw ParameterError("cmdp_lp: need one threshold per constraint (m - 1)");
    const double scale = 1.0 / (1.0 - mdp.gamma());

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(S + nc, S * A + nc);
    Eigen::VectorXd b(S + nc);
    add_flow_rows(mdp, a, b);
    for (int i = 0; i < nc; ++i) {
        const Eigen::MatrixXd& r = mdp.reward(i + 1);
        for (int s = 0; s < S; ++s) {
            for (int act = 0; act < A; ++act) a(S + i, s * A + act) = scale * r(s, act);
        }
        a(S + i, S * A + i) = -1.0;
        b(S + i) = thresholds(i);
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(S * A + nc);
    for (int s = 0; s < S; ++s) {
        for (int act = 0; act < A; ++act) c(s * A + act) = scale * mdp.reward(0)(s, act);
    }

    const SimplexResult lp = solve_standard_lp(a, b, c);
    LpSolution out;
    out.status = lp.status;
    if (lp.status != LpStatus::optimal) return out;
    out.value = lp.objective;
    out.occupancy = occupancy_from_solution(mdp, lp.x);
    out.values = occupancy_values(mdp, out.occupancy);
    out.duals = -lp.duals.tail(nc);
    const Eigen::VectorXd slack = out.values.tail(nc) - thresholds;
    out.primal_residual = std::max(flow_residual(mdp, out.occupancy), max_abs_or_zero((-slack).cwiseMax(0.0)));
    out.complementary_residual = max_abs_or_zero(out.duals.cwiseProduct(slack));
    return out;
}

LpSolution maxmin_lp(const TabularMdp& mdp, const Eigen::VectorXd& scales) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int m = mdp.num_objectives();
    if (scales.size() != m || scales.minCoeff() <= 0.0) throw ParameterError("maxmin_lp: need m positive scales");
    const double scale = 1.0 / (1.0 - mdp.gamma());
    const int t_col = S * A;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(S + m, S * A + 1 + m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(S + m);
    add_flow_rows(mdp, a, b);
    for (int i = 0; i < m; ++i) {
        for (int s = 0; s < S; ++s) {
            for (int act = 0; act < A; ++act) a(S + i, s * A + act) = scale * mdp.reward(i)(s, act) / scales(i);
        }
        a(S + i, t_col) = -1.0;
        a(S + i, t_col + 1 + i) = -1.0;
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(S * A + 1 + m);
    c(t_col) = 1.0;

    const SimplexResult lp = solve_standard_lp(a, b, c);
    LpSolution out;
    out.status = lp.status;
    if (lp.status != LpStatus::optimal) return out;
    out.value = lp.objective;
    out.occupancy = occupancy_from_solution(mdp, lp.x.head(S * A));
    out.values = occupancy_values(mdp, out.occupancy);
    out.duals = -lp.duals.tail(m);
    const Eigen::VectorXd slack = (out.values.array() / scales.array()).matrix() - Eigen::VectorXd::Constant(m, out.value);
    out.primal_residual = std::max(flow_residual(mdp, out.occupancy), max_abs_or_zero((-slack).cwiseMax(0.0)));
    out.complementary_residual = max_abs_or_zero(out.duals.cwiseProduct(slack));
    return out;
}

FrankWolfeResult smooth_fw(const TabularMdp& mdp, const SmoothScalarizer& scalarizer, int iterations, double tol) {
    if (scalarizer.weights.size() != mdp.num_objectives()) throw ParameterError("smooth_fw: dimension mismatch");
    struct Vertex {
        std::vector<int> actions;
        ValueVector v;
        double weight = 0.0;
    };
    auto lmo = [&](const Eigen::VectorXd& gradient) {
        Vertex vertex;
        vertex.actions = value_iteration(mdp, direction_reward(gradient, mdp)).greedy;
        vertex.v = deterministic_values(mdp, vertex.actions);
        return vertex;
    };
    auto gradient_at = [&](const ValueVector& x) { return scalarize(scalarizer, x).gradient; };

    std::vector<Vertex> active;
    active.push_back(lmo(gradient_at(value_vector(mdp, uniform_policy(mdp.num_states(), mdp.num_actions())))));
    active.front().weight = 1.0;
    ValueVector x = active.front().v;

    FrankWolfeResult out;
    for (out.iterations = 0; out.iterations < iterations; ++out.iterations) {
        const Eigen::VectorXd g = gradient_at(x);
        Vertex target = lmo(g);
        out.gap = g.dot(target.v - x);
        if (out.gap <= tol) {
            out.converged = true;
            break;
        }
        std::size_t away = 0;
        for (std::size_t j = 1; j < active.size(); ++j) {
            if (g.dot(active[j].v) < g.dot(active[away].v)) away = j;
        }
        auto found = std::find_if(active.begin(), active.end(),
                                  [&](const Vertex& vertex) { return vertex.actions == target.actions; });
        std::size_t toward = static_cast<std::size_t>(found - active.begin());
        if (found == active.end()) active.push_back(std::move(target));
        if (toward == away) break;

        const ValueVector direction = active[toward].v - active[away].v;
        const double max_step = active[away].weight;
        auto slope = [&](double tau) { return gradient_at(x + tau * direction).dot(direction); };
        double step = max_step;
        if (slope(max_step) < 0.0) {
            double lo = 0.0;
            double hi = max_step;
            for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
                const double mid = 0.5 * (lo + hi);
                (slope(mid) > 0.0 ? lo : hi) = mid;
            }
            step = 0.5 * (lo + hi);
        }
        x += step * direction;
        active[toward].weight += step;
        active[away].weight -= step;
        if (active[away].weight <= 1e-15) {
            active[toward].weight += active[away].weight;
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(away));
        }
    }

    out.values = x;
    out.value = scalarize(scalarizer, x).value;
    out.occupancy.d = Eigen::MatrixXd::Zero(mdp.num_states(), mdp.num_actions());
    for (const Vertex& vertex : active) out.occupancy.d += vertex.weight * deterministic_occupancy(mdp, vertex.actions).d;
    return out;
}

SoftViResult soft_vi(const TabularMdp& mdp, const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor, double alpha,
                     double tol) {
    if (!(alpha > 0.0)) throw ParameterError("soft_vi: alpha must be > 0");
    if (reward.rows() != mdp.num_states() || reward.cols() != mdp.num_actions() ||
        anchor.num_states() != mdp.num_states() || anchor.num_actions() != mdp.num_actions()) {
        throw ParameterError("soft_vi: shape mismatch");
    }
    const Eigen::MatrixXd base = reward + alpha * anchor.log_probs();
    SoftViResult out;
    out.v = Eigen::VectorXd::Zero(mdp.num_states());
    constexpr int kMaxSweeps = 1000000;
    for (out.sweeps = 0; out.sweeps < kMaxSweeps; ++out.sweeps) {
        out.q = base + mdp.gamma() * expected_next(mdp, out.v);
        const Eigen::VectorXd next = alpha * logsumexp_rows(out.q / alpha);
        out.residual = (next - out.v).lpNorm<Eigen::Infinity>();
        out.v = next;
        if (out.residual <= tol) break;
    }
    out.q = base + mdp.gamma() * expected_next(mdp, out.v);
    out.residual = (alpha * logsumexp_rows(out.q / alpha) - out.v).lpNorm<Eigen::Infinity>();
    out.policy = SoftmaxPolicy(out.q / alpha);
    return out;
}

SoftmaxPolicy occupancy_to_policy(const OccupancyMeasure& occ) {
    const Eigen::Index S = occ.d.rows();
    const Eigen::Index A = occ.d.cols();
    if (S == 0 || A == 0) throw ParameterError("occupancy_to_policy: empty occupancy");
    const Eigen::MatrixXd d = occ.d.cwiseMax(0.0);
    Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(S, A);
    for (Eigen::Index s = 0; s < S; ++s) {
        const double mass = d.row(s).sum();
        if (!(mass > 0.0)) continue;
        for (Eigen::Index a = 0; a < A; ++a) logits(s, a) = std::log(std::max(d(s, a) / mass, DBL_MIN));
    }
    return SoftmaxPolicy(logits);
}

}  // namespace arnpg
