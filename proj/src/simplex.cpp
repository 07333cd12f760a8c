#include "arnpg/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "arnpg/error.hpp"

namespace arnpg {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

struct Tableau {
    Eigen::MatrixXd a;  // rows x (n + rows), artificials last
    Eigen::VectorXd b;  // nonnegative
    std::vector<int> basis;
    int num_original = 0;
};

struct BasisSolve {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::VectorXd x_b;
};

BasisSolve factor(const Tableau& t) {
    const Eigen::Index rows = t.a.rows();
    Eigen::MatrixXd basis_matrix(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) basis_matrix.col(i) = t.a.col(t.basis[static_cast<std::size_t>(i)]);
    BasisSolve out{Eigen::PartialPivLU<Eigen::MatrixXd>(basis_matrix), {}};
    out.x_b = out.lu.solve(t.b);
    return out;
}

Eigen::VectorXd basic_costs(const Tableau& t, const Eigen::VectorXd& cost) {
    Eigen::VectorXd c_b(static_cast<Eigen::Index>(t.basis.size()));
    for (std::size_t i = 0; i < t.basis.size(); ++i) c_b(static_cast<Eigen::Index>(i)) = cost(t.basis[i]);
    return c_b;
}

/// Runs simplex iterations for `cost` over columns [0, allowed). Returns the
/// terminal status; the basis in `t` is updated in place.
LpStatus iterate(Tableau& t, const Eigen::VectorXd& cost, int allowed, const SimplexOptions& options, int& iterations) {
    const Eigen::Index rows = t.a.rows();
    std::vector<char> in_basis(static_cast<std::size_t>(t.a.cols()), 0);
    for (int j : t.basis) in_basis[static_cast<std::size_t>(j)] = 1;

    while (iterations < options.max_iterations) {
        const BasisSolve solve = factor(t);
        const Eigen::VectorXd y = solve.lu.transpose().solve(basic_costs(t, cost));

        int entering = -1;
        for (int j = 0; j < allowed; ++j) {
            if (in_basis[static_cast<std::size_t>(j)]) continue;
            if (cost(j) - y.dot(t.a.col(j)) > options.optimality_tol) {
                entering = j;
                break;
            }
        }
        if (entering < 0) return LpStatus::optimal;

        const Eigen::VectorXd direction = solve.lu.solve(t.a.col(entering));
        Eigen::Index leaving = -1;
        double best_ratio = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (direction(i) <= options.pivot_tol) continue;
            const double ratio = std::max(solve.x_b(i), 0.0) / direction(i);
            const bool better = leaving < 0 || ratio < best_ratio - 1e-15 ||
                                (ratio <= best_ratio + 1e-15 &&
                                 t.basis[static_cast<std::size_t>(i)] < t.basis[static_cast<std::size_t>(leaving)]);
            if (better) {
                leaving = i;
                best_ratio = ratio;
            }
        }
        if (leaving < 0) return LpStatus::unbounded;

        in_basis[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(leaving)])] = 0;
        t.basis[static_cast<std::size_t>(leaving)] = entering;
        in_basis[static_cast<std::size_t>(entering)] = 1;
        ++iterations;
    }
    return LpStatus::iteration_limit;
}

/// Pivots zero-level artificials out of the basis where some original column
/// can replace them. Rows where none can are redundant and keep their
/// artificial, which then never leaves zero.
void drive_out_artificials(Tableau& t, const SimplexOptions& options) {
    const Eigen::Index rows = t.a.rows();
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (t.basis[static_cast<std::size_t>(i)] < t.num_original) continue;
        const BasisSolve solve = factor(t);
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(rows);
        unit(i) = 1.0;
        const Eigen::VectorXd row = solve.lu.transpose().solve(unit);  // row i of B^{-1}
        for (int j = 0; j < t.num_original; ++j) {
            if (std::find(t.basis.begin(), t.basis.end(), j) != t.basis.end()) continue;
            if (std::abs(row.dot(t.a.col(j))) > options.pivot_tol * 1e3) {
                t.basis[static_cast<std::size_t>(i)] = j;
                break;
            }
        }
    }
}

}  // namespace

SimplexResult solve_standard_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                const SimplexOptions& options) {
    const Eigen::Index rows = a.rows();
    const Eigen::Index n = a.cols();
    if (b.size() != rows || c.size() != n) throw ParameterError("solve_standard_lp: dimension mismatch");
    if (!a.allFinite() || !b.allFinite() || !c.allFinite()) {
        throw ParameterError("solve_standard_lp: non-finite input");
    }

    Tableau t;
    t.num_original = static_cast<int>(n);
    t.a = Eigen::MatrixXd::Zero(rows, n + rows);
    t.b = b;
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (b(i) < 0.0) sign(i) = -1.0;
        t.a.row(i).head(n) = sign(i) * a.row(i);
        t.b(i) = sign(i) * b(i);
        t.a(i, n + i) = 1.0;
        t.basis.push_back(static_cast<int>(n + i));
    }

    SimplexResult result;
    Eigen::VectorXd phase_one = Eigen::VectorXd::Zero(n + rows);
    phase_one.tail(rows).setConstant(-1.0);
    LpStatus status = iterate(t, phase_one, static_cast<int>(n + rows), options, result.iterations);
    if (status == LpStatus::iteration_limit) {
        result.status = status;
        return result;
    }
    {
        const BasisSolve solve = factor(t);
        const double infeasibility = -basic_costs(t, phase_one).dot(solve.x_b);
        if (infeasibility > options.feasibility_tol * std::max(1.0, t.b.lpNorm<Eigen::Infinity>())) {
            result.status = LpStatus::infeasible;
            return result;
        }
    }
    drive_out_artificials(t, options);

    Eigen::VectorXd phase_two = Eigen::VectorXd::Zero(n + rows);
    phase_two.head(n) = c;
    status = iterate(t, phase_two, static_cast<int>(n), options, result.iterations);
    result.status = status;
    if (status != LpStatus::optimal) return result;

    const BasisSolve solve = factor(t);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n + rows);
    for (Eigen::Index i = 0; i < rows; ++i) full(t.basis[static_cast<std::size_t>(i)]) = std::max(solve.x_b(i), 0.0);
    result.x = full.head(n);
    result.objective = c.dot(result.x);
    result.duals = solve.lu.transpose().solve(basic_costs(t, phase_two));
    result.duals.array() *= sign.array();
    return result;
}

}  // namespace arnpg
