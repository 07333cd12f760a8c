#pragma once

#include <Eigen/Dense>

namespace arnpg {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct SimplexOptions {
    int max_iterations = 100000;
    double optimality_tol = 1e-11;  // reduced-cost threshold
    double pivot_tol = 1e-11;       // smallest usable pivot element
    double feasibility_tol = 1e-9;  // phase-one objective accepted as zero
};

struct SimplexResult {
    LpStatus status = LpStatus::iteration_limit;
    Eigen::VectorXd x;
    double objective = 0.0;
    /// y = B^{-T} c_B, i.e. d(objective)/d(b_row) for each equality row.
    Eigen::VectorXd duals;
    int iterations = 0;
};

/// Dense two-phase revised simplex for
///   maximize c^T x  subject to  A x = b,  x >= 0.
/// Bland's rule on both the entering and the leaving variable, so the method
/// terminates on degenerate problems. The basis is refactorized by LU at every
/// iteration; intended for a few hundred columns at most.
SimplexResult solve_standard_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                const SimplexOptions& options = {});

}  // namespace arnpg
