#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "arnpg/mdp.hpp"
#include "arnpg/policy.hpp"

namespace arnpg {

enum class AlgorithmId { imd, epd, omda, npg_pd, crpo, mo_npg };

std::string to_string(AlgorithmId id);
/// Accepts the lower-case names used in configs ("imd", "npg_pd", ...).
AlgorithmId algorithm_from_string(const std::string& name);

/// One metrics row per macro step k >= 1.
struct RunRecord {
    int k = 0;
    long long cumulative_iterations = 0;  // T = sum of micro steps so far
    int inner_steps = 0;                  // t used in this macro step
    ValueVector values;                   // exact V_{1:m}(rho) of the reported policy
    std::optional<double> scalarized;     // F of the reported policy
    Eigen::VectorXd duals;                // lambda (CMDP) or simplex weights (max-min)
    std::optional<double> avg_gap;        // requires an optimum
    Eigen::VectorXd avg_violation;        // max(0, b_i - avg_k V_i)
    Eigen::VectorXd avg_signed_violation; // b_i - avg_k V_i
    Eigen::VectorXd last_violation;       // b_i - V_i of the current policy
    std::optional<int> step_target;       // CRPO: 0 objective step, i > 0 constraint i+1
    double wall_ms = 0.0;
};

struct RunHistory {
    AlgorithmId algorithm = AlgorithmId::imd;
    int num_objectives = 0;
    int num_constraints = 0;     // m - 1 for CMDP algorithms, 0 otherwise
    int dual_first_index = 1;    // 1-based objective index of duals(0) in column names
    std::vector<RunRecord> records;
    SoftmaxPolicy final_policy;
    SoftmaxPolicy returned_policy;
    int returned_index = 0;      // macro step of returned_policy (0 = initial)
    ValueVector average_values;  // (1/K) sum_k V(pi_k)
    nlohmann::json metadata = nlohmann::json::object();
};

}  // namespace arnpg
