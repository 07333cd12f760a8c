#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "arnpg/algorithms.hpp"
#include "arnpg/criteria.hpp"
#include "arnpg/history.hpp"

namespace arnpg {

enum class CriterionKind { smooth, cmdp, maxmin };

std::string to_string(CriterionKind kind);
CriterionKind criterion_from_string(const std::string& name);

struct CriterionSpec {
    CriterionKind kind = CriterionKind::cmdp;
    SmoothScalarizer scalarizer;  // smooth
    Eigen::VectorXd thresholds;   // cmdp: b_2..b_m
    Eigen::VectorXd scales;       // maxmin: c_1..c_m
};

/// Union of every driver's knobs; each algorithm reads the ones it uses.
struct Hyperparameters {
    double alpha = 0.2;
    double eta = 1.0;
    double eta_prime = 1.0;
    ScheduleSpec schedule;
    int macro_steps = 100;
    double tolerance = 0.01;   // crpo
    double lambda_max = 1e4;   // npg_pd
    std::uint64_t seed = 0;
    std::optional<double> optimum;
    std::optional<Eigen::VectorXd> optimal_duals;
};

/// Defaults taken from the tabular experiments: epd (alpha 0.2, eta 1,
/// eta' 1), imd (alpha 0.01, eta 4.5), omda (alpha 1, eta 0.08, eta' 2),
/// npg_pd (eta 1, eta' 1), crpo (eta 0.4, tolerance 0.01), mo_npg (eta 0.93).
Hyperparameters default_hyperparameters(AlgorithmId id);

/// The criterion each algorithm solves.
CriterionKind criterion_of(AlgorithmId id);

/// Dispatches to the matching driver. Throws ParameterError when the
/// criterion does not fit the algorithm.
RunHistory run_algorithm(AlgorithmId id, const TabularMdp& mdp, const CriterionSpec& criterion,
                         const Hyperparameters& hyper, Estimator* estimator = nullptr);

}  // namespace arnpg
