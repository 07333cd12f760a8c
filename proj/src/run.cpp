#include "arnpg/run.hpp"

#include "arnpg/baselines.hpp"
#include "arnpg/error.hpp"

namespace arnpg {

std::string to_string(CriterionKind kind) {
    switch (kind) {
        case CriterionKind::smooth: return "smooth";
        case CriterionKind::cmdp: return "cmdp";
        case CriterionKind::maxmin: return "maxmin";
    }
    return "unknown";
}

CriterionKind criterion_from_string(const std::string& name) {
    for (CriterionKind kind : {CriterionKind::smooth, CriterionKind::cmdp, CriterionKind::maxmin}) {
        if (to_string(kind) == name) return kind;
    }
    throw ParameterError("unknown criterion '" + name + "'");
}

Hyperparameters default_hyperparameters(AlgorithmId id) {
    Hyperparameters h;
    switch (id) {
        case AlgorithmId::imd:
            h.alpha = 0.01;
            h.eta = 4.5;
            break;
        case AlgorithmId::epd:
            h.alpha = 0.2;
            h.eta = 1.0;
            h.eta_prime = 1.0;
            break;
        case AlgorithmId::omda:
            h.alpha = 1.0;
            h.eta = 0.08;
            h.eta_prime = 2.0;
            break;
        case AlgorithmId::npg_pd:
            h.eta = 1.0;
            h.eta_prime = 1.0;
            break;
        case AlgorithmId::crpo:
            h.eta = 0.4;
            break;
        case AlgorithmId::mo_npg:
            h.eta = 0.93;
            break;
    }
    return h;
}

CriterionKind criterion_of(AlgorithmId id) {
    switch (id) {
        case AlgorithmId::imd: return CriterionKind::smooth;
        case AlgorithmId::omda:
        case AlgorithmId::mo_npg: return CriterionKind::maxmin;
        default: return CriterionKind::cmdp;
    }
}

RunHistory run_algorithm(AlgorithmId id, const TabularMdp& mdp, const CriterionSpec& criterion,
                         const Hyperparameters& hyper, Estimator* estimator) {
    if (criterion.kind != criterion_of(id)) {
        throw ParameterError("algorithm '" + to_string(id) + "' solves the " + to_string(criterion_of(id)) +
                             " criterion, not " + to_string(criterion.kind));
    }
    switch (id) {
        case AlgorithmId::imd: {
            ImdOptions o;
            o.alpha = hyper.alpha;
            o.eta = hyper.eta;
            o.schedule = hyper.schedule;
            o.macro_steps = hyper.macro_steps;
            o.seed = hyper.seed;
            o.optimum = hyper.optimum;
            return arnpg_imd(mdp, criterion.scalarizer, o, estimator);
        }
        case AlgorithmId::epd: {
            EpdOptions o;
            o.thresholds = criterion.thresholds;
            o.eta_prime = hyper.eta_prime;
            o.alpha = hyper.alpha;
            o.eta = hyper.eta;
            o.schedule = hyper.schedule;
            o.macro_steps = hyper.macro_steps;
            o.seed = hyper.seed;
            o.optimum = hyper.optimum;
            o.optimal_duals = hyper.optimal_duals;
            return arnpg_epd(mdp, o, estimator);
        }
        case AlgorithmId::omda: {
            OmdaOptions o;
            o.eta_prime = hyper.eta_prime;
            o.alpha = hyper.alpha;
            o.eta = hyper.eta;
            o.schedule = hyper.schedule;
            o.macro_steps = hyper.macro_steps;
            o.seed = hyper.seed;
            o.optimum = hyper.optimum;
            return arnpg_omda(mdp, MaxMinBifunction{criterion.scales}, o, estimator);
        }
        case AlgorithmId::npg_pd: {
            NpgPdOptions o;
            o.thresholds = criterion.thresholds;
            o.eta = hyper.eta;
            o.eta_prime = hyper.eta_prime;
            o.lambda_max = hyper.lambda_max;
            o.macro_steps = hyper.macro_steps;
            o.optimum = hyper.optimum;
            return npg_pd(mdp, o, estimator);
        }
        case AlgorithmId::crpo: {
            CrpoOptions o;
            o.thresholds = criterion.thresholds;
            o.eta = hyper.eta;
            o.tolerance = hyper.tolerance;
            o.macro_steps = hyper.macro_steps;
            o.optimum = hyper.optimum;
            return crpo(mdp, o, estimator);
        }
        case AlgorithmId::mo_npg: {
            MoNpgOptions o;
            o.eta = hyper.eta;
            o.macro_steps = hyper.macro_steps;
            o.optimum = hyper.optimum;
            return mo_npg(mdp, MaxMinBifunction{criterion.scales}, o, estimator);
        }
    }
    throw ParameterError("run_algorithm: unknown algorithm");
}

}  // namespace arnpg
