"""Tabular multi-objective NPG lab (Python bindings of the C++ core)."""

from ._arnpg import (
    DocumentError,
    NumericalError,
    ParameterError,
    SoftmaxPolicy,
    TabularMdp,
    cmdp_lp,
    fit_loglog_slope,
    inner_loop,
    maxmin_lp,
    occupancy,
    policy_eval,
    random_mdp,
    run_config,
    smooth_fw,
    uniform_policy,
    value_iteration,
    value_vector,
    weighted_kl,
)

__all__ = [
    "DocumentError",
    "NumericalError",
    "ParameterError",
    "SoftmaxPolicy",
    "TabularMdp",
    "cmdp_lp",
    "fit_loglog_slope",
    "inner_loop",
    "maxmin_lp",
    "occupancy",
    "policy_eval",
    "random_mdp",
    "run_config",
    "smooth_fw",
    "uniform_policy",
    "value_iteration",
    "value_vector",
    "weighted_kl",
]
