"""Bayes, empirical Bayes, and monotone EB estimation for the Borel-Tanner law."""

from .bayes import (
    BayesTable,
    build_bayes_table,
    posterior_mean,
    posterior_mean_beta,
    posterior_mean_uniform01,
)
from .distribution import (
    BTParams,
    InverseSampler,
    SupportCap,
    cdf,
    log_coeff,
    log_pmf,
    sample_branching,
    sample_inverse,
    support_cap,
)
from .empirical import EBHistory, EstimatorTable, eb_denominator, eb_numerator, eb_table
from .monotone import (
    ActionGrid,
    MonotoneRule,
    expected_monotone_cdf,
    monotone_rule_cdf,
    monotonize,
    operating_characteristic,
)
from .numerics import (
    LOG_ZERO,
    NumericError,
    log_diff_exp,
    log_exp_partial,
    log_gamma,
    reg_lower_gamma,
)
from .priors import Prior, log_weighted_integral, sample_theta
from .risk import (
    ExperimentConfig,
    ExperimentReport,
    bayes_risk,
    mle_table,
    regret_exact,
    regret_unsquared,
    run_experiment,
    run_replication,
)

__version__ = "0.1.0"

__all__ = [
    "ActionGrid",
    "BTParams",
    "BayesTable",
    "EBHistory",
    "EstimatorTable",
    "ExperimentConfig",
    "ExperimentReport",
    "InverseSampler",
    "LOG_ZERO",
    "MonotoneRule",
    "NumericError",
    "Prior",
    "SupportCap",
    "bayes_risk",
    "build_bayes_table",
    "cdf",
    "eb_denominator",
    "eb_numerator",
    "eb_table",
    "expected_monotone_cdf",
    "log_coeff",
    "log_diff_exp",
    "log_exp_partial",
    "log_gamma",
    "log_pmf",
    "log_weighted_integral",
    "mle_table",
    "monotone_rule_cdf",
    "monotonize",
    "operating_characteristic",
    "posterior_mean",
    "posterior_mean_beta",
    "posterior_mean_uniform01",
    "reg_lower_gamma",
    "regret_exact",
    "regret_unsquared",
    "run_experiment",
    "run_replication",
    "sample_branching",
    "sample_inverse",
    "sample_theta",
    "support_cap",
]
