"""Goodness-of-fit tests for normality under progressive Type-II censoring."""

from .censoring import (
    CensoringScheme,
    catalog_lookup,
    catalog_table6,
    expected_uniform,
    gamma_coefficients,
    scheme_family,
    validate_scheme,
)
from .distributions import Distribution, laplace, logistic, normal, parse_distribution, student_t
from .exceptions import (
    DegenerateDenominator,
    DegenerateSample,
    DomainError,
    EmptyScheme,
    IndivisibleM,
    NonConvergence,
    ParseError,
    PcgofError,
    SchemeError,
    SchemeInconsistent,
    SchemeInfeasible,
)
from .experiments import (
    MonteCarloConfig,
    consistency_study,
    critical_value,
    null_statistic_sample,
    p_value,
    power,
    power_table,
    run_test,
)
from .gof import ALL_STATISTICS, StatisticKind, compute_all, compute_statistic, parse_statistic
from .mle import LocationScaleFit, fit_normal
from .simulate import CensoredSample, sample_progressive, sample_uniform_progressive

__version__ = "0.1.0"

__all__ = [
    "ALL_STATISTICS",
    "CensoredSample",
    "CensoringScheme",
    "DegenerateDenominator",
    "DegenerateSample",
    "Distribution",
    "DomainError",
    "EmptyScheme",
    "IndivisibleM",
    "LocationScaleFit",
    "MonteCarloConfig",
    "NonConvergence",
    "ParseError",
    "PcgofError",
    "SchemeError",
    "SchemeInconsistent",
    "SchemeInfeasible",
    "StatisticKind",
    "catalog_lookup",
    "catalog_table6",
    "compute_all",
    "compute_statistic",
    "consistency_study",
    "critical_value",
    "expected_uniform",
    "fit_normal",
    "gamma_coefficients",
    "laplace",
    "logistic",
    "normal",
    "null_statistic_sample",
    "p_value",
    "parse_distribution",
    "parse_statistic",
    "power",
    "power_table",
    "run_test",
    "sample_progressive",
    "sample_uniform_progressive",
    "scheme_family",
    "student_t",
    "validate_scheme",
    "__version__",
]
