"""Characteristic-functional goodness-of-fit test for Gaussianity of functional data."""

__version__ = "0.1.0"

from .bootstrap import TestResult, bootstrap_test, p_value, percentile
from .exceptions import GridMismatchError, NumericalError, NumericalWarning
from .fda import (
    CovarianceOperator,
    FunctionalSample,
    Grid,
    cov_bilinear,
    cov_quad_form,
    inner_product,
    make_grid,
    sample_covariance,
    sample_mean,
)
from .measures import (
    GaussianMeasure,
    ProbeSet,
    kernel_matrix,
    sample_gaussian_process,
    sample_probes,
)
from .simulation import (
    AlternativeSpec,
    ExperimentConfig,
    PowerRow,
    gen_alternative,
    gen_null,
    run_experiment,
)
from .statistic import (
    StatisticValue,
    ecf,
    gaussian_cf,
    influence_alt,
    influence_null,
    null_cov_kernel,
    nt_closed_form,
    nt_mc,
    sigma2_hat,
    tau_hat,
    v_n,
    z_hat,
)

__all__ = [
    "AlternativeSpec", "CovarianceOperator", "ExperimentConfig", "FunctionalSample",
    "GaussianMeasure", "Grid", "GridMismatchError", "NumericalError", "NumericalWarning",
    "PowerRow", "ProbeSet", "StatisticValue", "TestResult", "bootstrap_test", "cov_bilinear",
    "cov_quad_form", "ecf", "gaussian_cf", "gen_alternative", "gen_null", "influence_alt",
    "influence_null", "inner_product", "kernel_matrix", "make_grid", "null_cov_kernel",
    "nt_closed_form", "nt_mc", "p_value", "percentile", "run_experiment",
    "sample_covariance", "sample_gaussian_process", "sample_mean", "sample_probes",
    "sigma2_hat", "tau_hat", "v_n", "z_hat",
]
