"""Estimation of the sample maximum distribution over a future horizon.

Two estimators of P(max of the next m draws <= x): a parametric one (GEV cdf
fitted to block maxima by maximum likelihood) and a nonparametric plug-in
(m-th power of a kernel distribution estimate), together with the exact
sampling families, the asymptotic rate calculus and a reproducible Monte
Carlo harness for their integrated squared error.
"""

from .distributions import (
    BoundedTailParams,
    Burr,
    Frechet,
    GevFrechet,
    HallParams,
    Pareto,
    ReversedBurr,
    SmdSpec,
    StudentT,
    TailFamily,
    WeibullClass,
    WeibullTailParams,
)
from .estimators import GevMaxEstimator, KernelMaxEstimator
from .gev import FitResult, GevParams, block_maxima, fit_mle, gev_cdf, gev_logpdf, init_params, pe_estimate
from .kernels import (
    Bandwidth,
    KernelSpec,
    bandwidth_oracle,
    bandwidth_plugin,
    epanechnikov,
    gaussian,
    kernel_cdf,
    ne_estimate,
)
from .simulate import ExperimentConfig, MiseReport, TableReport, family_from_spec, load_config, mise, run_cell, run_table
from . import theory

__version__ = "0.1.0"

__all__ = [
    "BoundedTailParams",
    "Burr",
    "Frechet",
    "GevFrechet",
    "HallParams",
    "Pareto",
    "ReversedBurr",
    "SmdSpec",
    "StudentT",
    "TailFamily",
    "WeibullClass",
    "WeibullTailParams",
    "GevMaxEstimator",
    "KernelMaxEstimator",
    "FitResult",
    "GevParams",
    "block_maxima",
    "fit_mle",
    "gev_cdf",
    "gev_logpdf",
    "init_params",
    "pe_estimate",
    "Bandwidth",
    "KernelSpec",
    "bandwidth_oracle",
    "bandwidth_plugin",
    "epanechnikov",
    "gaussian",
    "kernel_cdf",
    "ne_estimate",
    "ExperimentConfig",
    "MiseReport",
    "TableReport",
    "family_from_spec",
    "load_config",
    "mise",
    "run_cell",
    "run_table",
    "theory",
    "__version__",
]
