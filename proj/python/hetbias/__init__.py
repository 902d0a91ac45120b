"""Heteroscedasticity-based test for OLS bias."""

from ._core import (
    BiasTestReport,
    BpResult,
    CellSummary,
    HetbiasError,
    LadFit,
    OlsFit,
    RegressorBiasStat,
    __version__,
    bias_test,
    breusch_pagan,
    default_lag,
    fisher_z,
    generate,
    lad_fit,
    least_squares,
    ols_fit,
    pearson_r,
    run_table,
    zstat_normal,
)

__all__ = [
    "BiasTestReport",
    "BpResult",
    "CellSummary",
    "HetbiasError",
    "LadFit",
    "OlsFit",
    "RegressorBiasStat",
    "__version__",
    "bias_test",
    "breusch_pagan",
    "default_lag",
    "fisher_z",
    "generate",
    "lad_fit",
    "least_squares",
    "ols_fit",
    "pearson_r",
    "run_table",
    "zstat_normal",
]
