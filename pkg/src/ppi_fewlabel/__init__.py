"""Prediction-powered mean estimation for the few-label regime."""

from .errors import (
    DegenerateVariance,
    FormatError,
    InsufficientData,
    IoError,
    OptimizationDiverged,
    PPIError,
    ShapeError,
    SpecError,
)
from .estimators import (
    Estimate,
    EstimatorConfig,
    classical_mean,
    ppi_fixed,
    ppi_plus_plus,
    ridge_ppi,
    run_method,
    sigmoid_ppi,
)
from .regress import CvPolicy, PostHocFit, fit_lambda_ols, fit_lambda_ridge, fit_sigmoid
from .samplestats import (
    DistributionStats,
    LabelledSample,
    UnlabelledSample,
    compute_stats,
    unbiased_covariance,
    unbiased_variance,
)
from .simulate import JointBernoulliSpec, run_benchmark, sample_joint

__version__ = "0.1.0"

__all__ = [
    "CvPolicy",
    "DegenerateVariance",
    "DistributionStats",
    "Estimate",
    "EstimatorConfig",
    "FormatError",
    "InsufficientData",
    "IoError",
    "JointBernoulliSpec",
    "LabelledSample",
    "OptimizationDiverged",
    "PPIError",
    "PostHocFit",
    "ShapeError",
    "SpecError",
    "UnlabelledSample",
    "classical_mean",
    "compute_stats",
    "fit_lambda_ols",
    "fit_lambda_ridge",
    "fit_sigmoid",
    "ppi_fixed",
    "ppi_plus_plus",
    "ridge_ppi",
    "run_benchmark",
    "run_method",
    "sample_joint",
    "sigmoid_ppi",
    "unbiased_covariance",
    "unbiased_variance",
]
