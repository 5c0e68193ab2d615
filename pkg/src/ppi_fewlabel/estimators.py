"""Point estimators of the gold-label mean.

All PPI variants are evaluated in the rearranged form

    mean(h) + [mean(t(f) over D_N) - mean(t(f) over D_n)]

where ``t`` is the fitted transform (``lam * f`` or the sigmoid). This equals
the textbook ``mean_N(t) + mean_n(h - t)`` algebraically; using correctly
rounded means makes the two cancellation properties exact in floating point:
a zero weight returns the classical mean bit-for-bit, and identical
labelled/unlabelled ``f`` multisets cancel completely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InsufficientData
from .regress import (
    DEGENERATE,
    CvPolicy,
    PostHocFit,
    cv_select_sigmoid_reg,
    fit_lambda_ols,
    fit_lambda_ridge,
    fit_sigmoid,
    select_ridge_alpha,
)
from .samplestats import LabelledSample, UnlabelledSample, exact_mean

METHODS = (
    "classical",
    "ppi-fixed",
    "ppi++",
    "ridge-ppi",
    "sigmoid-ppi",
    "sigmoid-ppi-adjusted",
)

FALLBACK = "fallback-to-classical"
ADJUST_RATIO = 0.05


@dataclass(frozen=True)
class Estimate:
    value: float
    method: str
    n: int
    N: int
    fit: Optional[PostHocFit] = None
    flags: tuple = ()

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite estimate from {self.method}")
        if self.method == "classical" and self.fit is not None:
            raise ValueError("classical estimates carry no fit")


def _require(labelled: LabelledSample, unlabelled: Optional[UnlabelledSample] = None):
    if labelled.n < 1:
        raise InsufficientData("labelled sample is empty")
    if unlabelled is not None and unlabelled.N < 1:
        raise InsufficientData("unlabelled sample is empty; PPI methods need pseudolabelled data")


def classical_mean(labelled: LabelledSample) -> Estimate:
    _require(labelled)
    return Estimate(exact_mean(labelled.h), "classical", labelled.n, 0)


def _combine(labelled, unlabelled, t_lab, t_unlab) -> float:
    return exact_mean(labelled.h) + (exact_mean(t_unlab) - exact_mean(t_lab))


def ppi_fixed(labelled: LabelledSample, unlabelled: UnlabelledSample, lam: float) -> Estimate:
    """PPI with a user-chosen weight ``lam``."""
    _require(labelled, unlabelled)
    if not math.isfinite(lam):
        raise ValueError("lam must be finite")
    value = _combine(labelled, unlabelled, lam * labelled.f, lam * unlabelled.f)
    return Estimate(value, "ppi-fixed", labelled.n, unlabelled.N)


def _fallback(labelled, unlabelled, method, reason=FALLBACK) -> Estimate:
    return Estimate(exact_mean(labelled.h), method, labelled.n, unlabelled.N, flags=(reason,))


def _with_lambda(labelled, unlabelled, fit: PostHocFit, method: str) -> Estimate:
    value = _combine(labelled, unlabelled, fit.lam * labelled.f, fit.lam * unlabelled.f)
    return Estimate(value, method, labelled.n, unlabelled.N, fit=fit, flags=fit.flags)


def cross_fit_split(labelled: LabelledSample, rng_seed: int) -> tuple[LabelledSample, LabelledSample]:
    """Seeded 50/50 split into (fitting half, estimation half)."""
    perm = np.random.default_rng(rng_seed).permutation(labelled.n)
    k = labelled.n // 2
    return labelled.take(np.sort(perm[:k])), labelled.take(np.sort(perm[k:]))


def ppi_plus_plus(
    labelled: LabelledSample,
    unlabelled: UnlabelledSample,
    cross_fit: bool = False,
    rng_seed: int = 0,
) -> Estimate:
    """PPI with the sample regression coefficient as weight.

    With ``cross_fit`` the weight is fit on one half of the labelled data and
    the estimate is built from the other half only, so the weight is
    independent of the data it multiplies.
    """
    _require(labelled, unlabelled)
    if labelled.n < 2 or (cross_fit and labelled.n < 4):
        return _fallback(labelled, unlabelled, "ppi++")
    if cross_fit:
        fit_half, est_half = cross_fit_split(labelled, rng_seed)
        fit = fit_lambda_ols(fit_half, n=est_half.n, N=unlabelled.N)
        return _with_lambda(est_half, unlabelled, fit, "ppi++")
    fit = fit_lambda_ols(labelled, N=unlabelled.N)
    return _with_lambda(labelled, unlabelled, fit, "ppi++")


def ridge_ppi(
    labelled: LabelledSample,
    unlabelled: UnlabelledSample,
    policy: Optional[CvPolicy] = None,
    rng_seed: int = 0,
) -> Estimate:
    _require(labelled, unlabelled)
    if labelled.n < 2:
        return _fallback(labelled, unlabelled, "ridge-ppi")
    policy = policy or CvPolicy.ridge(labelled.n)
    if labelled.n < policy.fold_count:
        return _fallback(labelled, unlabelled, "ridge-ppi")
    alpha = select_ridge_alpha(labelled, policy, rng_seed)
    fit = fit_lambda_ridge(labelled, alpha, N=unlabelled.N)
    return _with_lambda(labelled, unlabelled, fit, "ridge-ppi")


def default_adjusted(n: int, N: int) -> bool:
    return n / N > ADJUST_RATIO


def sigmoid_ppi(
    labelled: LabelledSample,
    unlabelled: UnlabelledSample,
    policy: Optional[CvPolicy] = None,
    adjusted: Optional[bool] = None,
    rng_seed: int = 0,
) -> Estimate:
    """PPI with a fitted sigmoid transform of ``f`` in place of ``lam * f``.

    ``adjusted`` scales the transform by 1/(1 + n/N); ``None`` turns it on
    when n/N exceeds 0.05.
    """
    _require(labelled, unlabelled)
    if adjusted is None:
        adjusted = default_adjusted(labelled.n, unlabelled.N)
    method = "sigmoid-ppi-adjusted" if adjusted else "sigmoid-ppi"
    if labelled.n < 2:
        return _fallback(labelled, unlabelled, method)
    policy = policy or CvPolicy.sigmoid(labelled.n)
    if labelled.n < policy.fold_count:
        return _fallback(labelled, unlabelled, method)
    reg = cv_select_sigmoid_reg(labelled, policy, rng_seed)
    fit = fit_sigmoid(labelled, reg, N=unlabelled.N, adjusted=adjusted)
    value = _combine(labelled, unlabelled, fit.transform(labelled.f), fit.transform(unlabelled.f))
    return Estimate(value, method, labelled.n, unlabelled.N, fit=fit, flags=fit.flags)


@dataclass(frozen=True)
class EstimatorConfig:
    """Options shared by ``run_method`` callers (CLI, benchmark harness)."""

    lam: float = 1.0
    cross_fit: bool = False
    ridge_grid: Optional[tuple] = None
    sigmoid_grid: Optional[tuple] = None
    adjusted: Optional[bool] = None
    fold_count: Optional[int] = None

    def ridge_policy(self, n: int) -> CvPolicy:
        p = CvPolicy.ridge(n, self.ridge_grid)
        return CvPolicy(self.fold_count, p.candidate_grid) if self.fold_count else p

    def sigmoid_policy(self, n: int) -> CvPolicy:
        p = CvPolicy.sigmoid(n, self.sigmoid_grid)
        return CvPolicy(self.fold_count, p.candidate_grid) if self.fold_count else p


def run_method(
    method: str,
    labelled: LabelledSample,
    unlabelled: UnlabelledSample,
    rng_seed: int,
    config: EstimatorConfig = EstimatorConfig(),
) -> Estimate:
    if method == "classical":
        return classical_mean(labelled)
    if method == "ppi-fixed":
        return ppi_fixed(labelled, unlabelled, config.lam)
    if method == "ppi++":
        return ppi_plus_plus(labelled, unlabelled, config.cross_fit, rng_seed)
    if method == "ridge-ppi":
        return ridge_ppi(labelled, unlabelled, config.ridge_policy(labelled.n), rng_seed)
    if method in ("sigmoid-ppi", "sigmoid-ppi-adjusted"):
        adjusted = True if method == "sigmoid-ppi-adjusted" else config.adjusted
        return sigmoid_ppi(labelled, unlabelled, config.sigmoid_policy(labelled.n), adjusted, rng_seed)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


__all__ = [
    "DEGENERATE",
    "FALLBACK",
    "METHODS",
    "Estimate",
    "EstimatorConfig",
    "classical_mean",
    "cross_fit_split",
    "default_adjusted",
    "ppi_fixed",
    "ppi_plus_plus",
    "ridge_ppi",
    "run_method",
    "sigmoid_ppi",
]
