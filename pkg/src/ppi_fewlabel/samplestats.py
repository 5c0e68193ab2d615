"""Unbiased sample moments and the paired-sample containers.

Everything here uses two-pass summation in float64 so that results do not
depend on accumulation order beyond what ``math.fsum`` already guarantees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InsufficientData, ShapeError

CS_TOL = 1e-9


def _as_vector(xs, name: str) -> np.ndarray:
    arr = np.asarray(xs, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def exact_mean(xs) -> float:
    """Correctly rounded mean; identical for any ordering of the same multiset."""
    xs = np.asarray(xs, dtype=np.float64).reshape(-1)
    if xs.size == 0:
        raise InsufficientData("mean of an empty vector")
    return math.fsum(xs.tolist()) / xs.size


@dataclass(frozen=True)
class LabelledSample:
    """Paired pseudolabel scores ``f`` and gold labels ``h``."""

    f: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        f = _as_vector(self.f, "f")
        h = _as_vector(self.h, "h")
        if f.shape != h.shape:
            raise ShapeError(f"f has {f.size} values but h has {h.size}")
        f.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return int(self.f.size)

    def __len__(self) -> int:
        return self.n

    def take(self, idx) -> "LabelledSample":
        return LabelledSample(self.f[idx], self.h[idx])


@dataclass(frozen=True)
class UnlabelledSample:
    """Pseudolabel scores on the large unlabelled pool."""

    f: np.ndarray

    def __post_init__(self):
        f = _as_vector(self.f, "f")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    @property
    def N(self) -> int:
        return int(self.f.size)

    def __len__(self) -> int:
        return self.N


def unbiased_variance(xs) -> float:
    """Sample variance with the n-1 divisor."""
    return unbiased_covariance(xs, xs)


def unbiased_covariance(xs, ys) -> float:
    """Sample covariance with the n-1 divisor (two-pass)."""
    x = np.asarray(xs, dtype=np.float64).reshape(-1)
    y = np.asarray(ys, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise ShapeError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise InsufficientData("covariance needs at least 2 observations")
    dx = x - exact_mean(x)
    dy = y - exact_mean(y)
    return math.fsum((dx * dy).tolist()) / (x.size - 1)


@dataclass(frozen=True)
class DistributionStats:
    """Moments of (f, h) consumed by the analytic variance formulas.

    ``var_cov_hat`` is the variance of the sample covariance estimator at
    whatever labelled size the caller has in mind.
    """

    mean_f: float
    var_f: float
    var_h: float
    cov_fh: float
    corr_fh: float
    var_cov_hat: float = 0.0

    def __post_init__(self):
        for name in ("mean_f", "var_f", "var_h", "cov_fh", "corr_fh", "var_cov_hat"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.var_f < 0 or self.var_h < 0 or self.var_cov_hat < 0:
            raise ValueError("variances must be non-negative")
        if self.cov_fh**2 > self.var_f * self.var_h * (1 + CS_TOL) + CS_TOL:
            raise ValueError("covariance violates Cauchy-Schwarz")
        if not -1.0 - CS_TOL <= self.corr_fh <= 1.0 + CS_TOL:
            raise ValueError("correlation outside [-1, 1]")

    @classmethod
    def from_cov(cls, mean_f, var_f, var_h, cov_fh, var_cov_hat=0.0) -> "DistributionStats":
        return cls(mean_f, var_f, var_h, cov_fh, _corr(cov_fh, var_f, var_h), var_cov_hat)

    @classmethod
    def from_corr(cls, mean_f, var_f, var_h, corr_fh, var_cov_hat=0.0) -> "DistributionStats":
        cov = corr_fh * math.sqrt(var_f * var_h)
        return cls(mean_f, var_f, var_h, cov, corr_fh, var_cov_hat)

    def replace(self, **changes) -> "DistributionStats":
        """Copy with some fields changed; correlation is held fixed and
        covariance recomputed when ``var_f`` or ``var_h`` change."""
        fields = dict(
            mean_f=self.mean_f,
            var_f=self.var_f,
            var_h=self.var_h,
            corr_fh=self.corr_fh,
            var_cov_hat=self.var_cov_hat,
        )
        fields.update(changes)
        return DistributionStats.from_corr(**fields)


def _corr(cov: float, var_f: float, var_h: float) -> float:
    if var_f <= 0 or var_h <= 0:
        return 0.0
    r = cov / math.sqrt(var_f * var_h)
    return min(1.0, max(-1.0, r))


def plugin_var_cov_hat(f, h) -> float:
    """Plug-in estimate of Var[Cov_hat]: mean squared spread of the centred
    cross products around the sample covariance, divided by n. Approximate."""
    f = np.asarray(f, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = f.size
    cov = unbiased_covariance(f, h)
    prods = (f - exact_mean(f)) * (h - exact_mean(h))
    return math.fsum(((prods - cov) ** 2).tolist()) / n / n


def compute_stats(labelled: LabelledSample, var_cov_hat: Optional[float] = None) -> DistributionStats:
    if labelled.n < 2:
        raise InsufficientData("compute_stats needs n >= 2")
    f, h = labelled.f, labelled.h
    var_f = unbiased_variance(f)
    var_h = unbiased_variance(h)
    cov = unbiased_covariance(f, h)
    if var_cov_hat is None:
        var_cov_hat = plugin_var_cov_hat(f, h)
    return DistributionStats.from_cov(exact_mean(f), var_f, var_h, cov, float(var_cov_hat))
