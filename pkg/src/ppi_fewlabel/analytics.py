"""Closed-form variance predictions for PPI with a random weight.

Every formula takes the labelled size ``n`` and unlabelled size ``N`` (which
may be ``math.inf``) plus a :class:`DistributionStats`.

Two forms of the noise bracket are available. By default the weight's
variance is multiplied by ``2 E[f]^2 + (1/N + 1/n) Var[f]``. With
``corrected=True`` the ``2 E[f]^2`` part is dropped: expanding
``Var[lam * (mean_N f - mean_n f)]`` directly, it is cancelled by the
covariance between ``lam * mean_N f`` and ``lam * mean_n f``. Only the
corrected form agrees with simulation (see ``tests/test_analytics.py``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateVariance
from .samplestats import DistributionStats


@dataclass(frozen=True)
class RegimePoint:
    n: float
    N: float
    stats: DistributionStats
    e_lambda: float
    var_lambda: float

    def __post_init__(self):
        if self.n < 1 or self.N < 1:
            raise ValueError("n and N must be >= 1")
        if self.var_lambda < 0:
            raise ValueError("var_lambda must be >= 0")


def _inv(n: float, N: float) -> float:
    return 1.0 / N + 1.0 / n


def _ratio(n: float, N: float) -> float:
    return 1.0 + n / N


def noise_amplifier(stats: DistributionStats, n: float, N: float, corrected: bool = False) -> float:
    """The bracket multiplying Var[lam]: 2E[f]^2 + (1/N + 1/n) Var[f]."""
    base = _inv(n, N) * stats.var_f
    return base if corrected else 2.0 * stats.mean_f**2 + base


def v_shorthand(stats: DistributionStats, n: float, N: float, corrected: bool = False) -> float:
    """V = Var[Cov_hat] * (2E[f]^2 + (1/N + 1/n) Var[f])."""
    return stats.var_cov_hat * noise_amplifier(stats, n, N, corrected)


def excess_var_stochastic_lambda(p: RegimePoint, corrected: bool = False) -> float:
    """Var[PPI] - Var[classical] for a weight independent of the samples."""
    s = p.stats
    return (
        p.e_lambda**2 * _inv(p.n, p.N) * s.var_f
        + p.var_lambda * noise_amplifier(s, p.n, p.N, corrected)
        - 2.0 * p.e_lambda / p.n * s.cov_fh
    )


def ols_lambda_moments(stats: DistributionStats, n: float, N: float) -> tuple[float, float]:
    """Large-N moments of the scaled OLS weight: (E[lam], Var[lam]).

    Var[lam] = Var[Cov_hat] / Var[f]^2 is an asymptotic approximation that
    treats the variance denominator as known.
    """
    if stats.var_f == 0:
        raise DegenerateVariance("Var[f] = 0")
    return stats.cov_fh / (_ratio(n, N) * stats.var_f), stats.var_cov_hat / stats.var_f**2


def _gain(stats: DistributionStats, n: float, N: float) -> float:
    return stats.var_h * stats.corr_fh**2 / (_ratio(n, N) * n)


def ppi_excess_variance(stats: DistributionStats, n: float, N: float, corrected: bool = False) -> float:
    """Predicted Var[PPI++] - Var[classical] with the OLS weight."""
    vf = stats.var_f
    if vf == 0:
        raise DegenerateVariance("Var[f] = 0")
    # same operation order as ridge_excess_variance at alpha = 0, so the two
    # agree bit-for-bit there
    return v_shorthand(stats, n, N, corrected) / vf**2 - _gain(stats, n, N)


def ridge_excess_variance(
    stats: DistributionStats, ridge_alpha: float, n: float, N: float, corrected: bool = False
) -> float:
    """Predicted Var[Ridge-PPI] - Var[classical]."""
    d = stats.var_f + ridge_alpha
    if d == 0:
        raise DegenerateVariance("Var[f] + alpha = 0")
    gain = _gain(stats, n, N)
    return v_shorthand(stats, n, N, corrected) / d**2 + gain * ridge_alpha**2 / d**2 - gain


def ridge_minus_ppi_terms(
    stats: DistributionStats, ridge_alpha: float, n: float, N: float, corrected: bool = False
) -> tuple[float, float]:
    """(variance-reduction term <= 0, shrinkage-bias term >= 0)."""
    vf = stats.var_f
    if vf == 0:
        raise DegenerateVariance("Var[f] = 0")
    d = vf + ridge_alpha
    v = v_shorthand(stats, n, N, corrected)
    reduction = v * (1.0 / d**2 - 1.0 / vf**2)
    bias = stats.corr_fh**2 * stats.var_h * ridge_alpha**2 / (n * _ratio(n, N) * d**2)
    return reduction, bias


def ridge_minus_ppi(
    stats: DistributionStats, ridge_alpha: float, n: float, N: float, corrected: bool = False
) -> float:
    """Predicted Var[Ridge-PPI] - Var[PPI++]."""
    reduction, bias = ridge_minus_ppi_terms(stats, ridge_alpha, n, N, corrected)
    return reduction + bias


def optimal_ridge_alpha(stats: DistributionStats, n: float, N: float, corrected: bool = False):
    """Stationary point n(1 + n/N) V / Cov^2 of ``ridge_minus_ppi``, or None
    when Cov = 0 or the point is too large to represent.

    The objective is not convex in alpha; callers should confirm the point
    is a minimum (e.g. against alpha = 0 and a large alpha).
    """
    if stats.var_f == 0:
        raise DegenerateVariance("Var[f] = 0")
    cov_sq = stats.cov_fh**2
    if cov_sq == 0:
        # includes a covariance so small that its square underflows
        return None
    alpha = n * _ratio(n, N) * v_shorthand(stats, n, N, corrected) / cov_sq
    return alpha if np.isfinite(alpha) else None


@dataclass(frozen=True)
class Sweep:
    """Normalised PPI++ variance on a (Var[f], n) grid; NaN marks an absent cell."""

    var_f_grid: tuple
    n_grid: tuple
    N: float
    values: np.ndarray


def heatmap_sweep(
    base: DistributionStats,
    var_f_grid: Sequence[float],
    n_grid: Sequence[int],
    N: float,
    var_cov_scale: float = 0.3,
    corrected: bool = False,
) -> Sweep:
    """Var[PPI++] / Var[classical] with Var[Cov_hat] = var_cov_scale / n^2.

    Corr, Var[h] and E[f] come from ``base``; the covariance follows each
    grid value of Var[f] at fixed correlation.
    """
    var_f_grid = tuple(float(v) for v in var_f_grid)
    n_grid = tuple(n_grid)
    if not var_f_grid or not n_grid:
        raise ValueError("grids must be nonempty")
    if base.var_h == 0:
        raise DegenerateVariance("Var[h] = 0: classical variance is zero")
    out = np.full((len(var_f_grid), len(n_grid)), np.nan)
    for i, vf in enumerate(var_f_grid):
        for j, n in enumerate(n_grid):
            stats = base.replace(var_f=vf, var_cov_hat=var_cov_scale / n**2)
            try:
                excess = ppi_excess_variance(stats, n, N, corrected)
            except DegenerateVariance:
                continue
            out[i, j] = 1.0 + excess * n / base.var_h
    return Sweep(var_f_grid, n_grid, N, out)


__all__ = [
    "RegimePoint",
    "Sweep",
    "excess_var_stochastic_lambda",
    "heatmap_sweep",
    "noise_amplifier",
    "ols_lambda_moments",
    "optimal_ridge_alpha",
    "ppi_excess_variance",
    "ridge_excess_variance",
    "ridge_minus_ppi",
    "ridge_minus_ppi_terms",
    "v_shorthand",
]
