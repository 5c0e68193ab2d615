"""Post-hoc regressors mapping the pseudolabel ``f`` onto the gold label ``h``.

Choosing the PPI weight is treated as a univariate regression problem. This
module provides the OLS and ridge slopes (rescaled by ``1 / (1 + n/N)``), a
two-parameter sigmoid regressor, and k-fold cross validation for picking the
regularisation strength of either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import expit

from .errors import InsufficientData, OptimizationDiverged
from .samplestats import LabelledSample, exact_mean, unbiased_covariance, unbiased_variance

RIDGE_GRID = (0.0,) + tuple(10.0**k for k in range(-4, 4))
SIGMOID_REG_GRID = tuple(10.0**k for k in range(-5, 2))

SIGMOID_GRAD_TOL = 1e-8
SIGMOID_MAX_ITER = 10_000
_ARMIJO = 1e-4
_TIE_RTOL = 1e-12
_ROUNDOFF = 4 * np.finfo(np.float64).eps

DEGENERATE = "degenerate-variance"
LAMBDA_OUTSIDE_UNIT = "lambda-outside-unit-interval"
NOT_CONVERGED = "not-converged"


@dataclass(frozen=True)
class PostHocFit:
    kind: str  # "linear" or "sigmoid"
    n: int
    N: float
    var_f: float
    cov_fh: float
    lam: float = 0.0
    slope: float = 0.0
    offset: float = 0.0
    adjusted: bool = False
    ridge_alpha: float = 0.0
    l2_reg: float = 0.0
    intercept: float = 0.0
    iterations: int = 0
    flags: tuple = ()

    @property
    def degenerate(self) -> bool:
        return DEGENERATE in self.flags

    def transform(self, f) -> np.ndarray:
        """Apply the fitted map to pseudolabels (including any n/N scaling)."""
        f = np.asarray(f, dtype=np.float64)
        if self.kind == "linear":
            return self.lam * f
        g = sigmoid(f, self.slope, self.offset)
        if self.adjusted:
            g = g * scale_factor(self.n, self.N)
        return g


@dataclass(frozen=True)
class CvPolicy:
    fold_count: int
    candidate_grid: tuple
    tie_break: str = field(default="prefer-larger-regularizer")

    def __post_init__(self):
        grid = tuple(float(a) for a in self.candidate_grid)
        if not grid:
            raise ValueError("candidate grid must be nonempty")
        if any(a < 0 or not math.isfinite(a) for a in grid):
            raise ValueError("grid values must be finite and >= 0")
        if list(grid) != sorted(grid):
            raise ValueError("candidate grid must be sorted ascending")
        if self.fold_count < 2:
            raise ValueError("fold_count must be >= 2")
        if self.tie_break != "prefer-larger-regularizer":
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        object.__setattr__(self, "candidate_grid", grid)

    @classmethod
    def ridge(cls, n: int, grid: Optional[Sequence[float]] = None) -> "CvPolicy":
        return cls(max(2, min(5, n)), tuple(grid) if grid is not None else RIDGE_GRID)

    @classmethod
    def sigmoid(cls, n: int, grid: Optional[Sequence[float]] = None) -> "CvPolicy":
        return cls(max(2, min(5, n)), tuple(grid) if grid is not None else SIGMOID_REG_GRID)


def scale_factor(n: int, N: float) -> float:
    """(1 + n/N)^-1; N may be ``math.inf``."""
    return 1.0 / (1.0 + n / N)


# ---------------------------------------------------------------------------
# linear


def fit_lambda_ridge(
    labelled: LabelledSample, ridge_alpha: float, n: Optional[int] = None, N: float = math.inf
) -> PostHocFit:
    """lambda = Cov(h, f) / (Var(f) + alpha) / (1 + n/N), never clipped.

    ``n`` is the labelled size of the estimate the weight will be used in; it
    defaults to the size of ``labelled``.
    """
    if ridge_alpha < 0:
        raise ValueError("ridge_alpha must be >= 0")
    if labelled.n < 2:
        raise InsufficientData("fitting lambda needs n >= 2")
    n = labelled.n if n is None else n
    var_f = unbiased_variance(labelled.f)
    cov = unbiased_covariance(labelled.h, labelled.f)
    flags = []
    denom = var_f + ridge_alpha
    if denom == 0:
        lam = 0.0
        flags.append(DEGENERATE)
    else:
        lam = cov / denom * scale_factor(n, N)
    if abs(lam) > 1:
        flags.append(LAMBDA_OUTSIDE_UNIT)
    intercept = exact_mean(labelled.h) - lam * exact_mean(labelled.f)
    return PostHocFit(
        kind="linear",
        n=n,
        N=N,
        var_f=var_f,
        cov_fh=cov,
        lam=lam,
        ridge_alpha=float(ridge_alpha),
        intercept=intercept,
        flags=tuple(flags),
    )


def fit_lambda_ols(labelled: LabelledSample, n: Optional[int] = None, N: float = math.inf) -> PostHocFit:
    return fit_lambda_ridge(labelled, 0.0, n, N)


# ---------------------------------------------------------------------------
# sigmoid


def sigmoid(f, slope: float, offset: float) -> np.ndarray:
    """g(f) = 1 / (1 + exp(-slope*f + offset))."""
    return expit(slope * np.asarray(f, dtype=np.float64) - offset)


def sigmoid_objective(params, f, h, l2_reg: float) -> tuple[float, np.ndarray]:
    """Intercept-corrected MSE of ``h ~ g(f) + b`` plus an L2 penalty.

    The intercept is the closed-form optimum ``mean(h) - mean(g)``, so the
    data term equals the biased variance of the residual ``h - g``.
    Returns (objective, gradient wrt (slope, offset)).
    """
    slope, offset = float(params[0]), float(params[1])
    n = f.size
    g = expit(slope * f - offset)
    r = h - g
    r -= r.sum() / n
    obj = float(r.dot(r)) / n + l2_reg * (slope * slope + offset * offset)
    w = r * g * (1.0 - g)
    grad = np.array(
        [
            -2.0 / n * float(w.dot(f)) + 2.0 * l2_reg * slope,
            2.0 / n * float(w.sum()) + 2.0 * l2_reg * offset,
        ]
    )
    return obj, grad


def _descend(fun: Callable, x0, tol: float, max_iter: int):
    """Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking
    on a function of two parameters.

    Monotone up to rounding: an accepted iterate never raises the objective
    by more than a few ulps. The 2-vectors are kept as Python floats; numpy
    dispatch dominates the cost otherwise.
    """
    x0_, x1 = float(x0[0]), float(x0[1])
    obj, grad = fun((x0_, x1))
    g0, g1 = float(grad[0]), float(grad[1])
    if not math.isfinite(obj):
        raise OptimizationDiverged("non-finite objective at initialization")
    step = 1.0
    it = 0
    converged = False
    while it < max_iter:
        gsq = g0 * g0 + g1 * g1
        if math.sqrt(gsq) < tol:
            converged = True
            break
        t = step
        while True:
            n0, n1 = x0_ - t * g0, x1 - t * g1
            obj_new, grad_new = fun((n0, n1))
            h0, h1 = float(grad_new[0]), float(grad_new[1])
            if not (math.isfinite(obj_new) and math.isfinite(h0) and math.isfinite(h1)):
                raise OptimizationDiverged(f"non-finite objective at iteration {it}")
            # the slack absorbs rounding in the objective near a minimum,
            # where the required decrease falls below one ulp
            if obj_new <= obj - _ARMIJO * t * gsq + _ROUNDOFF * abs(obj):
                break
            t *= 0.5
            if t < 1e-20:
                # no representable descent left along -grad
                return np.array([x0_, x1]), obj, it, True
        s0, s1 = n0 - x0_, n1 - x1
        sy = s0 * (h0 - g0) + s1 * (h1 - g1)
        step = (s0 * s0 + s1 * s1) / sy if sy > 0 else 2.0 * t
        step = min(max(step, 1e-10), 1e10)
        x0_, x1, obj, g0, g1 = n0, n1, obj_new, h0, h1
        it += 1
    return np.array([x0_, x1]), obj, it, converged


def fit_sigmoid(
    labelled: LabelledSample,
    l2_reg: float,
    n: Optional[int] = None,
    N: float = math.inf,
    adjusted: bool = False,
) -> PostHocFit:
    """Fit g(f) = sigmoid(slope*f - offset) to h by penalised least squares.

    Starts from slope=1, offset=0. ``n``/``N``/``adjusted`` only describe how
    the fit will be used downstream; the optimisation itself ignores them.
    """
    if l2_reg < 0:
        raise ValueError("l2_reg must be >= 0")
    if labelled.n < 2:
        raise InsufficientData("fit_sigmoid needs n >= 2")
    f, h = labelled.f, labelled.h
    n = labelled.n if n is None else n
    var_f = unbiased_variance(f)
    cov = unbiased_covariance(f, h)
    flags = []
    if var_f == 0 or unbiased_variance(h) == 0:
        # data term is constant in the parameters, so the penalty alone
        # decides: the minimiser is the origin (a constant g)
        params = np.zeros(2)
        iterations = 0
        flags.append(DEGENERATE)
    else:
        params, _, iterations, converged = _descend(
            lambda p: sigmoid_objective(p, f, h, l2_reg),
            np.array([1.0, 0.0]),
            SIGMOID_GRAD_TOL,
            SIGMOID_MAX_ITER,
        )
        if not converged:
            flags.append(NOT_CONVERGED)
    slope, offset = float(params[0]), float(params[1])
    intercept = exact_mean(h) - exact_mean(sigmoid(f, slope, offset))
    return PostHocFit(
        kind="sigmoid",
        n=n,
        N=N,
        var_f=var_f,
        cov_fh=cov,
        slope=slope,
        offset=offset,
        adjusted=adjusted,
        l2_reg=float(l2_reg),
        intercept=intercept,
        iterations=iterations,
        flags=tuple(flags),
    )


def sigmoid_residual_mse(fit: PostHocFit, labelled: LabelledSample) -> float:
    """Mean squared residual of h - g(f) - b with b recomputed on ``labelled``."""
    r = labelled.h - sigmoid(labelled.f, fit.slope, fit.offset)
    r = r - exact_mean(r)
    return float(np.mean(r * r))


# ---------------------------------------------------------------------------
# cross validation


def make_folds(n: int, fold_count: int, rng_seed: int) -> list[np.ndarray]:
    """Seeded shuffle then contiguous blocks; leave-one-out when n < 2*k."""
    if n < fold_count:
        raise InsufficientData(f"n={n} is smaller than fold_count={fold_count}")
    perm = np.random.default_rng(rng_seed).permutation(n)
    if n < 2 * fold_count:
        return [perm[i : i + 1] for i in range(n)]
    return np.array_split(perm, fold_count)


def _linear_fold_error(train: LabelledSample, test: LabelledSample, alpha: float) -> float:
    if train.n < 2:
        lam = 0.0
    else:
        lam = fit_lambda_ridge(train, alpha).lam
    b = exact_mean(train.h) - lam * exact_mean(train.f)
    r = test.h - lam * test.f - b
    return float(np.mean(r * r))


def _sigmoid_fold_error(train: LabelledSample, test: LabelledSample, reg: float) -> float:
    if train.n < 2:
        slope = offset = 0.0
    else:
        fit = fit_sigmoid(train, reg)
        slope, offset = fit.slope, fit.offset
    b = exact_mean(train.h) - exact_mean(sigmoid(train.f, slope, offset))
    r = test.h - sigmoid(test.f, slope, offset) - b
    return float(np.mean(r * r))


def cv_scores(
    labelled: LabelledSample,
    policy: CvPolicy,
    rng_seed: int,
    fold_error: Callable[[LabelledSample, LabelledSample, float], float],
) -> np.ndarray:
    """Mean held-out squared error across folds for each grid candidate."""
    folds = make_folds(labelled.n, policy.fold_count, rng_seed)
    all_idx = np.arange(labelled.n)
    splits = []
    for test_idx in folds:
        mask = np.ones(labelled.n, dtype=bool)
        mask[test_idx] = False
        splits.append((labelled.take(all_idx[mask]), labelled.take(test_idx)))
    scores = np.empty(len(policy.candidate_grid))
    for j, reg in enumerate(policy.candidate_grid):
        scores[j] = np.mean([fold_error(train, test, reg) for train, test in splits])
    return scores


def _pick(grid: tuple, scores: np.ndarray) -> float:
    best = float(scores.min())
    ok = np.flatnonzero(scores <= best + _TIE_RTOL * abs(best))
    return grid[int(ok.max())]


def select_ridge_alpha(labelled: LabelledSample, policy: CvPolicy, rng_seed: int) -> float:
    if labelled.n < policy.fold_count:
        raise InsufficientData(f"n={labelled.n} is smaller than fold_count={policy.fold_count}")
    if len(policy.candidate_grid) == 1:
        return policy.candidate_grid[0]
    scores = cv_scores(labelled, policy, rng_seed, _linear_fold_error)
    return _pick(policy.candidate_grid, scores)


def cv_select_sigmoid_reg(labelled: LabelledSample, policy: CvPolicy, rng_seed: int) -> float:
    if labelled.n < policy.fold_count:
        raise InsufficientData(f"n={labelled.n} is smaller than fold_count={policy.fold_count}")
    if len(policy.candidate_grid) == 1:
        return policy.candidate_grid[0]
    scores = cv_scores(labelled, policy, rng_seed, _sigmoid_fold_error)
    return _pick(policy.candidate_grid, scores)
