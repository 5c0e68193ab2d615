"""Synthetic (h, f) worlds and the resampling benchmark harness.

Randomness is derived from a master seed with ``numpy.random.SeedSequence``
spawn keys, one stream per (n, trial) in the benchmark and one per block of
trials in the moment estimator. Results therefore do not depend on how work
is split across processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InsufficientData, SpecError
from .estimators import EstimatorConfig, run_method
from .samplestats import DistributionStats, LabelledSample, UnlabelledSample, exact_mean

MC_BLOCK = 1024


@dataclass(frozen=True)
class JointBernoulliSpec:
    """Cell probabilities for (h, f) in {(1,1), (1,0), (0,1), (0,0)}."""

    p11: float
    p10: float
    p01: float
    p00: float

    def __post_init__(self):
        probs = self.probs
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise SpecError(f"cell probabilities must be finite and >= 0: {probs}")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise SpecError(f"cell probabilities sum to {probs.sum()!r}, not 1")

    @classmethod
    def from_moments(cls, mu_h: float, mu_f: float, corr: float) -> "JointBernoulliSpec":
        """Spec with the given marginal rates and correlation."""
        cov = corr * math.sqrt(mu_h * (1 - mu_h) * mu_f * (1 - mu_f))
        p11 = mu_h * mu_f + cov
        p10 = mu_h - p11
        p01 = mu_f - p11
        p00 = 1.0 - p11 - p10 - p01
        return cls(p11, p10, p01, p00)

    @property
    def probs(self) -> np.ndarray:
        return np.array([self.p11, self.p10, self.p01, self.p00], dtype=np.float64)

    @property
    def mu_h(self) -> float:
        return self.p11 + self.p10

    @property
    def mu_f(self) -> float:
        return self.p11 + self.p01

    @property
    def var_h(self) -> float:
        return self.mu_h * (1 - self.mu_h)

    @property
    def var_f(self) -> float:
        return self.mu_f * (1 - self.mu_f)

    @property
    def cov(self) -> float:
        return self.p11 - self.mu_h * self.mu_f

    @property
    def corr(self) -> float:
        d = math.sqrt(self.var_h * self.var_f)
        return self.cov / d if d > 0 else 0.0

    @property
    def pseudolabel_bias(self) -> float:
        return abs(self.mu_f - self.mu_h)

    def var_cov_hat(self, n: int) -> float:
        """Exact variance of the unbiased sample covariance at sample size n."""
        if n < 2:
            raise InsufficientData("sample covariance needs n >= 2")
        mu22 = 0.0
        for p, h, f in zip(self.probs, (1, 1, 0, 0), (1, 0, 1, 0)):
            mu22 += p * (h - self.mu_h) ** 2 * (f - self.mu_f) ** 2
        c = self.cov
        return mu22 / n - (n - 2) * c * c / (n * (n - 1)) + self.var_h * self.var_f / (n * (n - 1))

    def stats(self, n: Optional[int] = None) -> DistributionStats:
        """Population moments; ``var_cov_hat`` filled in for sample size n."""
        vch = self.var_cov_hat(n) if n is not None else 0.0
        return DistributionStats(self.mu_f, self.var_f, self.var_h, self.cov, self.corr, vch)


def _draw_cells(spec: JointBernoulliSpec, size, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    cum = np.cumsum(spec.probs)[:3]
    cells = np.searchsorted(cum, rng.random(size), side="right")
    h = (cells <= 1).astype(np.float64)
    f = ((cells == 0) | (cells == 2)).astype(np.float64)
    return f, h


def sample_joint(spec: JointBernoulliSpec, count: int, rng_seed) -> LabelledSample:
    """``count`` i.i.d. (f, h) pairs. ``rng_seed`` may be an int or a Generator."""
    if count < 1:
        raise ValueError("count must be >= 1")
    f, h = _draw_cells(spec, count, np.random.default_rng(rng_seed))
    return LabelledSample(f, h)


# ---------------------------------------------------------------------------
# benchmark


@dataclass(frozen=True)
class BenchmarkRow:
    method: str
    n: int
    trials: int
    mae: float
    std_dev: float
    normalized_mae: float
    seed: int


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple = ()
    truth: Optional[float] = field(default=None, compare=False)

    def get(self, method: str, n: int) -> BenchmarkRow:
        for row in self.rows:
            if row.method == method and row.n == n:
                return row
        raise KeyError((method, n))


Source = Union[JointBernoulliSpec, LabelledSample]


def truth_of(source: Source) -> float:
    if isinstance(source, JointBernoulliSpec):
        return source.mu_h
    return exact_mean(source.h)


def _draw_trial(source: Source, n: int, N: int, rng: np.random.Generator):
    if isinstance(source, JointBernoulliSpec):
        f, h = _draw_cells(source, n, rng)
        f_u, _ = _draw_cells(source, N, rng)
        return LabelledSample(f, h), UnlabelledSample(f_u)
    idx = rng.choice(source.n, size=n + N, replace=False)
    return source.take(idx[:n]), UnlabelledSample(source.f[idx[n:]])


def trial_stream(rng_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=tuple(key)))


def _run_chunk(task) -> np.ndarray:
    source, methods, n, N, rng_seed, trial_ids, config = task
    out = np.empty((len(trial_ids), len(methods)))
    for row, t in enumerate(trial_ids):
        rng = trial_stream(rng_seed, n, t)
        labelled, unlabelled = _draw_trial(source, n, N, rng)
        est_seed = int(rng.integers(2**32))
        for j, m in enumerate(methods):
            out[row, j] = run_method(m, labelled, unlabelled, est_seed, config).value
    return out


def _chunks(trials: int, parts: int) -> list[range]:
    size = max(1, math.ceil(trials / parts))
    return [range(s, min(trials, s + size)) for s in range(0, trials, size)]


def _map(fn, tasks, threads: int):
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, tasks))


def default_threads() -> int:
    return os.cpu_count() or 1


def run_benchmark(
    source: Source,
    methods: Sequence[str],
    n_grid: Sequence[int],
    N: int = 1000,
    trials: int = 350,
    rng_seed: int = 0,
    config: EstimatorConfig = EstimatorConfig(),
    threads: int = 1,
) -> BenchmarkReport:
    """Resample D_n and D_N ``trials`` times per n and score each method.

    Spec mode draws fresh i.i.d. samples and scores against the exact rate.
    Pool mode draws D_n and D_N disjointly without replacement and scores
    against the full-pool mean. Every method sees the same draws in a trial.
    """
    methods = list(dict.fromkeys(methods))
    if not methods:
        raise ValueError("no methods requested")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(source, LabelledSample) and source.n < max(n_grid) + N:
        raise InsufficientData(
            f"pool of {source.n} rows cannot supply disjoint draws of n={max(n_grid)} and N={N}"
        )
    scored = methods if "classical" in methods else ["classical"] + methods
    truth = truth_of(source)
    tasks = []
    for n in n_grid:
        for chunk in _chunks(trials, max(1, threads)):
            tasks.append((source, scored, n, N, rng_seed, chunk, config))
    results = _map(_run_chunk, tasks, threads)

    rows = []
    pos = 0
    for n in n_grid:
        parts = []
        while pos < len(tasks) and tasks[pos][2] == n:
            parts.append(results[pos])
            pos += 1
        est = np.vstack(parts)
        err = np.abs(est - truth)
        maes = [math.fsum(err[:, j].tolist()) / trials for j in range(len(scored))]
        base = maes[0 if scored[0] == "classical" else scored.index("classical")]
        for j, m in enumerate(scored):
            if m not in methods:
                continue
            std = float(np.std(est[:, j], ddof=1)) if trials > 1 else 0.0
            if m == "classical":
                norm = 1.0
            elif base > 0:
                norm = maes[j] / base
            else:
                norm = 1.0 if maes[j] == 0 else math.inf
            rows.append(BenchmarkRow(m, int(n), trials, maes[j], std, norm, rng_seed))
    return BenchmarkReport(tuple(rows), truth)


# ---------------------------------------------------------------------------
# Monte Carlo moments


@dataclass(frozen=True)
class MonteCarloMoments:
    mean: float
    bias: float
    bias_se: float
    variance: float
    trials: int
    n_effective: int
    lambda_mean: Optional[float] = None
    lambda_var: Optional[float] = None
    estimates: np.ndarray = field(default=None, repr=False, compare=False)


def _mc_block(task):
    method, spec, n, N, rng_seed, block, count, config = task
    rng = trial_stream(rng_seed, block)
    f, h = _draw_cells(spec, (count, n), rng)
    f_u, _ = _draw_cells(spec, (count, N), rng)
    seeds = rng.integers(2**32, size=count)
    vals = np.empty(count)
    lams = np.full(count, np.nan)
    n_eff = np.empty(count, dtype=np.int64)
    for i in range(count):
        est = run_method(method, LabelledSample(f[i], h[i]), UnlabelledSample(f_u[i]), int(seeds[i]), config)
        vals[i] = est.value
        n_eff[i] = est.n
        if est.fit is not None and est.fit.kind == "linear":
            lams[i] = est.fit.lam
    return vals, lams, n_eff


def monte_carlo_moments(
    method: str,
    spec: JointBernoulliSpec,
    n: int,
    N: int,
    trials: int,
    rng_seed: int,
    config: EstimatorConfig = EstimatorConfig(),
    threads: int = 1,
) -> MonteCarloMoments:
    """Empirical bias and variance of an estimator under ``spec``.

    When the method fits a linear weight, the weight's empirical mean and
    variance are reported as well.
    """
    if trials < 1000:
        raise InsufficientData("monte_carlo_moments needs at least 1000 trials")
    tasks = []
    for block, start in enumerate(range(0, trials, MC_BLOCK)):
        count = min(MC_BLOCK, trials - start)
        tasks.append((method, spec, n, N, rng_seed, block, count, config))
    results = _map(_mc_block, tasks, threads)
    vals = np.concatenate([r[0] for r in results])
    lams = np.concatenate([r[1] for r in results])
    n_eff = np.concatenate([r[2] for r in results])
    mean = math.fsum(vals.tolist()) / trials
    var = float(np.var(vals, ddof=1))
    lam_mean = lam_var = None
    if np.any(np.isfinite(lams)):
        fitted = lams[np.isfinite(lams)]
        lam_mean = float(fitted.mean())
        lam_var = float(fitted.var(ddof=1))
    return MonteCarloMoments(
        mean=mean,
        bias=mean - spec.mu_h,
        bias_se=math.sqrt(var / trials),
        variance=var,
        trials=trials,
        n_effective=int(np.bincount(n_eff).argmax()),
        lambda_mean=lam_mean,
        lambda_var=lam_var,
        estimates=vals,
    )
