"""Acceptance criteria 1-11, one test each.

Every test records a ``PASS``/``FAIL criterion k: ...`` line; pytest prints
them in a summary section and ``python3 tests/test_acceptance.py`` prints
them directly. Criteria with a runtime budget include it in the verdict.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES  # noqa: E402

from ppi_fewlabel.analytics import (  # noqa: E402
    RegimePoint,
    excess_var_stochastic_lambda,
    ols_lambda_moments,
    optimal_ridge_alpha,
    ppi_excess_variance,
    ridge_excess_variance,
    ridge_minus_ppi,
    ridge_minus_ppi_terms,
)
from ppi_fewlabel.cli import main  # noqa: E402
from ppi_fewlabel.estimators import EstimatorConfig, classical_mean, ppi_fixed, run_method  # noqa: E402
from ppi_fewlabel.regress import fit_lambda_ols, sigmoid_objective  # noqa: E402
from ppi_fewlabel.samplestats import DistributionStats, LabelledSample, UnlabelledSample  # noqa: E402
from ppi_fewlabel.simulate import JointBernoulliSpec, monte_carlo_moments, run_benchmark  # noqa: E402

STRONG = JointBernoulliSpec(0.45, 0.05, 0.05, 0.45)  # corr 0.8
PPI_METHODS = ("ppi-fixed", "ppi++", "ridge-ppi", "sigmoid-ppi", "sigmoid-ppi-adjusted")


def verdict(k: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def random_stats(rng, min_vch=0.0):
    var_f = rng.uniform(1e-3, 2.0)
    var_h = rng.uniform(1e-3, 2.0)
    return DistributionStats.from_corr(
        rng.uniform(-2, 2), var_f, var_h, rng.uniform(-1, 1), rng.uniform(min_vch, 0.5)
    )


def random_sizes(rng):
    n = int(rng.integers(2, 500))
    N = math.inf if rng.random() < 0.2 else int(rng.integers(1, 10_000))
    return n, N


def test_criterion_01_exact_collapse():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    collapse = 0
    for _ in range(100):
        n, N = int(rng.integers(1, 200)), int(rng.integers(1, 500))
        lab = LabelledSample(rng.normal(size=n) * 10 ** rng.uniform(-3, 3), rng.normal(size=n))
        unl = UnlabelledSample(rng.normal(size=N))
        collapse += ppi_fixed(lab, unl, 0.0).value == classical_mean(lab).value
    cancel = checked = 0
    for _ in range(10):
        n = int(rng.integers(5, 20))
        lab = LabelledSample(rng.random(n), (rng.random(n) < 0.5).astype(float))
        unl = UnlabelledSample(rng.permutation(lab.f))
        for m in PPI_METHODS:
            checked += 1
            cancel += run_method(m, lab, unl, 0, EstimatorConfig(lam=0.7)).value == classical_mean(lab).value
    dt = time.perf_counter() - t0
    ok = collapse == 100 and cancel == checked and dt < 1.0
    verdict(1, ok, f"lam=0 collapse {collapse}/100, cancellation {cancel}/{checked}, {dt:.2f}s (< 1s)")


def grid_argmin(f, h, lo=-5.0, hi=5.0, step=1e-4):
    """Intercept-corrected MSE of h - lam*f evaluated residual by residual."""
    lams = lo + step * np.arange(round((hi - lo) / step) + 1)
    best, best_lam = np.inf, None
    for chunk in np.array_split(lams, 50):
        r = h[None, :] - chunk[:, None] * f[None, :]
        r = r - r.mean(axis=1, keepdims=True)
        mse = (r * r).mean(axis=1)
        i = int(np.argmin(mse))
        if mse[i] < best:
            best, best_lam = mse[i], chunk[i]
    return best_lam


def test_criterion_02_grid_search_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(4, 101))
        f = rng.random(n)
        while np.var(f) == 0:
            f = rng.random(n)
        h = (rng.random(n) < 0.2 + 0.6 * f).astype(float)
        lam = fit_lambda_ols(LabelledSample(f, h)).lam
        assert -5 < lam < 5
        worst = max(worst, abs(lam - grid_argmin(f, h)))
    dt = time.perf_counter() - t0
    verdict(2, worst <= 2e-4 and dt < 10, f"max |lam - grid argmin| = {worst:.1e} (<= 2e-4), {dt:.1f}s (< 10s)")


@pytest.mark.slow
def test_criterion_03_fixed_weight_variance():
    t0 = time.perf_counter()
    n, N = 20, 1000
    errs = []
    for i, lam in enumerate((0.5, 1.0, 1.5)):
        mc = monte_carlo_moments("ppi-fixed", STRONG, n, N, 100_000, 30 + i, EstimatorConfig(lam=lam))
        want = STRONG.var_h / n + lam**2 * STRONG.var_f * (1 / n + 1 / N) - 2 * lam * STRONG.cov / n
        errs.append(abs(mc.variance - want) / want)
    dt = time.perf_counter() - t0
    ok = max(errs) < 0.05 and dt < 60
    detail = ", ".join(f"{e:.2%}" for e in errs)
    verdict(3, ok, f"relative variance error at lam 0.5/1/1.5 = {detail} (< 5%), {dt:.0f}s (< 60s)")


@pytest.mark.slow
def test_criterion_04_stochastic_weight_theory():
    """Cross-fit PPI++ at n = 50: the weight is fit on 25 rows and the
    estimate uses the other 25, so both the formula and the classical
    baseline use n = 25."""
    t0 = time.perf_counter()
    mc = monte_carlo_moments("ppi++", STRONG, 50, 1000, 200_000, 4, EstimatorConfig(cross_fit=True))
    n_est = mc.n_effective
    emp = mc.variance - STRONG.var_h / n_est
    p = RegimePoint(n_est, 1000, STRONG.stats(), mc.lambda_mean, mc.lambda_var)
    default = excess_var_stochastic_lambda(p)
    corrected = excess_var_stochastic_lambda(p, corrected=True)
    dt = time.perf_counter() - t0
    rel = abs(emp - default) / abs(default)
    rel_c = abs(emp - corrected) / abs(corrected)
    print(f"info criterion 4: corrected bracket {corrected:.6f}, relative error {rel_c:.2%}")
    verdict(
        4,
        rel < 0.10,
        f"empirical excess {emp:.6f} vs formula {default:.6f}, relative error {rel:.1%} (< 10%); "
        f"corrected bracket {corrected:.6f} is within {rel_c:.1%}; {dt:.0f}s",
    )


def test_criterion_05_ols_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    decreasing = 0
    for _ in range(1000):
        s = random_stats(rng, min_vch=1e-6)
        n, N = random_sizes(rng)
        e, v = ols_lambda_moments(s, n, N)
        a = excess_var_stochastic_lambda(RegimePoint(n, N, s, e, v))
        b = ppi_excess_variance(s, n, N)
        worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
        vf = s.var_f
        decreasing += ppi_excess_variance(s.replace(var_f=vf * 1.5), n, N) < ppi_excess_variance(s, n, N)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and decreasing == 1000 and dt < 5
    verdict(5, ok, f"identity max rel error {worst:.1e} (<= 1e-10), decreasing in Var[f] {decreasing}/1000, {dt:.2f}s (< 5s)")


def test_criterion_06_ridge_theory():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    signs = 0
    worst = 0.0
    for _ in range(1000):
        s = random_stats(rng)
        n, N = random_sizes(rng)
        alpha = 10 ** rng.uniform(-4, 4)
        red, bias = ridge_minus_ppi_terms(s, alpha, n, N)
        signs += red <= 0 <= bias
        diff = ridge_minus_ppi(s, alpha, n, N)
        r, p = ridge_excess_variance(s, alpha, n, N), ppi_excess_variance(s, n, N)
        worst = max(worst, abs(diff - (r - p)) / max(abs(r), abs(p), abs(diff)))
    foc = 0
    points = 0
    eps = np.finfo(float).eps
    while points < 100:
        s = random_stats(rng, min_vch=1e-4)
        n, N = random_sizes(rng)
        a = optimal_ridge_alpha(s, n, N)
        if a is None or not a > 0 or abs(s.corr_fh) < 1e-2:
            continue
        points += 1
        h = 1e-6 * a
        f_hi, f_lo = ridge_minus_ppi(s, a + h, n, N), ridge_minus_ppi(s, a - h, n, N)
        d1 = (f_hi - f_lo) / (2 * h)
        K = s.var_h * s.corr_fh**2 / (n * (1 + n / N))
        curvature = 2 * K * s.var_f / (s.var_f + a) ** 3
        rounding = 8 * eps * max(abs(f_hi), abs(f_lo)) / h
        foc += abs(d1) < 1e-6 * curvature * a + rounding
    dt = time.perf_counter() - t0
    ok = signs == 1000 and worst <= 1e-10 and foc == 100 and dt < 10
    verdict(6, ok, f"sign structure {signs}/1000, dual path max rel {worst:.1e}, alpha* stationary {foc}/100, {dt:.2f}s (< 10s)")


REGIME_HIGH = JointBernoulliSpec.from_moments(0.3, 0.5, 0.5)
REGIME_LOW = JointBernoulliSpec.from_moments(0.3, (1 - math.sqrt(0.5)) / 2, 0.5)


@pytest.mark.slow
def test_criterion_07_regime_direction():
    t0 = time.perf_counter()
    assert REGIME_HIGH.var_f == pytest.approx(2 * REGIME_LOW.var_f)
    assert REGIME_HIGH.corr == pytest.approx(REGIME_LOW.corr)
    methods = ["classical", "ppi++", "ridge-ppi"]
    high_wins = ridge_wins = 0
    cells = []
    for seed in range(5):
        hi = run_benchmark(REGIME_HIGH, methods, [10], 1000, 350, seed)
        lo = run_benchmark(REGIME_LOW, methods, [10], 1000, 350, seed)
        p_hi, p_lo = hi.get("ppi++", 10).normalized_mae, lo.get("ppi++", 10).normalized_mae
        r_lo = lo.get("ridge-ppi", 10).normalized_mae
        high_wins += p_hi < p_lo
        ridge_wins += r_lo <= p_lo
        cells.append(f"{p_hi:.3f}/{p_lo:.3f}/{r_lo:.3f}")
    dt = time.perf_counter() - t0
    ok = high_wins >= 4 and ridge_wins >= 4 and dt < 300
    verdict(
        7, ok,
        f"PPI++ better on high Var[f] {high_wins}/5, Ridge <= PPI++ on low Var[f] {ridge_wins}/5 "
        f"(ppi++ hi/ppi++ lo/ridge lo: {', '.join(cells)}), {dt:.0f}s (< 300s)",
    )  # fmt: skip


@pytest.mark.slow
def test_criterion_08_few_label_win():
    methods = ["classical", "ridge-ppi", "sigmoid-ppi"]
    wins = 0
    worst = 0.0
    for seed in range(5):
        r = run_benchmark(STRONG, methods, [10, 20], 1000, 350, seed)
        vals = [r.get(m, n).normalized_mae for m in methods[1:] for n in (10, 20)]
        worst = max(worst, max(vals))
        wins += max(vals) < 1
    verdict(8, wins >= 4, f"Ridge-PPI and Sigmoid-PPI beat classical at n=10,20 in {wins}/5 seeds (worst normalized MAE {worst:.3f})")


@pytest.mark.slow
def test_criterion_09_adjusted_sigmoid():
    wins = 0
    pairs = []
    for seed in range(5):
        r = run_benchmark(STRONG, ["sigmoid-ppi", "sigmoid-ppi-adjusted"], [500], 500, 350, seed,
                          EstimatorConfig(adjusted=False))  # fmt: skip
        adj, raw = r.get("sigmoid-ppi-adjusted", 500).mae, r.get("sigmoid-ppi", 500).mae
        wins += adj <= raw
        pairs.append(f"{adj:.4f}/{raw:.4f}")
    verdict(9, wins >= 4, f"adjusted MAE <= unadjusted at n=N=500 in {wins}/5 seeds (adjusted/unadjusted: {', '.join(pairs)})")


def test_criterion_10_sigmoid_gradient():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 100))
        f = rng.random(n)
        h = (rng.random(n) < f).astype(float)
        p = rng.uniform(-5, 5, size=2)
        reg = float(10 ** rng.uniform(-5, 1))
        _, g = sigmoid_objective(p, f, h, reg)
        fd = np.array(
            [
                (sigmoid_objective(p + e, f, h, reg)[0] - sigmoid_objective(p - e, f, h, reg)[0]) / 2e-6
                for e in (np.array([1e-6, 0]), np.array([0, 1e-6]))
            ]
        )
        worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(g)))
    dt = time.perf_counter() - t0
    verdict(10, worst < 1e-5 and dt < 5, f"max relative gradient error {worst:.1e} (< 1e-5), {dt:.2f}s (< 5s)")


def test_criterion_11_determinism(tmp_path):
    outputs = {}
    for name, threads in (("a", 1), ("b", 1), ("c", 8)):
        out = tmp_path / f"{name}.csv"
        code = main(
            ["benchmark", "--spec", "0.45,0.05,0.05,0.45", "--n-grid", "5,10,20", "--big-n", "1000",
             "--trials", "40", "--seed", "11", "--threads", str(threads), "--output", str(out)]
        )  # fmt: skip
        assert code == 0
        outputs[name] = out.read_bytes()
    same_seed = outputs["a"] == outputs["b"]
    threads = outputs["a"] == outputs["c"]
    verdict(11, same_seed and threads, f"same seed byte-identical: {same_seed}; --threads 1 vs 8 identical: {threads}")


if __name__ == "__main__":
    import tempfile

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
