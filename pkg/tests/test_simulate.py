import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppi_fewlabel.errors import InsufficientData, SpecError
from ppi_fewlabel.estimators import EstimatorConfig
from ppi_fewlabel.samplestats import LabelledSample, unbiased_covariance
from ppi_fewlabel.simulate import (
    JointBernoulliSpec,
    _draw_trial,
    monte_carlo_moments,
    run_benchmark,
    sample_joint,
    trial_stream,
)

STRONG = JointBernoulliSpec(0.45, 0.05, 0.05, 0.45)


@st.composite
def specs(draw):
    w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4)))
    return JointBernoulliSpec(*(w / w.sum()))


def test_spec_validation():
    with pytest.raises(SpecError):
        JointBernoulliSpec(0.5, 0.5, 0.1, -0.1)
    with pytest.raises(SpecError):
        JointBernoulliSpec(0.5, 0.5, 0.1, 0.0)
    with pytest.raises(SpecError):
        JointBernoulliSpec(math.nan, 0.5, 0.5, 0.0)
    assert STRONG.mu_h == 0.5 and STRONG.mu_f == 0.5
    assert STRONG.cov == pytest.approx(0.2)
    assert STRONG.corr == pytest.approx(0.8)
    assert JointBernoulliSpec(0.3, 0.1, 0.2, 0.4).pseudolabel_bias == pytest.approx(0.1)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(-0.3, 0.3))
def test_from_moments_round_trip(mu_h, mu_f, corr):
    try:
        spec = JointBernoulliSpec.from_moments(mu_h, mu_f, corr)
    except SpecError:
        return  # infeasible combination
    assert spec.mu_h == pytest.approx(mu_h, abs=1e-12)
    assert spec.mu_f == pytest.approx(mu_f, abs=1e-12)
    assert spec.corr == pytest.approx(corr, abs=1e-9)


def test_sample_joint_degenerate():
    lab = sample_joint(JointBernoulliSpec(1, 0, 0, 0), 50, 1)
    assert np.all(lab.f == 1) and np.all(lab.h == 1)
    with pytest.raises(ValueError):
        sample_joint(STRONG, 0, 1)


def test_sample_joint_cell_frequencies():
    spec = JointBernoulliSpec(0.1, 0.2, 0.3, 0.4)
    lab = sample_joint(spec, 1_000_000, 5)
    cells = np.stack([lab.h * lab.f, lab.h * (1 - lab.f), (1 - lab.h) * lab.f, (1 - lab.h) * (1 - lab.f)])
    freq = cells.mean(axis=1)
    se = np.sqrt(spec.probs * (1 - spec.probs) / 1_000_000)
    assert np.all(np.abs(freq - spec.probs) < 3 * se)


def test_sample_joint_independence_and_covariance():
    lab = sample_joint(JointBernoulliSpec(0.25, 0.25, 0.25, 0.25), 100_000, 2)
    r = np.corrcoef(lab.f, lab.h)[0, 1]
    assert abs(r) < 3 / math.sqrt(100_000)

    lab = sample_joint(STRONG, 100_000, 3)
    cov = unbiased_covariance(lab.f, lab.h)
    # exact sampling sd of the covariance estimator
    se = math.sqrt(STRONG.var_cov_hat(100_000))
    assert abs(cov - 0.2) < 3 * se


def test_sample_joint_deterministic():
    a = sample_joint(STRONG, 100, 9)
    b = sample_joint(STRONG, 100, 9)
    assert np.array_equal(a.f, b.f) and np.array_equal(a.h, b.h)


SPECS = [STRONG, JointBernoulliSpec(0.1, 0.2, 0.3, 0.4)]
HV = np.array([1, 1, 0, 0.0])
FV = np.array([1, 0, 1, 0.0])


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("spec", SPECS)
def test_var_cov_hat_by_enumeration(spec, n):
    mean = second = 0.0
    for cells in product(range(4), repeat=n):
        idx = list(cells)
        p = float(np.prod(spec.probs[idx]))
        c = unbiased_covariance(FV[idx], HV[idx])
        mean += p * c
        second += p * c * c
    assert mean == pytest.approx(spec.cov, abs=1e-14)
    assert second - mean**2 == pytest.approx(spec.var_cov_hat(n), rel=1e-10)


@pytest.mark.parametrize("n", [10, 50])
@pytest.mark.parametrize("spec", SPECS)
def test_var_cov_hat_by_simulation(spec, n):
    counts = np.random.default_rng(n).multinomial(n, spec.probs, size=400_000)
    # covariance from cell counts: (sum hf - sum h * sum f / n) / (n - 1)
    sh = counts[:, 0] + counts[:, 1]
    sf = counts[:, 0] + counts[:, 2]
    covs = (counts[:, 0] - sh * sf / n) / (n - 1)
    assert covs.var(ddof=1) == pytest.approx(spec.var_cov_hat(n), rel=0.02)
    with pytest.raises(InsufficientData):
        spec.var_cov_hat(1)


# -- benchmark ----------------------------------------------------------------


def test_classical_only_normalises_to_one():
    r = run_benchmark(STRONG, ["classical"], [2, 5, 10], 100, 50, 0)
    assert [row.normalized_mae for row in r.rows] == [1.0, 1.0, 1.0]
    assert r.truth == 0.5


def test_benchmark_determinism_and_threads():
    args = (STRONG, ["classical", "ppi++", "ridge-ppi"], [5, 10], 200, 60, 4)
    a = run_benchmark(*args)
    b = run_benchmark(*args)
    c = run_benchmark(*args, threads=3)
    assert a == b == c
    d = run_benchmark(STRONG, ["classical", "ppi++", "ridge-ppi"], [5, 10], 200, 60, 5)
    assert d != a and d.truth == a.truth


def test_benchmark_rows_and_classical_added():
    r = run_benchmark(STRONG, ["ppi++"], [10], 100, 20, 0)
    assert [row.method for row in r.rows] == ["ppi++"]
    row = r.get("ppi++", 10)
    assert row.trials == 20 and row.seed == 0 and row.mae >= 0 and row.std_dev >= 0
    with pytest.raises(KeyError):
        r.get("ppi++", 11)
    with pytest.raises(ValueError):
        run_benchmark(STRONG, [], [10], 100, 20, 0)


def test_pool_mode():
    rng = np.random.default_rng(0)
    pool = LabelledSample(np.arange(300.0), (rng.random(300) < 0.4).astype(float))
    with pytest.raises(InsufficientData):
        run_benchmark(pool, ["classical"], [10, 60], 250, 10, 0)
    for t in range(50):
        lab, unl = _draw_trial(pool, 20, 250, trial_stream(3, 20, t))
        # f holds row ids, so overlap would show up as shared values
        assert not set(lab.f) & set(unl.f)
        assert len(set(unl.f)) == 250
    r = run_benchmark(pool, ["classical", "ppi++"], [10], 250, 30, 1)
    assert r.truth == pool.h.mean()
    assert r == run_benchmark(pool, ["classical", "ppi++"], [10], 250, 30, 1)


@pytest.mark.slow
def test_useless_predictor_costs_a_little():
    spec = JointBernoulliSpec(0.09, 0.21, 0.21, 0.49)
    assert spec.cov == pytest.approx(0.0, abs=1e-15)
    r = run_benchmark(spec, ["classical", "ppi++"], [10], 1000, 2000, 0)
    assert 0.95 <= r.get("ppi++", 10).normalized_mae <= 1.25


# -- Monte Carlo moments --------------------------------------------------------


def test_mc_requires_trials():
    with pytest.raises(InsufficientData):
        monte_carlo_moments("classical", STRONG, 5, 10, 999, 0)


@pytest.mark.slow
def test_mc_zero_weight():
    mc = monte_carlo_moments("ppi-fixed", STRONG, 20, 1000, 100_000, 1, EstimatorConfig(lam=0.0))
    assert abs(mc.bias) < 3 * mc.bias_se
    assert mc.variance == pytest.approx(STRONG.var_h / 20, rel=0.05)
    assert mc.lambda_mean is None


@pytest.mark.slow
def test_mc_fixed_weight_variance():
    n, N = 20, 1000
    mc = monte_carlo_moments("ppi-fixed", STRONG, n, N, 100_000, 2, EstimatorConfig(lam=1.0))
    want = STRONG.var_h / n + STRONG.var_f * (1 / n + 1 / N) - 2 * STRONG.cov / n
    assert mc.variance == pytest.approx(want, rel=0.05)


@pytest.mark.slow
def test_mc_cross_fit_weight_mean():
    mc = monte_carlo_moments("ppi++", STRONG, 50, 1000, 20_000, 3, EstimatorConfig(cross_fit=True))
    assert mc.n_effective == 25
    want = STRONG.cov / STRONG.var_f / (1 + 25 / 1000)
    assert abs(mc.lambda_mean - want) < 3 * math.sqrt(mc.lambda_var / 20_000)


def test_mc_threads_agree():
    a = monte_carlo_moments("ppi++", STRONG, 10, 50, 3000, 7)
    b = monte_carlo_moments("ppi++", STRONG, 10, 50, 3000, 7, threads=2)
    assert np.array_equal(a.estimates, b.estimates)
