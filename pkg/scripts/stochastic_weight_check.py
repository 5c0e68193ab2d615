"""Compare the two noise brackets of the random-weight excess variance
against simulation, for an injected weight and for cross-fit PPI++.

The injected weight is drawn from Normal(mean, sd) independently of the
data; sample means are drawn exactly from multinomial and binomial counts.
"""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from ppi_fewlabel.analytics import RegimePoint, excess_var_stochastic_lambda
from ppi_fewlabel.estimators import EstimatorConfig
from ppi_fewlabel.simulate import JointBernoulliSpec, monte_carlo_moments


@dataclass
class CheckConfig:
    probs: tuple = (0.45, 0.05, 0.05, 0.45)
    lam_mean: float = 0.5
    lam_var: float = 0.1
    n: int = 10
    N: int = 1000
    injected_trials: int = 2_000_000
    cross_fit_n: int = 50
    cross_fit_trials: int = 200_000
    seed: int = 0


def injected(cfg: CheckConfig, spec: JointBernoulliSpec) -> None:
    rng = np.random.default_rng(cfg.seed)
    t = cfg.injected_trials
    counts = rng.multinomial(cfg.n, spec.probs, size=t)
    mean_h = (counts[:, 0] + counts[:, 1]) / cfg.n
    mean_f = (counts[:, 0] + counts[:, 2]) / cfg.n
    mean_fu = rng.binomial(cfg.N, spec.mu_f, size=t) / cfg.N
    lam = rng.normal(cfg.lam_mean, math.sqrt(cfg.lam_var), size=t)
    emp = (mean_h + lam * (mean_fu - mean_f)).var(ddof=1) - spec.var_h / cfg.n
    p = RegimePoint(cfg.n, cfg.N, spec.stats(), cfg.lam_mean, cfg.lam_var)
    report("injected weight", emp, p)


def cross_fit(cfg: CheckConfig, spec: JointBernoulliSpec) -> None:
    mc = monte_carlo_moments("ppi++", spec, cfg.cross_fit_n, cfg.N, cfg.cross_fit_trials, cfg.seed,
                             EstimatorConfig(cross_fit=True))  # fmt: skip
    n_est = mc.n_effective
    emp = mc.variance - spec.var_h / n_est
    report(f"cross-fit PPI++ (estimate uses {n_est} rows)", emp, RegimePoint(n_est, cfg.N, spec.stats(), mc.lambda_mean, mc.lambda_var))


def report(label: str, emp: float, p: RegimePoint) -> None:
    default = excess_var_stochastic_lambda(p)
    corrected = excess_var_stochastic_lambda(p, corrected=True)
    print(label)
    print(f"  E[lam]={p.e_lambda:.5f} Var[lam]={p.var_lambda:.5f}")
    print(f"  simulated excess    {emp:+.6f}")
    print(f"  default bracket     {default:+.6f}  ({abs(emp - default) / abs(default):.1%} off)")
    print(f"  corrected bracket   {corrected:+.6f}  ({abs(emp - corrected) / abs(corrected):.1%} off)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quick", action="store_true", help="10x fewer trials")
    args = ap.parse_args()
    cfg = CheckConfig(seed=args.seed)
    if args.quick:
        cfg.injected_trials //= 10
        cfg.cross_fit_trials //= 10
    spec = JointBernoulliSpec(*cfg.probs)
    injected(cfg, spec)
    cross_fit(cfg, spec)


if __name__ == "__main__":
    main()
