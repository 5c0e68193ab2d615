"""PPI++ and Ridge-PPI on two worlds matched in Corr and E[h] whose Var[f]
differs by a factor of two.

PPI++ should do better where Var[f] is larger, and Ridge-PPI should do at
least as well as PPI++ where it is smaller.
"""

import argparse
import math
from dataclasses import dataclass

from ppi_fewlabel.simulate import JointBernoulliSpec, run_benchmark


@dataclass
class RegimeConfig:
    mu_h: float = 0.3
    corr: float = 0.5
    mu_f_high: float = 0.5  # Var[f] = 0.25
    n: int = 10
    N: int = 1000
    trials: int = 350
    seeds: int = 5

    @property
    def mu_f_low(self) -> float:
        # p(1 - p) = var_high / 2
        var_low = self.mu_f_high * (1 - self.mu_f_high) / 2
        return (1 - math.sqrt(1 - 4 * var_low)) / 2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=350)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--n", type=int, default=10)
    args = ap.parse_args()
    cfg = RegimeConfig(n=args.n, trials=args.trials, seeds=args.seeds)
    high = JointBernoulliSpec.from_moments(cfg.mu_h, cfg.mu_f_high, cfg.corr)
    low = JointBernoulliSpec.from_moments(cfg.mu_h, cfg.mu_f_low, cfg.corr)
    print(f"high: Var[f]={high.var_f:.4f} corr={high.corr:.3f}   low: Var[f]={low.var_f:.4f} corr={low.corr:.3f}")
    print("seed  ppi++(high)  ppi++(low)  ridge(low)")
    methods = ["classical", "ppi++", "ridge-ppi"]
    for seed in range(cfg.seeds):
        hi = run_benchmark(high, methods, [cfg.n], cfg.N, cfg.trials, seed)
        lo = run_benchmark(low, methods, [cfg.n], cfg.N, cfg.trials, seed)
        print(
            f"{seed:>4}  {hi.get('ppi++', cfg.n).normalized_mae:>11.3f}  "
            f"{lo.get('ppi++', cfg.n).normalized_mae:>10.3f}  {lo.get('ridge-ppi', cfg.n).normalized_mae:>10.3f}"
        )


if __name__ == "__main__":
    main()
