"""Normalised MAE of every estimator against classical on a synthetic world.

    python3 scripts/few_label_benchmark.py --seeds 0 1 2 --output results/few_label.csv
"""

import argparse
import math
from dataclasses import dataclass, field

from ppi_fewlabel.datio import write_report
from ppi_fewlabel.simulate import BenchmarkReport, JointBernoulliSpec, default_threads, run_benchmark


@dataclass
class BenchmarkConfig:
    probs: tuple = (0.45, 0.05, 0.05, 0.45)
    methods: tuple = ("classical", "ppi++", "ridge-ppi", "sigmoid-ppi")
    n_grid: tuple = (5, 10, 20, 50, 100)
    N: int = 1000
    trials: int = 350
    seeds: list = field(default_factory=lambda: [0])
    threads: int = 1


def run(cfg: BenchmarkConfig) -> BenchmarkReport:
    spec = JointBernoulliSpec(*cfg.probs)
    rows = []
    for seed in cfg.seeds:
        rows.extend(run_benchmark(spec, cfg.methods, cfg.n_grid, cfg.N, cfg.trials, seed, threads=cfg.threads).rows)
    return BenchmarkReport(tuple(rows), spec.mu_h)


def show(report: BenchmarkReport, cfg: BenchmarkConfig) -> None:
    print(f"{'method':<22}" + "".join(f"{'n=' + str(n):>10}" for n in cfg.n_grid))
    for m in cfg.methods:
        cells = []
        for n in cfg.n_grid:
            vals = [r.normalized_mae for r in report.rows if r.method == m and r.n == n]
            cells.append(f"{math.fsum(vals) / len(vals):>10.3f}")
        print(f"{m:<22}" + "".join(cells))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--probs", type=float, nargs=4, default=BenchmarkConfig.probs, metavar=("P11", "P10", "P01", "P00"))
    ap.add_argument("--n-grid", type=int, nargs="+", default=list(BenchmarkConfig.n_grid))
    ap.add_argument("--big-n", type=int, default=1000)
    ap.add_argument("--trials", type=int, default=350)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--threads", type=int, default=default_threads())
    ap.add_argument("--output", help="CSV file for the per-seed rows")
    args = ap.parse_args()
    cfg = BenchmarkConfig(tuple(args.probs), BenchmarkConfig.methods, tuple(args.n_grid), args.big_n,
                          args.trials, args.seeds, args.threads)  # fmt: skip
    report = run(cfg)
    show(report, cfg)
    if args.output:
        write_report(report, args.output)


if __name__ == "__main__":
    main()
