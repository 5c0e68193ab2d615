"""Predicted Var[PPI++] / Var[classical] over a (Var[f], n) grid.

Writes the grid as CSV (rows Var[f], columns n) for external plotting and
prints it as a table.
"""

import argparse
from dataclasses import dataclass

import numpy as np

from ppi_fewlabel.analytics import heatmap_sweep
from ppi_fewlabel.datio import write_report
from ppi_fewlabel.samplestats import DistributionStats


@dataclass
class HeatmapConfig:
    mean_f: float = 0.3
    var_h: float = 0.21
    corr: float = 0.6
    N: int = 1000
    var_cov_scale: float = 0.3
    corrected: bool = False


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mean-f", type=float, default=HeatmapConfig.mean_f)
    ap.add_argument("--var-h", type=float, default=HeatmapConfig.var_h)
    ap.add_argument("--corr", type=float, default=HeatmapConfig.corr)
    ap.add_argument("--corrected", action="store_true")
    ap.add_argument("--output")
    args = ap.parse_args()
    cfg = HeatmapConfig(args.mean_f, args.var_h, args.corr, corrected=args.corrected)
    base = DistributionStats.from_corr(cfg.mean_f, 1.0, cfg.var_h, cfg.corr)
    var_f_grid = np.round(np.linspace(0.02, 0.25, 12), 4)
    n_grid = [5, 10, 20, 50, 100, 200]
    sweep = heatmap_sweep(base, var_f_grid, n_grid, cfg.N, cfg.var_cov_scale, cfg.corrected)
    print("Var[f] \\ n " + "".join(f"{n:>8}" for n in n_grid))
    for vf, row in zip(sweep.var_f_grid, sweep.values):
        print(f"{vf:>10.3f} " + "".join(f"{v:>8.3f}" for v in row))
    if args.output:
        write_report(sweep, args.output)


if __name__ == "__main__":
    main()
