"""Command-line front end: ``ppi-fewlabel estimate|benchmark|predict-variance|sweep``.

Exit status is 0 on success, 2 for bad input or data, 1 for anything else.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import Optional, Sequence

from . import analytics, datio
from .errors import PPIError
from .estimators import METHODS, EstimatorConfig, run_method
from .regress import DEGENERATE, RIDGE_GRID
from .samplestats import DistributionStats, compute_stats
from .simulate import JointBernoulliSpec, default_threads, run_benchmark

log = logging.getLogger("ppi_fewlabel")

EXIT_OK, EXIT_INTERNAL, EXIT_USER = 0, 1, 2


class UserError(Exception):
    pass


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _big_n(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return int(text)


def _methods(values: Optional[list], default: Sequence[str]) -> list:
    if not values:
        return list(default)
    out = []
    for v in values:
        for m in v.split(","):
            m = m.strip()
            if m not in METHODS:
                raise UserError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
            out.append(m)
    return out


def _config(args) -> EstimatorConfig:
    return EstimatorConfig(
        lam=args.lam,
        cross_fit=args.cross_fit,
        ridge_grid=args.ridge_grid,
        sigmoid_grid=args.sigmoid_reg_grid,
        adjusted=args.adjusted,
    )


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        try:
            with open(output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise UserError(f"cannot write {output}: {exc}") from exc
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_estimate(args) -> int:
    labelled, unlabelled = datio.load_dataset(args.input)
    if labelled.n < 1:
        raise UserError(f"{args.input}: no labelled rows")
    methods = _methods(args.method, ["classical", "ppi++", "ridge-ppi", "sigmoid-ppi"])
    if any(m != "classical" for m in methods) and unlabelled.N < 1:
        raise UserError(f"{args.input}: PPI methods need at least one unlabelled row")
    config = _config(args)
    estimates = []
    for m in methods:
        est = run_method(m, labelled, unlabelled, args.seed, config)
        for flag in est.flags:
            if flag == DEGENERATE:
                log.warning("%s: Var[f] is zero; weight set to 0 (classical estimate)", m)
            else:
                log.warning("%s: %s", m, flag)
        estimates.append(est)
    _emit(datio.dumps(estimates, args.format), args.output)
    return EXIT_OK


def _spec(text: str) -> JointBernoulliSpec:
    probs = _floats(text)
    if len(probs) != 4:
        raise UserError("--spec needs four probabilities p11,p10,p01,p00")
    return JointBernoulliSpec(*probs)


def cmd_benchmark(args) -> int:
    if (args.input is None) == (args.spec is None):
        raise UserError("benchmark needs exactly one of --input (pool mode) or --spec (synthetic mode)")
    if args.input is not None:
        source, _ = datio.load_dataset(args.input)
    else:
        source = _spec(args.spec)
    methods = _methods(args.method, ["classical", "ppi++", "ridge-ppi", "sigmoid-ppi"])
    report = run_benchmark(
        source,
        methods,
        args.n_grid,
        N=args.big_n,
        trials=args.trials,
        rng_seed=args.seed,
        config=_config(args),
        threads=args.threads,
    )
    _emit(datio.dumps(report, args.format), args.output)
    return EXIT_OK


def _stats_from_args(args, need_cov: bool = True) -> DistributionStats:
    if args.input is not None:
        labelled, _ = datio.load_dataset(args.input)
        return compute_stats(labelled, args.var_cov_hat)
    missing = [k for k in ("mean_f", "var_f", "var_h") if getattr(args, k) is None]
    if need_cov and args.cov is None and args.corr is None:
        missing.append("cov or corr")
    if missing:
        raise UserError("give --input or all of --mean-f --var-f --var-h --cov/--corr; missing: " + ", ".join(missing))
    vch = args.var_cov_hat or 0.0
    if args.cov is not None:
        return DistributionStats.from_cov(args.mean_f, args.var_f, args.var_h, args.cov, vch)
    return DistributionStats.from_corr(args.mean_f, args.var_f, args.var_h, args.corr or 0.0, vch)


PREDICTION_COLUMNS = (
    "n", "N", "ridge_alpha", "ppi_excess_variance", "ridge_excess_variance",
    "ridge_minus_ppi", "optimal_ridge_alpha",
)  # fmt: skip


def cmd_predict_variance(args) -> int:
    stats = _stats_from_args(args)
    if stats.var_f == 0:
        raise UserError("Var[f] is zero; the variance formulas are singular")
    grid = args.ridge_grid if args.ridge_grid is not None else RIDGE_GRID
    rows = []
    for n in args.n_grid:
        ppi = analytics.ppi_excess_variance(stats, n, args.big_n, args.corrected)
        a_star = analytics.optimal_ridge_alpha(stats, n, args.big_n, args.corrected)
        for alpha in grid:
            rows.append(
                {
                    "n": n,
                    "N": args.big_n,
                    "ridge_alpha": alpha,
                    "ppi_excess_variance": ppi,
                    "ridge_excess_variance": analytics.ridge_excess_variance(
                        stats, alpha, n, args.big_n, args.corrected
                    ),
                    "ridge_minus_ppi": analytics.ridge_minus_ppi(stats, alpha, n, args.big_n, args.corrected),
                    "optimal_ridge_alpha": a_star,
                }
            )
    _emit(datio.dumps_table(PREDICTION_COLUMNS, rows, args.format), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.input is not None:
        base = _stats_from_args(args)
    else:
        missing = [k for k in ("mean_f", "var_h", "corr") if getattr(args, k) is None]
        if missing:
            raise UserError("sweep needs --input or --mean-f --var-h --corr; missing: " + ", ".join(missing))
        base = DistributionStats.from_corr(args.mean_f, 1.0, args.var_h, args.corr)
    sweep = analytics.heatmap_sweep(
        base, args.var_f_grid, args.n_grid, args.big_n, args.var_cov_scale, args.corrected
    )
    _emit(datio.dumps(sweep, args.format), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ppi-fewlabel", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common_out(sp):
        sp.add_argument("--output", help="write here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    def estimator_opts(sp):
        sp.add_argument("--method", action="append", help=f"repeatable; one of {', '.join(METHODS)}")
        sp.add_argument("--seed", type=int, required=True)
        sp.add_argument("--lam", type=float, default=1.0, help="weight for ppi-fixed")
        sp.add_argument("--cross-fit", action="store_true", help="fit the PPI++ weight on a held-out half")
        sp.add_argument("--ridge-grid", type=_floats)
        sp.add_argument("--sigmoid-reg-grid", type=_floats)
        adj = sp.add_mutually_exclusive_group()
        adj.add_argument("--adjusted", dest="adjusted", action="store_true", default=None)
        adj.add_argument("--no-adjusted", dest="adjusted", action="store_false")

    def stats_opts(sp):
        sp.add_argument("--input", help="dataset file; labelled rows supply the moments")
        sp.add_argument("--mean-f", type=float)
        sp.add_argument("--var-f", type=float)
        sp.add_argument("--var-h", type=float)
        sp.add_argument("--cov", type=float)
        sp.add_argument("--corr", type=float)
        sp.add_argument("--var-cov-hat", type=float)
        sp.add_argument("--big-n", type=_big_n, default=1000)
        sp.add_argument("--corrected", action="store_true", help="drop the 2E[f]^2 term from the noise bracket")

    sp = sub.add_parser("estimate", help="point estimates on a dataset file")
    sp.add_argument("--input", required=True)
    estimator_opts(sp)
    common_out(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("benchmark", help="resampling benchmark")
    sp.add_argument("--input", help="dataset file used as the sampling pool (labelled rows)")
    sp.add_argument("--spec", help="synthetic joint Bernoulli p11,p10,p01,p00 for (h, f)")
    sp.add_argument("--n-grid", type=_ints, default=(5, 10, 20, 50))
    sp.add_argument("--big-n", type=int, default=1000)
    sp.add_argument("--trials", type=int, default=350)
    sp.add_argument("--threads", type=int, default=default_threads())
    estimator_opts(sp)
    common_out(sp)
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("predict-variance", help="analytic excess variance of PPI++ and Ridge-PPI")
    stats_opts(sp)
    sp.add_argument("--n-grid", type=_ints, default=(10,))
    sp.add_argument("--ridge-grid", type=_floats)
    common_out(sp)
    sp.set_defaults(func=cmd_predict_variance)

    sp = sub.add_parser("sweep", help="normalised PPI++ variance over Var[f] x n")
    stats_opts(sp)
    sp.add_argument("--var-f-grid", type=_floats, required=True)
    sp.add_argument("--n-grid", type=_ints, required=True)
    sp.add_argument("--var-cov-scale", type=float, default=0.3)
    common_out(sp)
    sp.set_defaults(func=cmd_sweep)
    return p


def _configure_logging(verbose: bool) -> None:
    # own handler rather than basicConfig, which is a no-op when the host
    # process has already configured the root logger
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USER
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (UserError, PPIError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
