"""Dataset loading and report (de)serialisation.

Dataset files are comma-separated with a header. Column ``f`` (pseudolabel
score) is required, ``h`` (gold label) and ``id`` are optional. Rows with an
empty ``h`` cell form the unlabelled pool; everything else is labelled.

Reports are written either as CSV or JSON. Numbers are written with 17
significant digits so that reading a report back gives the same floats.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .analytics import Sweep
from .errors import FormatError, IoError
from .estimators import Estimate
from .regress import PostHocFit
from .samplestats import LabelledSample, UnlabelledSample
from .simulate import BenchmarkReport, BenchmarkRow

log = logging.getLogger(__name__)

BENCHMARK_COLUMNS = ("method", "n", "trials", "mae", "std_dev", "normalized_mae", "seed")
ESTIMATE_COLUMNS = (
    "method", "n", "N", "value", "flags",
    "fit_kind", "lambda", "ridge_alpha", "slope", "offset", "l2_reg", "adjusted",
    "intercept", "fit_n", "fit_N", "var_f", "cov_fh", "iterations", "fit_flags",
)  # fmt: skip
_SWEEP_CORNER = re.compile(r"^var_f / n \(N=(.+)\)$")

Report = Union[BenchmarkReport, list, Sweep]


# ---------------------------------------------------------------------------
# datasets


def _parse_real(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise FormatError(f"row {row}, column {column!r}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(value):
        raise FormatError(f"row {row}, column {column!r}: non-finite value {cell!r}")
    return value


def load_dataset(path) -> tuple[LabelledSample, UnlabelledSample]:
    """Read a dataset file and split it into labelled and unlabelled pools.

    Row numbers in error messages count the header as row 1.
    """
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise FormatError(f"{path}: empty file")
            header = [c.strip() for c in header]
            if "f" not in header:
                raise FormatError(f"{path}: row 1: required column 'f' missing (found {header})")
            fi = header.index("f")
            hi = header.index("h") if "h" in header else None
            lab_f, lab_h, unl_f = [], [], []
            for row_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise FormatError(f"row {row_no}: expected {len(header)} cells, found {len(row)}")
                f = _parse_real(row[fi].strip(), row_no, "f")
                h_cell = row[hi].strip() if hi is not None else ""
                if h_cell == "":
                    unl_f.append(f)
                else:
                    lab_f.append(f)
                    lab_h.append(_parse_real(h_cell, row_no, "h"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    log.info("loaded %s: %d labelled rows, %d unlabelled rows", path, len(lab_f), len(unl_f))
    return LabelledSample(lab_f, lab_h), UnlabelledSample(unl_f)


# ---------------------------------------------------------------------------
# number formatting


def fmt_num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def _num(cell: str):
    if cell == "":
        return None
    v = float(cell)
    if math.isfinite(v) and v.is_integer() and re.fullmatch(r"-?\d+", cell):
        return int(cell)
    return v


def _flt(cell: str) -> float:
    return math.nan if cell == "" else float(cell)


def _json_num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _from_json_num(x):
    if x is None:
        return math.nan
    return float(x)


# ---------------------------------------------------------------------------
# serialisation


def _fit_cells(fit: PostHocFit):
    if fit is None:
        return [""] * 14
    return [
        fit.kind, fmt_num(fit.lam), fmt_num(fit.ridge_alpha), fmt_num(fit.slope),
        fmt_num(fit.offset), fmt_num(fit.l2_reg), fmt_num(fit.adjusted), fmt_num(fit.intercept),
        fmt_num(fit.n), fmt_num(fit.N), fmt_num(fit.var_f), fmt_num(fit.cov_fh),
        fmt_num(fit.iterations), ";".join(fit.flags),
    ]  # fmt: skip


def _fit_dict(fit: PostHocFit):
    if fit is None:
        return None
    d = {k: getattr(fit, k) for k in PostHocFit.__dataclass_fields__}
    d["N"] = _json_num(fit.N)
    d["flags"] = list(fit.flags)
    return d


def to_rows(report: Report) -> tuple[list[str], list[list[str]]]:
    """Header and data rows for the CSV layout of ``report``."""
    if isinstance(report, BenchmarkReport):
        rows = [
            [r.method, fmt_num(r.n), fmt_num(r.trials), fmt_num(r.mae), fmt_num(r.std_dev),
             fmt_num(r.normalized_mae), fmt_num(r.seed)]
            for r in report.rows
        ]  # fmt: skip
        return list(BENCHMARK_COLUMNS), rows
    if isinstance(report, Sweep):
        header = [f"var_f / n (N={fmt_num(report.N)})"] + [fmt_num(n) for n in report.n_grid]
        rows = [
            [fmt_num(vf)] + [fmt_num(v) for v in report.values[i]] for i, vf in enumerate(report.var_f_grid)
        ]
        return header, rows
    rows = []
    for est in report:
        rows.append(
            [est.method, fmt_num(est.n), fmt_num(est.N), fmt_num(est.value), ";".join(est.flags)]
            + _fit_cells(est.fit)
        )
    return list(ESTIMATE_COLUMNS), rows


def to_jsonable(report: Report) -> dict:
    if isinstance(report, BenchmarkReport):
        return {
            "type": "benchmark",
            "truth": _json_num(report.truth),
            "rows": [
                {
                    "method": r.method,
                    "n": r.n,
                    "trials": r.trials,
                    "mae": _json_num(r.mae),
                    "std_dev": _json_num(r.std_dev),
                    "normalized_mae": _json_num(r.normalized_mae),
                    "seed": r.seed,
                }
                for r in report.rows
            ],
        }
    if isinstance(report, Sweep):
        return {
            "type": "sweep",
            "N": _json_num(report.N),
            "var_f_grid": list(report.var_f_grid),
            "n_grid": list(report.n_grid),
            "values": [[_json_num(v) for v in row] for row in report.values],
        }
    return {
        "type": "estimates",
        "estimates": [
            {
                "method": e.method,
                "n": e.n,
                "N": e.N,
                "value": e.value,
                "flags": list(e.flags),
                "fit": _fit_dict(e.fit),
            }
            for e in report
        ],
    }


def dumps(report: Report, fmt: str = "csv") -> str:
    if fmt == "csv":
        header, rows = to_rows(report)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")


def write_report(report: Report, path, fmt: str = "csv") -> None:
    text = dumps(report, fmt)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# parsing


def _fit_from_cells(c: dict):
    if c["fit_kind"] == "":
        return None
    return PostHocFit(
        kind=c["fit_kind"],
        n=int(c["fit_n"]),
        N=_num(c["fit_N"]),
        var_f=float(c["var_f"]),
        cov_fh=float(c["cov_fh"]),
        lam=float(c["lambda"]),
        slope=float(c["slope"]),
        offset=float(c["offset"]),
        adjusted=c["adjusted"] == "true",
        ridge_alpha=float(c["ridge_alpha"]),
        l2_reg=float(c["l2_reg"]),
        intercept=float(c["intercept"]),
        iterations=int(c["iterations"]),
        flags=tuple(x for x in c["fit_flags"].split(";") if x),
    )


def _fit_from_dict(d):
    if d is None:
        return None
    d = dict(d)
    d["N"] = _from_json_num(d["N"])
    if float(d["N"]).is_integer():
        d["N"] = int(d["N"])
    d["flags"] = tuple(d["flags"])
    return PostHocFit(**d)


def loads(text: str, fmt: str = "csv") -> Report:
    if fmt == "json":
        data = json.loads(text)
        kind = data.get("type")
        if kind == "benchmark":
            rows = tuple(
                BenchmarkRow(
                    r["method"], r["n"], r["trials"], _from_json_num(r["mae"]),
                    _from_json_num(r["std_dev"]), _from_json_num(r["normalized_mae"]), r["seed"],
                )
                for r in data["rows"]
            )  # fmt: skip
            truth = data.get("truth")
            return BenchmarkReport(rows, None if truth is None else float(truth))
        if kind == "sweep":
            values = np.array([[_from_json_num(v) for v in row] for row in data["values"]], dtype=np.float64)
            values = values.reshape(len(data["var_f_grid"]), len(data["n_grid"]))
            return Sweep(tuple(data["var_f_grid"]), tuple(data["n_grid"]), _from_json_num(data["N"]), values)
        if kind == "estimates":
            return [
                Estimate(e["value"], e["method"], e["n"], e["N"], _fit_from_dict(e["fit"]), tuple(e["flags"]))
                for e in data["estimates"]
            ]
        raise FormatError(f"unknown report type {kind!r}")
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError("empty report")
    header, body = rows[0], rows[1:]
    if tuple(header) == BENCHMARK_COLUMNS:
        return BenchmarkReport(
            tuple(
                BenchmarkRow(r[0], int(r[1]), int(r[2]), _flt(r[3]), _flt(r[4]), _flt(r[5]), int(r[6]))
                for r in body
            )
        )
    if tuple(header) == ESTIMATE_COLUMNS:
        out = []
        for r in body:
            c = dict(zip(ESTIMATE_COLUMNS, r))
            out.append(
                Estimate(
                    float(c["value"]),
                    c["method"],
                    int(c["n"]),
                    int(c["N"]),
                    _fit_from_cells(c),
                    tuple(x for x in c["flags"].split(";") if x),
                )
            )
        return out
    m = _SWEEP_CORNER.match(header[0])
    if m:
        n_grid = tuple(_num(c) for c in header[1:])
        var_f = tuple(float(r[0]) for r in body)
        values = np.array([[_flt(c) for c in r[1:]] for r in body], dtype=np.float64)
        values = values.reshape(len(var_f), len(n_grid))
        return Sweep(var_f, n_grid, _num(m.group(1)), values)
    raise FormatError(f"unrecognised report header: {header}")


def read_report(path, fmt: str = "csv") -> Report:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return loads(text, fmt)


def dumps_table(columns: Sequence[str], rows: list[dict], fmt: str = "csv") -> str:
    """Generic table writer for ad-hoc outputs (e.g. variance predictions)."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([r[c] if isinstance(r[c], str) else fmt_num(r[c]) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        out = [{c: (r[c] if isinstance(r[c], str) else _json_num(r[c])) for c in columns} for r in rows]
        return json.dumps({"type": "table", "columns": list(columns), "rows": out}, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")
