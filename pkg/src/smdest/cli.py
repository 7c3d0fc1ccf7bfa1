"""Batch command line: rate tables, simulations, data fitting, case studies.

Commands
--------
rates      write the reference convergence-rate table as CSV
simulate   run Monte Carlo cells from a config file (or ad-hoc flags)
fit        estimate the maximum distribution for a data file
case       preset fits for the shipped case-study formats

Exit codes: 0 success, 1 partial (warnings emitted), 2 usage or config error.
The environment variable ``SMD_SEED`` provides the seed when ``--seed`` is
not given.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import simulate as sim
from . import theory
from .estimators import GevMaxEstimator, KernelMaxEstimator

__all__ = ["main", "ingest_csv", "emit_series", "DataSeries"]


@dataclass(frozen=True)
class DataSeries:
    values: np.ndarray
    label: str
    source: str


def _fail(message: str) -> "NoReturn":  # noqa: F821
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(2)


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def ingest_csv(path, column=None) -> DataSeries:
    """Parse one numeric column from a CSV file.

    ``column`` selects by zero-based index or by header name; with a single
    column it may be omitted.  A header row is detected automatically.  Rows
    that do not parse as finite numbers abort with their row number.
    """
    if not os.path.exists(path):
        _fail(f"input file not found: {path}")
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(f.strip() for f in row)]
    if not rows:
        _fail(f"{path}: file contains no data rows")

    width = max(len(r) for r in rows)
    index: int
    label = ""
    header_names = [f.strip() for f in rows[0]]
    if column is None:
        if width != 1:
            _fail(f"{path}: {width} columns present; select one with --column")
        index = 0
    elif isinstance(column, int) or (isinstance(column, str) and column.lstrip("-").isdigit()):
        index = int(column)
        if not 0 <= index < width:
            _fail(f"{path}: column index {index} out of range (0..{width - 1})")
    else:
        if column not in header_names:
            _fail(f"{path}: no column named {column!r}; header is {header_names}")
        index = header_names.index(column)

    start = 0
    if not _is_number(rows[0][index] if index < len(rows[0]) else ""):
        label = header_names[index] if index < len(header_names) else ""
        start = 1
        if len(rows) == 1:
            _fail(f"{path}: header only, no data rows")

    values = []
    for rowno, row in enumerate(rows[start:], start=start + 1):
        field = row[index].strip() if index < len(row) else ""
        try:
            v = float(field)
        except ValueError:
            _fail(f"{path}: row {rowno}: {field!r} is not numeric")
        if not math.isfinite(v):
            _fail(f"{path}: row {rowno}: non-finite value {field!r}")
        values.append(v)
    if not values:
        _fail(f"{path}: selected column is empty")
    arr = np.asarray(values, dtype=float)
    print(
        f"loaded {arr.size} values from {path}"
        f" (min={arr.min():g}, max={arr.max():g})",
        file=sys.stderr,
    )
    return DataSeries(values=arr, label=label or f"col{index}", source=str(path))


def emit_series(path, series: DataSeries) -> None:
    """Write a series back out as a one-column CSV with its label as header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([series.label])
        for v in series.values:
            writer.writerow([repr(float(v))])


# --------------------------------------------------------------------------
# rates


def cmd_rates(args) -> int:
    n = int(args.n)
    try:
        table = theory.rate_table(n)
    except ValueError as exc:
        _fail(str(exc))
    out = args.out or "rates.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "label", "p", "pe", "ne", "length"])
        for row in table:
            for cell in row.cells:
                writer.writerow(
                    [
                        row.group,
                        row.label,
                        str(cell.p),
                        theory.fraction_str(cell.pe),
                        theory.fraction_str(cell.ne),
                        f"{cell.length:.10g}",
                    ]
                )
    print(f"wrote {out}", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------
# simulate


def _resolve_seed(args) -> int | None:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("SMD_SEED")
    return int(env) if env else None


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    if args.config:
        if not os.path.exists(args.config):
            _fail(f"config file not found: {args.config}")
        try:
            configs = sim.load_config(args.config, seed_override=seed)
        except (ValueError, OSError) as exc:
            _fail(f"invalid config: {exc}")
    elif args.family:
        if not (args.shape and args.n and args.m):
            _fail("ad-hoc simulation needs --family, --shape, --n and --m")
        try:
            family = sim.family_from_spec(args.family, args.shape)
            bandwidth = args.bandwidth if args.bandwidth in (None, "plugin", "oracle") else float(args.bandwidth)
            configs = [
                sim.ExperimentConfig(
                    family=family,
                    n=int(args.n),
                    m=int(args.m),
                    reps=int(args.reps or 500),
                    estimators=sim._parse_estimators(args.estimators or "both"),
                    block="auto" if args.block in (None, "auto") else int(args.block),
                    bandwidth=bandwidth if bandwidth is not None else "plugin",
                    grid_points=int(args.grid or 201),
                    seed=seed or 0,
                )
            ]
        except ValueError as exc:
            _fail(str(exc))
    else:
        _fail("simulate needs --config FILE or ad-hoc --family/--shape/--n/--m flags")

    if args.full:
        import dataclasses

        configs = [dataclasses.replace(c, reps=10000) for c in configs]

    report = sim.run_table(configs, workers=int(args.workers))
    out = args.out or "simulation.csv"
    report.to_csv(out)
    text = report.to_text()
    with open(os.path.splitext(out)[0] + ".txt", "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    print(f"wrote {out}", file=sys.stderr)

    failures = sum(1 for row in report.rows if row.failed)
    if failures == len(report.rows):
        print("error: every cell failed", file=sys.stderr)
        return 1
    if failures:
        print(f"warning: {failures} of {len(report.rows)} cells failed", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------
# fit


def _fit_estimators(data: np.ndarray, args, methods):
    n = data.size
    warnings = []
    pe = ne = None
    if "pe" in methods:
        if n < 50:
            _fail(f"the parametric fit needs at least 50 observations, got {n}")
        block = "auto" if args.block in (None, "auto") else int(args.block)
        est = GevMaxEstimator(horizon=int(args.m), block_size=block).fit(data)
        if est.converged_:
            pe = est
        else:
            warnings.append("parametric fit did not converge; pe column omitted")
    if "ne" in methods:
        bandwidth = "plugin" if args.bandwidth in (None, "auto", "plugin") else float(args.bandwidth)
        kernel = getattr(args, "kernel", None) or "gaussian"
        ne = KernelMaxEstimator(horizon=int(args.m), kernel=kernel, bandwidth=bandwidth).fit(data)
    return pe, ne, warnings


def _curve_grid(data: np.ndarray, pe, ne, points: int) -> np.ndarray:
    lo = float(data.min())
    hi = float(data.max())
    for est in (pe, ne):
        if est is not None:
            try:
                hi = max(hi, est.quantile(0.999))
            except ValueError:
                pass
    return np.linspace(lo, hi, points)


def cmd_fit(args) -> int:
    series = ingest_csv(args.data, args.column)
    data = series.values
    methods = ("pe", "ne") if args.estimators in (None, "both") else tuple(args.estimators.split(","))
    bad = set(methods) - {"pe", "ne"}
    if bad:
        _fail(f"--estimators must be pe, ne or both, got {args.estimators!r}")
    m = int(args.m)
    if m < 1:
        _fail("--m must be >= 1")

    pe, ne, warnings = _fit_estimators(data, args, methods)
    grid = _curve_grid(data, pe, ne, int(args.grid or 201))

    out = args.out or os.path.splitext(args.data)[0] + ".smd"
    curve_path = out + ".curve.csv"
    with open(curve_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["x"] + (["smd_pe"] if pe else []) + (["smd_ne"] if ne else [])
        writer.writerow(header)
        pe_curve = pe.cdf(grid) if pe else None
        ne_curve = ne.cdf(grid) if ne else None
        for i, x in enumerate(grid):
            row = [f"{x:.10g}"]
            if pe_curve is not None:
                row.append(f"{pe_curve[i]:.10g}")
            if ne_curve is not None:
                row.append(f"{ne_curve[i]:.10g}")
            writer.writerow(row)

    summary = {
        "source": series.source,
        "column": series.label,
        "n": int(data.size),
        "horizon": m,
        "data_min": float(data.min()),
        "data_max": float(data.max()),
    }
    if pe:
        summary["pe"] = {
            "gamma": pe.shape_,
            "scale": pe.scale_,
            "loc": pe.loc_,
            "block_size": pe.block_size_,
            "n_blocks": pe.n_blocks_,
            "loglik": pe.result_.loglik,
            "converged": pe.converged_,
        }
    if ne:
        summary["ne"] = {"bandwidth": ne.bandwidth_, "kernel": ne.kernel_spec_.name}
    thresholds = [float(t) for t in (args.threshold or [])] or [float(data.max())]
    summary["exceedance"] = [
        {
            "threshold": t,
            **({"pe": float(pe.survival(t))} if pe else {}),
            **({"ne": float(ne.survival(t))} if ne else {}),
        }
        for t in thresholds
    ]
    json_path = out + ".json"
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"wrote {curve_path} and {json_path}", file=sys.stderr)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 1 if warnings else 0


# --------------------------------------------------------------------------
# case studies


_CASE_PRESETS = {
    # annual peak stream flow: one-century forecast window of annual maxima
    "potomac": {"m": 100, "estimators": "both"},
    # fire insurance losses: heavy-tailed, forecast over a year of claims
    "danish": {"m": 200, "estimators": "both"},
}


def cmd_case(args) -> int:
    preset = _CASE_PRESETS[args.study]
    if not args.input:
        _fail(f"case {args.study} needs --input FILE (the repository ships format "
              f"fixtures under data/fixtures/, see README for the public sources)")
    args.data = args.input
    if args.m is None:
        args.m = preset["m"]
    if args.estimators is None:
        args.estimators = preset["estimators"]
    if args.out is None:
        args.out = f"{args.study}.smd"
    return cmd_fit(args)


# --------------------------------------------------------------------------
# parser


def _add_common_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", help="forecast horizon m")
    p.add_argument("--estimators", help="pe, ne or both (default both)")
    p.add_argument("--block", help="block size k for the parametric fit, or auto")
    p.add_argument("--bandwidth", help="kernel bandwidth, or auto/plugin")
    p.add_argument("--grid", help="number of grid points (default 201)")
    p.add_argument("--column", help="column name or index in the input CSV")
    p.add_argument("--out", help="output path prefix")
    p.add_argument("--threshold", action="append",
                   help="report exceedance probability at this level (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smdest",
        description="Estimate the distribution of the sample maximum over a future horizon.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rates = sub.add_parser("rates", help="write the reference convergence-rate table")
    p_rates.add_argument("--n", default=4096, help="reference sample size (power of two)")
    p_rates.add_argument("--out", help="output CSV path (default rates.csv)")
    p_rates.set_defaults(func=cmd_rates)

    p_sim = sub.add_parser("simulate", help="run Monte Carlo experiment cells")
    p_sim.add_argument("--config", help="experiment config file")
    p_sim.add_argument("--seed", help="master seed (fallback: SMD_SEED)")
    p_sim.add_argument("--workers", default=1, help="number of worker processes")
    p_sim.add_argument("--out", help="output CSV path (default simulation.csv)")
    p_sim.add_argument("--family", help=f"ad-hoc cell family: one of {', '.join(sim.FAMILY_NAMES)}")
    p_sim.add_argument("--shape", help="family shape parameter(s), comma separated")
    p_sim.add_argument("--n", help="sample size for an ad-hoc cell")
    p_sim.add_argument("--m", help="horizon for an ad-hoc cell")
    p_sim.add_argument("--reps", help="replications (default 500)")
    p_sim.add_argument("--estimators", help="pe, ne or both")
    p_sim.add_argument("--block", help="block size or auto")
    p_sim.add_argument("--bandwidth", help="plugin, oracle or a number")
    p_sim.add_argument("--grid", help="grid points (default 201)")
    p_sim.add_argument("--full", action="store_true",
                       help="run every cell at the full 10000 replications")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit both estimators to a data file")
    p_fit.add_argument("data", help="input CSV file")
    _add_common_fit_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)
    p_fit.set_defaults(m="1")

    p_case = sub.add_parser("case", help="run a preset case-study fit")
    p_case.add_argument("study", choices=sorted(_CASE_PRESETS))
    p_case.add_argument("--input", help="path to the user-supplied data file")
    _add_common_fit_flags(p_case)
    p_case.set_defaults(func=cmd_case, m=None)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
