"""Monte Carlo harness for the integrated squared error of both estimators.

Each experiment cell draws ``reps`` independent samples, builds the parametric
(block-maxima GEV) and/or nonparametric (kernel plug-in) maximum-distribution
estimates, and integrates their squared error against the exact F^m over the
[0.1, 0.9] quantile range of the maximum, normalized by the range length.

Replicate r always consumes the r-th spawn of the cell's seed sequence and
results are aggregated in replicate order, so a run is bit-identical for a
fixed seed regardless of how many workers execute it.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import gev, kernels
from .distributions import (
    Burr,
    Frechet,
    GevFrechet,
    Pareto,
    ReversedBurr,
    SmdSpec,
    StudentT,
    TailFamily,
    WeibullClass,
)

__all__ = [
    "ExperimentConfig",
    "MiseReport",
    "TableReport",
    "mise",
    "run_cell",
    "run_table",
    "load_config",
    "family_from_spec",
    "FAMILY_NAMES",
]


# --------------------------------------------------------------------------
# family registry for configs and the command line

_FAMILY_BUILDERS = {
    "pareto": (1, lambda v: Pareto(shape=v[0])),
    "t": (1, lambda v: StudentT(df=v[0])),
    "student-t": (1, lambda v: StudentT(df=v[0])),
    "burr": (2, lambda v: Burr(c=v[0], ell=v[1])),
    "frechet": (1, lambda v: Frechet(gamma=v[0])),
    "gev-frechet": (1, lambda v: GevFrechet(gamma=v[0])),
    "weibull": (2, lambda v: WeibullClass(kappa=v[0], C=v[1] if len(v) > 1 else 1.0)),
    "reversed-burr": (2, lambda v: ReversedBurr(mu=v[0], sigma=v[1])),
    "revburr": (2, lambda v: ReversedBurr(mu=v[0], sigma=v[1])),
}

FAMILY_NAMES = tuple(sorted(_FAMILY_BUILDERS))


def _parse_number(token: str) -> float:
    token = token.strip()
    if "/" in token:
        return float(Fraction(token))
    return float(token)


def family_from_spec(name: str, shape) -> TailFamily:
    """Build a family from its config name and shape parameter(s).

    ``shape`` may be a number, a sequence of numbers, or a comma-separated
    string; fraction strings such as "1/2" are accepted.
    """
    key = name.strip().lower()
    if key not in _FAMILY_BUILDERS:
        raise ValueError(f"unknown family {name!r}; choose from {FAMILY_NAMES}")
    if isinstance(shape, str):
        values = [_parse_number(tok) for tok in shape.split(",") if tok.strip()]
    elif np.ndim(shape) == 0:
        values = [float(shape)]
    else:
        values = [float(v) for v in shape]
    n_req, builder = _FAMILY_BUILDERS[key]
    if len(values) < 1 or (n_req == 2 and key != "weibull" and len(values) != 2) or (
        n_req == 1 and len(values) != 1
    ):
        raise ValueError(f"family {name!r} expects {n_req} shape value(s), got {values}")
    return builder(values)


# --------------------------------------------------------------------------
# configuration


Seed = Union[int, tuple]


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo cell: a family, sample size, horizon and protocol."""

    family: TailFamily
    n: int
    m: int
    reps: int = 500
    estimators: tuple = ("pe", "ne")
    block: Union[str, int] = "auto"
    kernel: str = "auto"
    bandwidth: Union[str, float] = "plugin"
    grid_points: int = 201
    seed: Seed = 0

    def __post_init__(self):
        if self.n < 2 or self.m < 1:
            raise ValueError("need n >= 2 and m >= 1")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        bad = set(self.estimators) - {"pe", "ne"}
        if bad or not self.estimators:
            raise ValueError(f"estimators must be a nonempty subset of pe/ne, got {self.estimators}")
        if "pe" in self.estimators and self.n // self.resolved_block() < 3:
            raise ValueError(
                f"n={self.n} with block size {self.resolved_block()} leaves fewer than 3 blocks"
            )
        if self.kernel not in ("auto", "gaussian", "epanechnikov"):
            raise ValueError(f"unknown kernel rule {self.kernel!r}")
        if not (self.bandwidth in ("plugin", "oracle") or _is_positive_number(self.bandwidth)):
            raise ValueError(f"bandwidth must be 'plugin', 'oracle' or a positive number")

    def resolved_block(self) -> int:
        if self.block == "auto":
            if isinstance(self.family, WeibullClass):
                return max(2, round(math.log(self.m) ** 2)) if self.m > 1 else 2
            return max(2, self.m)
        return int(self.block)

    def resolved_kernel(self) -> str:
        if self.kernel == "auto":
            return "epanechnikov" if isinstance(self.family, ReversedBurr) else "gaussian"
        return self.kernel

    def label(self) -> str:
        return self.family.label()

    def family_name(self) -> str:
        return type(self.family).__name__


def _is_positive_number(v) -> bool:
    try:
        return math.isfinite(float(v)) and float(v) > 0
    except (TypeError, ValueError):
        return False


@dataclass(frozen=True)
class MiseReport:
    """Aggregated Monte Carlo result of one cell."""

    config: ExperimentConfig
    block_size: int
    kernel: str
    pe_mean: Optional[float] = None
    pe_sd: Optional[float] = None
    pe_failures: int = 0
    ne_mean: Optional[float] = None
    ne_sd: Optional[float] = None
    ne_failures: int = 0
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


# --------------------------------------------------------------------------
# integrated squared error


def _grid_setup(spec: SmdSpec, grid_points: int):
    lo = spec.quantile(0.1)
    hi = spec.quantile(0.9)
    grid = np.linspace(lo, hi, grid_points)
    return grid, np.asarray(spec.cdf(grid)), hi - lo


def _mise_on_grid(curve: np.ndarray, truth: np.ndarray, grid: np.ndarray, length: float) -> float:
    return float(np.trapezoid((curve - truth) ** 2, grid) / length)


def mise(estimate_fn, spec: SmdSpec, grid_points: int = 201) -> float:
    """Normalized integrated squared error of a cdf estimate against F^m."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    grid, truth, length = _grid_setup(spec, grid_points)
    return _mise_on_grid(np.asarray(estimate_fn(grid), dtype=float), truth, grid, length)


# --------------------------------------------------------------------------
# replicate execution


def _one_replicate(task) -> tuple:
    (family, n, m, k, estimators, kernel_name, bandwidth, grid, truth, length, seedseq) = task
    rng = np.random.Generator(np.random.PCG64(seedseq))
    data = family.sample(n, rng)
    pe_val = math.nan
    ne_val = math.nan
    if "pe" in estimators:
        try:
            fit = gev.fit_mle(gev.block_maxima(data, k), block_size=k)
            if fit.converged:
                curve = gev.gev_cdf(fit.params, grid)
                pe_val = _mise_on_grid(curve, truth, grid, length)
        except ValueError:
            pass
    if "ne" in estimators:
        kernel = kernels.resolve_kernel(kernel_name)
        try:
            if bandwidth == "plugin":
                h = kernels.bandwidth_plugin(data, kernel).value
            else:
                h = float(bandwidth)
            xs = np.sort(data)
            curve = kernels.ne_estimate(xs, kernel, h, m, grid, assume_sorted=True)
            ne_val = _mise_on_grid(curve, truth, grid, length)
        except ValueError:
            pass
    return pe_val, ne_val


def _resolve_bandwidth_rule(config: ExperimentConfig, spec: SmdSpec):
    if config.bandwidth == "oracle":
        # data-independent: the theory bandwidth at the central grid quantile
        x_mid = spec.quantile(0.5)
        kernel = kernels.resolve_kernel(config.resolved_kernel())
        return kernels.bandwidth_oracle(config.family.class_params(), kernel, x_mid, config.n).value
    return config.bandwidth


def run_cell(config: ExperimentConfig, workers: int = 1) -> MiseReport:
    """Run one experiment cell; pure function of (config, config.seed)."""
    start = time.perf_counter()
    spec = SmdSpec(config.family, config.m)
    grid, truth, length = _grid_setup(spec, config.grid_points)
    k = config.resolved_block()
    kernel_name = config.resolved_kernel()
    bandwidth = _resolve_bandwidth_rule(config, spec)
    children = np.random.SeedSequence(config.seed).spawn(config.reps)
    tasks = [
        (config.family, config.n, config.m, k, config.estimators, kernel_name,
         bandwidth, grid, truth, length, children[r])
        for r in range(config.reps)
    ]
    if workers <= 1:
        results = [_one_replicate(t) for t in tasks]
    else:
        chunk = max(1, config.reps // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_replicate, tasks, chunksize=chunk))

    values = np.array(results, dtype=float)  # (reps, 2), ordered by replicate
    report = {"block_size": k, "kernel": kernel_name}
    any_ok = False
    for idx, name in ((0, "pe"), (1, "ne")):
        if name not in config.estimators:
            continue
        col = values[:, idx]
        ok = col[np.isfinite(col)]
        report[f"{name}_failures"] = int(config.reps - ok.size)
        if ok.size:
            any_ok = True
            report[f"{name}_mean"] = float(np.mean(ok))
            report[f"{name}_sd"] = float(np.std(ok))
    if not any_ok:
        raise RuntimeError(f"all {config.reps} replicates failed for cell {config.label()}")
    return MiseReport(config=config, wall_time=time.perf_counter() - start, **report)


# --------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class TableReport:
    rows: tuple

    def to_records(self) -> list[dict]:
        """Flat per-estimator records with the table scaling (values x100)."""
        records = []
        for row in self.rows:
            cfg = row.config
            for name in cfg.estimators:
                mean = getattr(row, f"{name}_mean")
                sd = getattr(row, f"{name}_sd")
                records.append(
                    {
                        "family": cfg.family_name(),
                        "params": cfg.label(),
                        "n": cfg.n,
                        "m": cfg.m,
                        "k": row.block_size,
                        "estimator": name,
                        "mean_x100": None if mean is None else 100.0 * mean,
                        "sd_x100": None if sd is None else 100.0 * sd,
                        "reps": cfg.reps,
                        "failures": getattr(row, f"{name}_failures"),
                    }
                )
        return records

    def to_csv(self, path) -> None:
        import csv

        fields = ["family", "params", "n", "m", "k", "estimator",
                  "mean_x100", "sd_x100", "reps", "failures"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for rec in self.to_records():
                rec = dict(rec)
                for key in ("mean_x100", "sd_x100"):
                    rec[key] = "" if rec[key] is None else f"{rec[key]:.3f}"
                writer.writerow(rec)

    def to_text(self) -> str:
        lines = [
            f"{'family':<14}{'params':<24}{'n':>6}{'m':>6}{'k':>5}"
            f"{'PE':>10}{'sd':>10}{'NE':>10}{'sd':>10}{'fail':>6}"
        ]

        def fmt(v):
            return "        --" if v is None else f"{100.0 * v:10.3f}"

        for row in self.rows:
            cfg = row.config
            if row.failed:
                lines.append(
                    f"{cfg.family_name():<14}{cfg.label():<24}{cfg.n:>6}{cfg.m:>6}"
                    f"  FAILED: {row.error}"
                )
                continue
            fails = max(row.pe_failures, row.ne_failures)
            lines.append(
                f"{cfg.family_name():<14}{cfg.label():<24}{cfg.n:>6}{cfg.m:>6}{row.block_size:>5}"
                f"{fmt(row.pe_mean)}{fmt(row.pe_sd)}"
                f"{fmt(row.ne_mean)}{fmt(row.ne_sd)}{fails:>6}"
            )
        return "\n".join(lines) + "\n"


def run_table(configs: Sequence[ExperimentConfig], workers: int = 1) -> TableReport:
    """Run cells in order; a cell that errors out is marked failed on its row."""
    rows = []
    for config in configs:
        try:
            rows.append(run_cell(config, workers=workers))
        except (RuntimeError, ValueError) as exc:
            rows.append(
                MiseReport(
                    config=config,
                    block_size=config.resolved_block(),
                    kernel=config.resolved_kernel(),
                    pe_failures=config.reps,
                    ne_failures=config.reps,
                    error=str(exc),
                )
            )
    return TableReport(rows=tuple(rows))


# --------------------------------------------------------------------------
# config files


_CELL_KEYS = {
    "family", "shape", "n", "m", "reps", "estimators", "block",
    "kernel", "bandwidth", "grid", "seed", "label",
}


def _parse_estimators(value: str) -> tuple:
    value = value.strip().lower()
    if value == "both":
        return ("pe", "ne")
    parts = tuple(sorted({p.strip() for p in value.split(",") if p.strip()}, reverse=True))
    return parts


def load_config(path, seed_override: Optional[int] = None) -> list[ExperimentConfig]:
    """Parse a declarative experiment file into a list of cells.

    Format: ``key = value`` lines; ``#`` starts a comment; a ``[cell]`` line
    opens a new cell, inheriting every key set before the first cell.
    Required per cell: family, shape, n, m.  Optional keys: reps, estimators
    (pe / ne / both / "pe,ne"), block (auto or an integer), kernel (auto /
    gaussian / epanechnikov), bandwidth (plugin / oracle / a number), grid,
    seed, label.
    """
    defaults: dict = {}
    cells: list[dict] = []
    current: Optional[dict] = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower() == "[cell]":
                current = {}
                cells.append(current)
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key, value = key.strip().lower(), value.strip()
            if key not in _CELL_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            (defaults if current is None else current)[key] = value
    if not cells:
        raise ValueError(f"{path}: no [cell] sections found")

    file_seed = int(defaults.get("seed", 0))
    if seed_override is not None:
        file_seed = int(seed_override)

    configs = []
    for index, cell in enumerate(cells):
        merged = {**defaults, **cell}
        for required in ("family", "shape", "n", "m"):
            if required not in merged:
                raise ValueError(f"{path}: cell {index + 1} is missing the {required!r} key")
        family = family_from_spec(merged["family"], merged["shape"])
        bandwidth = merged.get("bandwidth", "plugin")
        if bandwidth not in ("plugin", "oracle"):
            bandwidth = float(bandwidth)
        block = merged.get("block", "auto")
        if block != "auto":
            block = int(block)
        if "seed" in cell and seed_override is None:
            seed: Seed = int(cell["seed"])
        else:
            seed = (file_seed, index)
        configs.append(
            ExperimentConfig(
                family=family,
                n=int(merged["n"]),
                m=int(merged["m"]),
                reps=int(merged.get("reps", 500)),
                estimators=_parse_estimators(merged.get("estimators", "both")),
                block=block,
                kernel=merged.get("kernel", "auto"),
                bandwidth=bandwidth,
                grid_points=int(merged.get("grid", 201)),
                seed=seed,
            )
        )
    return configs
