"""Experiment orchestration: seeds to simulated sets to dimension reports.

Each run_* function implements one CLI command.  A command streams one path
per seed (visitors for every requested set ride the same pass), reduces
each seed to per-shell series (pixel counts, Lebesgue mass, covering costs
over the rho grid), aggregates across seeds, fits dimensions, and writes
deterministic outputs: per-series tables, ``summary.json`` and
``manifest.json``.  The manifest pins the resolved config and hashes of
every output, so re-running from it reproduces the outputs byte for byte.

Per-seed covering costs use the exact partition optimum up to
``exact_max_n`` and the dyadic upper bound above it; aggregation averages
log2 of per-seed values (geometric mean) over the seeds where the value is
positive, since the predicted quantities are power laws and per-seed costs
are heavy-tailed.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import resource
import time
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping

import numpy as np

from . import __version__
from .covering import (
    nu_bruteforce,
    nu_coarse,
    nu_dyadic,
    nu_dyadic_costs,
    nu_exact,
    nu_exact_costs,
)
from .dimension import (
    DimensionReport,
    fit_log2_slope,
    hausdorff_dimension,
    mass_dimensions,
)
from .errors import ConfigError
from .gauges import make_gauge
from .hitprob import default_sweep_queries, hit_sweep
from .lattice import ShellSet, lebesgue_prefix, load_set_file, pixel_count_prefix
from .pathsim import (
    DEFAULT_BLOCK_LEN,
    LevelVisitor,
    LocalTimeVisitor,
    PathConfig,
    SojournVisitor,
    stream_path,
)
from .validation import check_rho_grid

_DEFAULT_RHO_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
_METHODS = ("exact", "dyadic", "coarse", "bruteforce")


@dataclass
class ExperimentConfig:
    """Resolved parameters for one command invocation."""

    seeds: tuple[int, ...] = tuple(range(20))
    n_max: int = 28
    n_min: int = 16
    gammas: tuple[float, ...] = (0.0, 0.1, 0.25, 0.4, 0.5)
    levels: tuple[float, ...] = (0.0, 1.0, 5.0)
    rho_grid: tuple[float, ...] = _DEFAULT_RHO_GRID
    epsilon: float = 0.5
    trials: int = 10_000
    exact_max_n: int = 20
    block_len: int = DEFAULT_BLOCK_LEN
    set_file: str | None = None
    gauge: str = "power:0.5"
    method: str = "exact"
    out_dir: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        self.seeds = tuple(int(s) for s in self.seeds)
        self.gammas = tuple(float(g) for g in self.gammas)
        self.levels = tuple(float(x) for x in self.levels)
        self.rho_grid = tuple(float(r) for r in self.rho_grid)
        if not self.seeds:
            raise ConfigError("seeds list is empty")
        check_rho_grid(self.rho_grid)
        # reuse the simulator's range checks for the shared fields
        PathConfig(seed=0, n_max=self.n_max)
        if not 1 <= self.n_min < self.n_max:
            raise ConfigError(
                f"n_min must be in [1, n_max), got {self.n_min} with n_max={self.n_max}"
            )
        for g in self.gammas:
            if not 0.0 <= g <= 0.5:
                raise ConfigError(f"gamma must be in [0, 1/2], got {g}")
        for x in self.levels:
            if not math.isfinite(x):
                raise ConfigError(f"level must be finite, got {x}")
        if not 0.0 < self.epsilon <= 2.0:
            raise ConfigError(f"epsilon must be in (0, 2], got {self.epsilon}")
        if self.trials < 1000:
            raise ConfigError(f"trials must be >= 1000, got {self.trials}")
        if not 1 <= self.exact_max_n <= 40:
            raise ConfigError(f"exact_max_n out of range: {self.exact_max_n}")
        if self.block_len < 2:
            raise ConfigError(f"block_len must be >= 2, got {self.block_len}")
        if self.method not in _METHODS:
            raise ConfigError(
                f"method must be one of {', '.join(_METHODS)}, got {self.method!r}"
            )
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        make_gauge(self.gauge)  # fail early on bad gauge specs

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("seeds", "gammas", "levels", "rho_grid"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**dict(d))


def config_from_manifest(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if "config" not in manifest:
        raise ConfigError(f"{path}: no config section in manifest")
    return ExperimentConfig.from_dict(manifest["config"])


# ---------------------------------------------------------------------------
# per-seed reduction and cross-seed aggregation

@dataclass
class SeedReduction:
    """Per-shell series extracted from one seed's set family."""

    ns: np.ndarray          # shell exponents 0 .. n_max
    pixels: np.ndarray      # P_n for the truncation [0, 2^n]
    lebesgue: np.ndarray    # measure of the truncation
    measure: np.ndarray     # occupied cells up to 2^n (sojourn measure)
    nu: np.ndarray          # (len(rho_grid), n_max + 1) covering costs


def reduce_shell_sets(
    sets: Mapping[int, ShellSet],
    rho_grid: Iterable[float],
    exact_max_n: int,
) -> SeedReduction:
    """Collapse one family of per-shell sets into fit-ready series."""
    ns = np.array(sorted(sets), dtype=np.int64)
    gauges = [make_gauge(f"power:{rho:g}") for rho in rho_grid]
    pixels = pixel_count_prefix(sets).astype(np.float64)
    leb = lebesgue_prefix(sets)
    cells = np.array([sets[int(n)].num_cells for n in ns], dtype=np.int64)
    measure = np.cumsum(cells).astype(np.float64)
    nu = np.zeros((len(gauges), ns.size), dtype=np.float64)
    for j, n in enumerate(ns):
        s = sets[int(n)]
        if s.num_cells == 0:
            continue
        if n <= exact_max_n:
            nu[:, j] = nu_exact_costs(s, gauges)
        else:
            nu[:, j] = nu_dyadic_costs(s, gauges)
    return SeedReduction(ns, pixels, np.asarray(leb, dtype=np.float64), measure, nu)


def geometric_mean_positive(stack: np.ndarray) -> np.ndarray:
    """2^(mean of log2) over axis 0, restricted to positive entries.

    Columns with no positive entry come back NaN so downstream fits drop
    them.  Restricting to positive per-seed values matters for level sets,
    where individual shells are empty for a constant fraction of seeds.
    """
    stack = np.asarray(stack, dtype=np.float64)
    pos = stack > 0
    logs = np.where(pos, np.log2(np.where(pos, stack, 1.0)), 0.0)
    counts = pos.sum(axis=0)
    with np.errstate(invalid="ignore"):
        mean = np.where(counts > 0, logs.sum(axis=0) / np.maximum(counts, 1), np.nan)
    return np.where(counts > 0, np.exp2(mean), np.nan)


@dataclass
class AggregateSeries:
    """Geometric means of the per-seed series, aligned on shells."""

    ns: np.ndarray
    pixels: np.ndarray
    lebesgue: np.ndarray
    measure: np.ndarray
    nu: np.ndarray
    num_seeds: int


def aggregate_reductions(reductions: list[SeedReduction]) -> AggregateSeries:
    ns = reductions[0].ns
    for r in reductions[1:]:
        if not np.array_equal(r.ns, ns):
            raise ConfigError("per-seed reductions cover different shells")
    pix = geometric_mean_positive(np.stack([r.pixels for r in reductions]))
    leb = geometric_mean_positive(np.stack([r.lebesgue for r in reductions]))
    mes = geometric_mean_positive(np.stack([r.measure for r in reductions]))
    nu = geometric_mean_positive(np.stack([r.nu for r in reductions]))
    return AggregateSeries(ns, pix, leb, mes, nu, len(reductions))


def fit_report(label: str, agg: AggregateSeries, cfg: ExperimentConfig) -> DimensionReport:
    """Dimension fits on aggregated series, windowed to [n_min, n_max]."""
    window = (agg.ns >= cfg.n_min) & (agg.ns <= cfg.n_max)
    ns_w = agg.ns[window]
    series_by_rho = {
        rho: (ns_w, agg.nu[i][window]) for i, rho in enumerate(cfg.rho_grid)
    }
    hf = hausdorff_dimension(series_by_rho, rho_grid=cfg.rho_grid)
    mf = mass_dimensions(
        agg.ns, agg.pixels, agg.lebesgue, n_min=cfg.n_min, n_max=cfg.n_max
    )
    params: dict = {"num_seeds": agg.num_seeds, "n_min": cfg.n_min, "n_max": cfg.n_max}
    mes_w = agg.measure[window]
    ok = np.isfinite(mes_w) & (mes_w > 0)
    if ok.sum() >= 5:
        slope, _, stderr = fit_log2_slope(ns_w[ok], mes_w[ok])
        params["measure_slope"] = slope
        params["measure_slope_stderr"] = stderr
    return DimensionReport(label, hf, mf, params)


# ---------------------------------------------------------------------------
# deterministic output files

def _fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class OutputWriter:
    """Writes tables and JSON under one directory, hashing every file."""

    def __init__(self, out_dir: str, fmt: str):
        self.out_dir = out_dir
        self.fmt = fmt
        self.hashes: dict[str, str] = {}
        os.makedirs(out_dir, exist_ok=True)

    def _record(self, name: str, data: bytes) -> str:
        path = os.path.join(self.out_dir, name)
        with open(path, "wb") as fh:
            fh.write(data)
        self.hashes[name] = hashlib.sha256(data).hexdigest()
        return path

    def table(self, stem: str, header: list[str], rows: list[list]) -> str:
        if self.fmt == "json":
            payload = [dict(zip(header, row)) for row in rows]
            return self.json(f"{stem}.json", payload)
        lines = [",".join(header)]
        lines.extend(",".join(_fmt_value(v) for v in row) for row in rows)
        return self._record(f"{stem}.csv", ("\n".join(lines) + "\n").encode())

    def json(self, name: str, payload) -> str:
        data = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"
        return self._record(name, data.encode())


def _write_manifest(
    writer: OutputWriter | None,
    command: str,
    cfg: ExperimentConfig,
    streams: dict,
    started: float,
) -> dict:
    manifest = {
        "tool": "macrodim",
        "version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "streams": streams,
        "wall_clock_seconds": round(time.perf_counter() - started, 3),
        "peak_rss_kb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss,
        "outputs": dict(sorted(writer.hashes.items())) if writer else {},
    }
    if writer is not None:
        path = os.path.join(writer.out_dir, "manifest.json")
        data = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        with open(path, "wb") as fh:
            fh.write(data.encode())
    return manifest


def _series_rows(agg: AggregateSeries) -> tuple[list[str], list[list]]:
    header = ["n", "pixels", "lebesgue", "measure"]
    rows = [
        [int(n), float(p), float(l), float(m)]
        for n, p, l, m in zip(agg.ns, agg.pixels, agg.lebesgue, agg.measure)
    ]
    return header, rows


def _nu_rows(agg: AggregateSeries, rho_grid) -> tuple[list[str], list[list]]:
    header = ["rho", "n", "nu"]
    rows = []
    for i, rho in enumerate(rho_grid):
        for j, n in enumerate(agg.ns):
            rows.append([float(rho), int(n), float(agg.nu[i, j])])
    return header, rows


# ---------------------------------------------------------------------------
# commands

def _dims_command(
    command: str,
    cfg: ExperimentConfig,
    specs: tuple,
    make_visitor,
    stem: str,
) -> dict:
    """Shared driver for sojourn-dims and level-dims."""
    started = time.perf_counter()
    if not specs:
        raise ConfigError(f"{command}: no sets requested")
    per_spec: list[list[SeedReduction]] = [[] for _ in specs]
    for seed in cfg.seeds:
        pc = PathConfig(seed=seed, n_max=cfg.n_max)
        visitors = [make_visitor(v) for v in specs]
        results = stream_path(pc, visitors, block_len=cfg.block_len)
        for i, sets in enumerate(results):
            per_spec[i].append(
                reduce_shell_sets(sets, cfg.rho_grid, cfg.exact_max_n)
            )
    writer = OutputWriter(cfg.out_dir, cfg.fmt) if cfg.out_dir else None
    reports = {}
    aggregates = {}
    for i, value in enumerate(specs):
        agg = aggregate_reductions(per_spec[i])
        label = f"{stem}={value:g}"
        reports[value] = fit_report(label, agg, cfg)
        aggregates[value] = agg
        if writer:
            writer.table(f"series_{stem}-{value:g}", *_series_rows(agg))
            writer.table(f"nu_{stem}-{value:g}", *_nu_rows(agg, cfg.rho_grid))
    if writer:
        writer.json(
            "summary.json", {f"{stem}={v:g}": reports[v].summary() for v in specs}
        )
    manifest = _write_manifest(
        writer, command, cfg, {"path_stream_id": 0}, started
    )
    return {"reports": reports, "aggregates": aggregates, "manifest": manifest}


def run_sojourn_dims(cfg: ExperimentConfig) -> dict:
    """Dimensions of the moving-boundary sojourn sets, one report per gamma."""
    return _dims_command(
        "sojourn-dims", cfg, cfg.gammas, SojournVisitor, "gamma"
    )


def run_level_dims(cfg: ExperimentConfig) -> dict:
    """Dimensions of level-crossing sets, one report per level."""
    if not cfg.levels:
        raise ConfigError("levels list is empty")
    return _dims_command("level-dims", cfg, cfg.levels, LevelVisitor, "x")


def run_covering(cfg: ExperimentConfig) -> dict:
    """Covering costs of a user-supplied set file, one result per shell."""
    started = time.perf_counter()
    if not cfg.set_file:
        raise ConfigError("covering needs a set file")
    sets = load_set_file(cfg.set_file)
    gauge = make_gauge(cfg.gauge)
    runner = {
        "exact": nu_exact,
        "dyadic": nu_dyadic,
        "coarse": nu_coarse,
        "bruteforce": nu_bruteforce,
    }[cfg.method]
    results = {n: runner(sets[n], gauge) for n in sorted(sets)}
    writer = OutputWriter(cfg.out_dir, cfg.fmt) if cfg.out_dir else None
    if writer:
        header = ["n", "num_cells", "cost", "num_intervals"]
        rows = [
            [n, sets[n].num_cells, res.cost, len(res.intervals)]
            for n, res in results.items()
        ]
        writer.table("covering", header, rows)
        writer.json(
            "summary.json",
            {
                "gauge": gauge.label,
                "method": cfg.method,
                "shells": {
                    str(n): {
                        "cost": res.cost,
                        "intervals": [[iv.lo, iv.hi] for iv in res.intervals],
                    }
                    for n, res in results.items()
                },
            },
        )
    manifest = _write_manifest(writer, "covering", cfg, {}, started)
    return {"results": results, "manifest": manifest}


def run_hitprob(cfg: ExperimentConfig) -> dict:
    """Default band-hitting sweep: estimates against the closed-form bound."""
    started = time.perf_counter()
    seed = cfg.seeds[0]
    rows, errors = hit_sweep(default_sweep_queries(), cfg.trials, seed)
    writer = OutputWriter(cfg.out_dir, cfg.fmt) if cfg.out_dir else None
    if writer:
        header = ["n", "a", "r", "gamma", "trials", "p_hat", "sigma", "bound", "flag"]
        writer.table("sweep", header, [[row[h] for h in header] for row in rows])
        writer.json(
            "summary.json",
            {
                "num_queries": len(rows),
                "num_flagged": sum(1 for row in rows if row["flag"]),
                "max_excess": max(
                    (row["p_hat"] - row["bound"] for row in rows), default=None
                ),
                "errors": [str(msg) for _, msg in errors],
            },
        )
    manifest = _write_manifest(
        writer,
        "hitprob",
        cfg,
        {"per_query_stream": "fnv1a64(n, a, r, gamma_bits)", "seed": seed},
        started,
    )
    return {"rows": rows, "errors": errors, "manifest": manifest}


def run_localtime(cfg: ExperimentConfig) -> dict:
    """Local-time growth across seeds: shell means and the cumulative stat."""
    started = time.perf_counter()
    l_stack = []
    f_stack = []
    ns = None
    for seed in cfg.seeds:
        pc = PathConfig(seed=seed, n_max=cfg.n_max)
        (series,) = stream_path(
            pc, [LocalTimeVisitor(cfg.epsilon)], block_len=cfg.block_len
        )
        ns = series.ns
        l_stack.append(series.l_hat)
        f_stack.append(series.f_stat)
    l_arr = np.stack(l_stack)
    f_arr = np.stack(f_stack)
    mean_l = l_arr.mean(axis=0)
    mean_f = f_arr.mean(axis=0)
    ref = math.sqrt(2.0 / math.pi)
    rows = []
    for j, n in enumerate(ns):
        n = int(n)
        scale = 2.0 ** (n / 2.0)
        rows.append(
            [
                n,
                float(mean_l[j]),
                float(l_arr[:, j].std(ddof=0)),
                float(mean_l[j] / scale),
                float(mean_f[j]),
                float(mean_f[j] / math.sqrt(n)) if n >= 1 else float("nan"),
            ]
        )
    window = (ns >= cfg.n_min) & (ns <= cfg.n_max)
    ratios = mean_l[window] / 2.0 ** (ns[window] / 2.0)
    f_window = (ns >= 12) & (ns <= 26)
    f_ratios = mean_f[f_window] / np.sqrt(np.maximum(ns[f_window], 1))
    writer = OutputWriter(cfg.out_dir, cfg.fmt) if cfg.out_dir else None
    if writer:
        header = ["n", "mean_l_hat", "std_l_hat", "l_ratio", "mean_f", "f_over_sqrt_n"]
        writer.table("localtime", header, rows)
        writer.json(
            "summary.json",
            {
                "epsilon": cfg.epsilon,
                "num_seeds": len(cfg.seeds),
                "reference": ref,
                "l_ratio_min": float(ratios.min()),
                "l_ratio_max": float(ratios.max()),
                "f_ratio_min": float(f_ratios.min()) if f_ratios.size else None,
                "f_ratio_max": float(f_ratios.max()) if f_ratios.size else None,
            },
        )
    manifest = _write_manifest(writer, "localtime", cfg, {"path_stream_id": 0}, started)
    return {
        "ns": ns,
        "mean_l_hat": mean_l,
        "mean_f": mean_f,
        "l_ratios": ratios,
        "f_ratios": f_ratios,
        "manifest": manifest,
    }
