"""Command line entry point.

Subcommands map one-to-one onto the run_* functions in ``experiments``.
Settings resolve in three layers: built-in defaults, then a flat
``key = value`` config file (``--config``), then explicit flags.  Passing
``--from-manifest`` reuses the full resolved config of a previous run,
which reproduces its outputs byte for byte.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, MacrodimError
from .experiments import (
    ExperimentConfig,
    config_from_manifest,
    run_covering,
    run_hitprob,
    run_level_dims,
    run_localtime,
    run_sojourn_dims,
)

_LIST_KEYS = {"seeds", "gammas", "levels", "rho_grid"}
_INT_KEYS = {"n_max", "n_min", "trials", "exact_max_n", "block_len", "num_seeds"}
_FLOAT_KEYS = {"epsilon"}
_STR_KEYS = {"set_file", "gauge", "method", "out_dir", "fmt"}
_KEY_ALIASES = {"format": "fmt", "out": "out_dir", "seed": "seeds", "gamma": "gammas"}


def _coerce(key: str, value: str):
    try:
        if key in _LIST_KEYS:
            return tuple(float(part) for part in value.split(",") if part.strip())
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    if key in _STR_KEYS:
        return value
    raise ConfigError(f"unknown config key: {key}")


def parse_config_file(path: str) -> dict:
    """Flat `key = value` lines; `#` starts a comment; keys match flags."""
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path} line {line_no}: expected key = value")
            key = key.strip().replace("-", "_")
            key = _KEY_ALIASES.get(key, key)
            out[key] = _coerce(key, value.strip())
    return out


def _parse_number_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macrodim",
        description="Large-scale dimension experiments for random walk paths.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument(
            "--from-manifest",
            help="reuse the resolved config of a previous run's manifest.json",
        )
        p.add_argument(
            "--seed", "--seeds", dest="seeds",
            help="comma-separated seed list (default 0..num_seeds-1)",
        )
        p.add_argument("--num-seeds", type=int, help="use seeds 0..N-1")
        p.add_argument("--n-max", type=int, help="largest shell exponent")
        p.add_argument("--n-min", type=int, help="smallest shell in fit windows")
        p.add_argument("--block-len", type=int, help="streaming block length")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), help="table format")

    p = sub.add_parser("sojourn-dims", help="dimensions of sojourn sets per gamma")
    common(p)
    p.add_argument("--gamma", "--gammas", dest="gammas", help="comma-separated list")
    p.add_argument("--rho-grid", help="comma-separated covering exponents")
    p.add_argument("--exact-max-n", type=int, help="largest shell solved exactly")

    p = sub.add_parser("level-dims", help="dimensions of level sets per level")
    common(p)
    p.add_argument("--levels", help="comma-separated level list")
    p.add_argument("--rho-grid", help="comma-separated covering exponents")
    p.add_argument("--exact-max-n", type=int, help="largest shell solved exactly")

    p = sub.add_parser("covering", help="covering costs of a set file")
    common(p)
    p.add_argument("--set-file", help="text file with `n lo hi` runs")
    p.add_argument("--gauge", help="gauge spec: power:<rho>, <rho>, or sqrtlog")
    p.add_argument("--rho", type=float, help="shorthand for --gauge power:<rho>")
    p.add_argument(
        "--method", choices=("exact", "dyadic", "coarse", "bruteforce"),
        help="covering algorithm",
    )

    p = sub.add_parser("hitprob", help="band-hitting sweep against the bound")
    common(p)
    p.add_argument("--trials", type=int, help="Monte Carlo trials per query")

    p = sub.add_parser("localtime", help="local time growth across seeds")
    common(p)
    p.add_argument("--epsilon", type=float, help="half-width of the counting band")

    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if getattr(args, "from_manifest", None) and getattr(args, "config", None):
        raise ConfigError("--config and --from-manifest are mutually exclusive")
    if getattr(args, "from_manifest", None):
        base = config_from_manifest(args.from_manifest).to_dict()
    elif getattr(args, "config", None):
        base = parse_config_file(args.config)
    else:
        base = {}

    def put(key, value):
        if value is not None:
            base[key] = value

    if getattr(args, "seeds", None) is not None and args.num_seeds is not None:
        raise ConfigError("--seeds and --num-seeds are mutually exclusive")
    if getattr(args, "seeds", None) is not None:
        put("seeds", tuple(int(v) for v in _parse_number_list(args.seeds)))
    put("n_max", getattr(args, "n_max", None))
    put("n_min", getattr(args, "n_min", None))
    put("block_len", getattr(args, "block_len", None))
    put("out_dir", getattr(args, "out", None))
    put("fmt", getattr(args, "format", None))
    if getattr(args, "gammas", None) is not None:
        put("gammas", _parse_number_list(args.gammas))
    if getattr(args, "levels", None) is not None:
        put("levels", _parse_number_list(args.levels))
    if getattr(args, "rho_grid", None) is not None:
        put("rho_grid", _parse_number_list(args.rho_grid))
    put("exact_max_n", getattr(args, "exact_max_n", None))
    put("set_file", getattr(args, "set_file", None))
    put("gauge", getattr(args, "gauge", None))
    if getattr(args, "rho", None) is not None:
        if getattr(args, "gauge", None) is not None:
            raise ConfigError("--gauge and --rho are mutually exclusive")
        put("gauge", f"power:{args.rho:g}")
    put("method", getattr(args, "method", None))
    put("trials", getattr(args, "trials", None))
    put("epsilon", getattr(args, "epsilon", None))

    num_seeds = base.pop("num_seeds", None)
    if num_seeds is not None and "seeds" not in base:
        base["seeds"] = tuple(range(int(num_seeds)))
    return ExperimentConfig.from_dict(base)


def _print_dims(result: dict) -> None:
    for report in result["reports"].values():
        s = report.summary()
        print(
            f"{s['label']}: dim_h={s['dim_hausdorff']:.3f}"
            f" ({s['dim_hausdorff_refinement']})"
            f" dim_um={s['dim_upper_mass']:.3f} dim_lm={s['dim_lower_mass']:.3f}"
            f" den_log={s['den_log']:.3f} pixel_slope={s['slope_pixels']:.3f}"
        )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "sojourn-dims":
            _print_dims(run_sojourn_dims(cfg))
        elif args.command == "level-dims":
            _print_dims(run_level_dims(cfg))
        elif args.command == "covering":
            result = run_covering(cfg)
            for n, res in result["results"].items():
                print(
                    f"shell {n}: cost={res.cost!r} intervals={len(res.intervals)}"
                    f" method={res.method}"
                )
        elif args.command == "hitprob":
            result = run_hitprob(cfg)
            flagged = sum(1 for row in result["rows"] if row["flag"])
            print(f"queries={len(result['rows'])} flagged={flagged}")
            for q, msg in result["errors"]:
                print(f"error: {q}: {msg}", file=sys.stderr)
        elif args.command == "localtime":
            result = run_localtime(cfg)
            print(
                f"l_ratio in [{result['l_ratios'].min():.4f},"
                f" {result['l_ratios'].max():.4f}]"
                f" over n in [{cfg.n_min}, {cfg.n_max}]"
            )
        if cfg.out_dir:
            print(f"outputs written to {cfg.out_dir}")
        return 0
    except MacrodimError as exc:
        print(f"macrodim: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"macrodim: failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
