"""Closed-form bound and Monte Carlo checks for band-hitting in one shell.

The question: starting fresh inside shell S_n, does the walk meet the band
|y| <= t^gamma somewhere in a window Q(a, r) = [a, a + r]?  ``hit_bound``
evaluates the closed-form upper bound for this probability and ``hit_mc``
estimates it by simulation, exploiting that B_a is exactly Normal(0, a) so
the window can be simulated without the [0, a) prefix.

The Monte Carlo event uses the same unit-grid witness as the path visitors
(endpoint inside the band, or a sign change inside a cell).  A refined-grid
estimator with fractional steps, ``hit_mc_fine``, exists solely to size the
discretization gap of that witness; it shares no code with ``hit_mc``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, QueryError
from .rng import standard_normals

_MC_BLOCK_VALUES = 1 << 22


@dataclass(frozen=True)
class HitQuery:
    """Window Q(a, r) = [a, a + r] inside shell S_n with band exponent gamma."""

    n: int
    a: int
    r: int
    gamma: float

    def __post_init__(self):
        if self.n < 1:
            raise QueryError(f"shell index must be >= 1, got {self.n}")
        if self.a < 1 << (self.n - 1):
            raise QueryError(
                f"window start {self.a} lies below shell {self.n}"
            )
        if self.r < 1:
            raise QueryError(f"window width must be >= 1, got {self.r}")
        if self.a + self.r > 1 << self.n:
            raise QueryError(
                f"window [{self.a}, {self.a + self.r}] leaves shell {self.n}"
            )
        if not 0.0 <= self.gamma < 0.5:
            raise QueryError(f"gamma must be in [0, 1/2), got {self.gamma}")


@dataclass(frozen=True)
class HitEstimate:
    p_hat: float
    trials: int
    half_width_3sigma: float

    @property
    def sigma(self) -> float:
        return self.half_width_3sigma / 3.0


def hit_bound(q: HitQuery) -> float:
    """Upper bound (2/sqrt(pi)) 2^{n(gamma - 1/2)} + (4/sqrt(2 pi)) (r/a)^{1/2}.

    The first term bounds the chance of being inside the band at the window
    start; the second bounds entry during the window.  May exceed 1 for wide
    windows, where it is vacuous but still valid.
    """
    band = (2.0 / math.sqrt(math.pi)) * 2.0 ** (q.n * (q.gamma - 0.5))
    entry = (4.0 / math.sqrt(2.0 * math.pi)) * math.sqrt(q.r / q.a)
    return band + entry


def _query_stream(q: HitQuery) -> int:
    """Stable 64-bit stream id from the query fields (FNV-1a over the words).

    Depends only on the query, so repeated queries reuse trials while
    distinct queries get effectively independent streams.
    """
    h = 0xCBF29CE484222325
    words = (q.n, q.a, q.r, struct.unpack("<Q", struct.pack("<d", q.gamma))[0])
    for word in words:
        for byte in int(word).to_bytes(8, "little"):
            h = ((h ^ byte) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _check_trials(trials: int) -> None:
    if trials < 1000:
        raise ConfigError(f"need at least 1000 trials, got {trials}")


def _estimate(fired: int, trials: int) -> HitEstimate:
    p = fired / trials
    sigma = math.sqrt(p * (1.0 - p) / trials)
    return HitEstimate(p, trials, 3.0 * sigma)


def hit_mc(
    q: HitQuery, trials: int, seed: int, stream_id: int | None = None
) -> HitEstimate:
    """Monte Carlo estimate of the unit-grid hitting event over Q(a, r).

    Each trial draws B_a ~ Normal(0, a) and r unit Gaussian steps; it fires
    if any grid point k in [a, a + r] has |B_k| <= k^gamma or some cell
    changes sign.  Trials are addressed by counter (trial i consumes draws
    i (r+1) .. (i+1)(r+1) - 1 of the query's stream), so the estimate does
    not depend on how trials are blocked.
    """
    _check_trials(trials)
    if stream_id is None:
        stream_id = _query_stream(q)
    per_trial = q.r + 1
    block_trials = max(1, _MC_BLOCK_VALUES // per_trial)
    ks = q.a + np.arange(per_trial, dtype=np.float64)
    thresholds = ks**q.gamma
    sqrt_a = math.sqrt(q.a)
    buf = np.empty(block_trials * per_trial, dtype=np.float64)
    fired = 0
    done = 0
    while done < trials:
        m = min(block_trials, trials - done)
        z = standard_normals(
            seed, stream_id, done * per_trial, m * per_trial, out=buf[: m * per_trial]
        )
        path = z.reshape(m, per_trial)
        path[:, 0] *= sqrt_a
        np.cumsum(path, axis=1, out=path)
        hit = np.any(path[:, :-1] * path[:, 1:] <= 0.0, axis=1)
        np.abs(path, out=path)
        hit |= np.any(path <= thresholds, axis=1)
        fired += int(np.count_nonzero(hit))
        done += m
    return _estimate(fired, trials)


def hit_mc_fine(
    q: HitQuery,
    trials: int,
    seed: int,
    stream_id: int | None = None,
    substeps: int = 8,
) -> HitEstimate:
    """Refined-grid estimate of the same event, step size 1/substeps.

    Oracle for sizing the unit-grid discretization gap: it monitors the band
    and sign changes on the finer grid, so its probability dominates the
    unit-grid one for the same window.  Written independently of hit_mc on
    purpose (explicit step loop over fine increments).
    """
    _check_trials(trials)
    if substeps < 2:
        raise ConfigError(f"substeps must be >= 2, got {substeps}")
    if stream_id is None:
        stream_id = _query_stream(q) ^ 0x9E3779B97F4A7C15
    steps = q.r * substeps
    per_trial = steps + 1
    h = 1.0 / substeps
    sqrt_h = math.sqrt(h)
    times = q.a + h * np.arange(per_trial, dtype=np.float64)
    thresholds = times**q.gamma
    block_trials = max(1, _MC_BLOCK_VALUES // per_trial)
    fired = 0
    done = 0
    while done < trials:
        m = min(block_trials, trials - done)
        z = standard_normals(seed, stream_id, done * per_trial, m * per_trial)
        z = z.reshape(m, per_trial)
        pos = math.sqrt(q.a) * z[:, 0]
        hit = np.abs(pos) <= thresholds[0]
        for j in range(1, per_trial):
            prev = pos
            pos = prev + sqrt_h * z[:, j]
            np.logical_or(hit, np.abs(pos) <= thresholds[j], out=hit)
            np.logical_or(hit, prev * pos <= 0.0, out=hit)
        fired += int(np.count_nonzero(hit))
        done += m
    return _estimate(fired, trials)


def default_sweep_queries() -> list[HitQuery]:
    """3 x 3 x 3 grid: n in {10, 14, 18}, r/a in {2^-8, 2^-4, 2^-1},
    gamma in {0, 0.25, 0.4}, window starting at the shell floor a = 2^{n-1}."""
    queries = []
    for n in (10, 14, 18):
        a = 1 << (n - 1)
        for ratio_exp in (-8, -4, -1):
            r = max(1, round(a * 2.0**ratio_exp))
            for gamma in (0.0, 0.25, 0.4):
                queries.append(HitQuery(n, a, r, gamma))
    return queries


def hit_sweep(
    queries: list[HitQuery] | None,
    trials: int,
    seed: int,
) -> tuple[list[dict], list[tuple[HitQuery, str]]]:
    """Runs hit_mc over a grid and compares each estimate to its bound.

    Returns (rows, errors).  Each row has keys n, a, r, gamma, trials,
    p_hat, sigma, bound, flag; flag is True when p_hat - 3 sigma > bound,
    which would contradict the bound beyond noise.  Per-query failures are
    collected and the sweep continues.
    """
    if queries is None:
        queries = default_sweep_queries()
    if not queries:
        raise ConfigError("query grid is empty")
    rows: list[dict] = []
    errors: list[tuple[HitQuery, str]] = []
    for q in queries:
        try:
            est = hit_mc(q, trials, seed)
            bound = hit_bound(q)
        except (ConfigError, QueryError) as exc:
            errors.append((q, str(exc)))
            continue
        rows.append(
            {
                "n": q.n,
                "a": q.a,
                "r": q.r,
                "gamma": q.gamma,
                "trials": est.trials,
                "p_hat": est.p_hat,
                "sigma": est.sigma,
                "bound": bound,
                "flag": est.p_hat - est.half_width_3sigma > bound,
            }
        )
    return rows, errors
