"""Streaming simulation of a unit-increment Gaussian walk with visitors.

A path of 2^n_max steps is generated block by block (B_0 = 0, B_{k+1} =
B_k + xi_k with standard normal increments addressed by a counter RNG) and
pushed through visitors that reduce it on the fly: occupied cells of moving
boundary sojourn sets, level-crossing sets, sojourn measure, local time at
zero, per-window oscillation.  Peak memory is a few block-sized buffers plus
whatever the visitors retain (run lists, one value per shell), never the
whole path.

Visitors receive :class:`Block` views whose arrays are reused between
blocks; a visitor must reduce them inside ``process_block`` and never hold a
reference across calls.  Blocks never straddle a shell boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .lattice import ShellSet, shell_span
from .rng import check_key_word, standard_normals

DEFAULT_BLOCK_LEN = 1 << 21


@dataclass(frozen=True)
class PathConfig:
    """Identity of one simulated path.

    The (seed, stream_id) pair keys the counter RNG, so equal configs
    reproduce bit-identical paths and different stream ids give independent
    paths under one seed.
    """

    seed: int
    stream_id: int = 0
    n_max: int = 20
    increment_scheme: str = "gaussian_unit"

    def __post_init__(self):
        check_key_word(self.seed, "seed")
        check_key_word(self.stream_id, "stream_id")
        if not 8 <= self.n_max <= 40:
            raise ConfigError(f"n_max must be in [8, 40], got {self.n_max}")
        if self.increment_scheme != "gaussian_unit":
            raise ConfigError(
                f"unknown increment scheme {self.increment_scheme!r}"
            )

    @property
    def num_steps(self) -> int:
        return 1 << self.n_max


@dataclass(frozen=True)
class SojournSpec:
    """Moving boundary |B_t| <= t^gamma, 0 <= gamma <= 1/2."""

    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 0.5:
            raise ConfigError(f"gamma must be in [0, 1/2], got {self.gamma}")


@dataclass(frozen=True)
class LevelSpec:
    """Level x whose crossing cells are collected."""

    x: float

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise ConfigError(f"level must be finite, got {self.x}")


class Block:
    """One contiguous span of cells inside a single shell.

    ``bounds[i]`` is the walk value at grid point k0 + i; the block covers
    cells k0 .. k0 + num_cells - 1.  ``min_abs`` and ``sign_flip`` are
    computed once per block and shared by all visitors.  All arrays are
    views into reused buffers.
    """

    __slots__ = ("shell", "k0", "bounds", "increments", "_buf", "_minabs", "_flip")

    def __init__(self, buffers: dict):
        self._buf = buffers

    def _load(self, shell: int, k0: int, bounds, increments):
        self.shell = shell
        self.k0 = k0
        self.bounds = bounds
        self.increments = increments
        self._minabs = None
        self._flip = None

    @property
    def num_cells(self) -> int:
        return len(self.bounds) - 1

    @property
    def min_abs(self) -> np.ndarray:
        """min(|B_k|, |B_{k+1}|) per cell."""
        if self._minabs is None:
            L = self.num_cells
            tmp = np.abs(self.bounds[:-1], out=self._buf["tmp"][:L])
            out = np.abs(self.bounds[1:], out=self._buf["minabs"][:L])
            self._minabs = np.minimum(tmp, out, out=out)
        return self._minabs

    @property
    def sign_flip(self) -> np.ndarray:
        """True where B_k * B_{k+1} <= 0 (crosses or touches zero)."""
        if self._flip is None:
            L = self.num_cells
            tmp = np.multiply(self.bounds[:-1], self.bounds[1:], out=self._buf["tmp"][:L])
            self._flip = np.less_equal(tmp, 0.0, out=self._buf["flip"][:L])
        return self._flip

    def occupancy_scratch(self) -> np.ndarray:
        """Reusable bool buffer for occupancy masks (one user at a time)."""
        return self._buf["occ"][: self.num_cells]


class PathVisitor:
    """Base visitor: override ``process_block``; ``finish`` returns a result."""

    def process_block(self, block: Block) -> None:
        raise NotImplementedError

    def finish(self):
        return None


def _shell_chunks(n_max: int, block_len: int):
    """(shell, k0, length) spans covering cells 0 .. 2^n_max - 1 in order."""
    for shell in range(n_max + 1):
        lo, hi = shell_span(shell)
        for k0 in range(lo, hi, block_len):
            yield shell, k0, min(block_len, hi - k0)


def _make_buffers(block_len: int) -> dict:
    return {
        "xi": np.empty(block_len, dtype=np.float64),
        "bounds": np.empty(block_len + 1, dtype=np.float64),
        "tmp": np.empty(block_len, dtype=np.float64),
        "minabs": np.empty(block_len, dtype=np.float64),
        "occ": np.empty(block_len, dtype=bool),
        "flip": np.empty(block_len, dtype=bool),
    }


def stream_path(
    cfg: PathConfig,
    visitors: Sequence[PathVisitor],
    block_len: int = DEFAULT_BLOCK_LEN,
) -> list:
    """Stream one path through the visitors; returns their ``finish`` values.

    Fixed (cfg, block_len) reproduce outputs bit-identically.  The RNG is
    counter-addressed, so the increment at cell k does not depend on the
    block layout; block boundaries only affect the rounding schedule of the
    running sums (last-ulp effects), which is why block_len is treated as
    part of the numeric schedule and recorded by callers that persist
    results.
    """
    if block_len < 2:
        raise ConfigError(f"block_len must be >= 2, got {block_len}")
    visitors = list(visitors)
    buffers = _make_buffers(min(block_len, 1 << cfg.n_max))
    block = Block(buffers)
    carry = 0.0
    for shell, k0, length in _shell_chunks(cfg.n_max, block_len):
        xi = standard_normals(cfg.seed, cfg.stream_id, k0, length, out=buffers["xi"])
        bounds = buffers["bounds"][: length + 1]
        bounds[0] = carry
        np.cumsum(xi, out=bounds[1:])
        bounds[1:] += carry
        carry = float(bounds[-1])
        block._load(shell, k0, bounds, xi)
        for v in visitors:
            v.process_block(block)
    return [v.finish() for v in visitors]


def replay_path(
    values,
    visitors: Sequence[PathVisitor],
    block_len: int = DEFAULT_BLOCK_LEN,
) -> list:
    """Push an explicit grid of walk values through visitors.

    ``values`` holds B_0 .. B_T with T a power of two, so shells 0..log2(T)
    are covered exactly.  Mainly for tests and offline reductions.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    T = values.size - 1
    if T < 1 or T & (T - 1):
        raise ConfigError(f"need 2^m + 1 grid values, got {values.size}")
    n_max = T.bit_length() - 1
    visitors = list(visitors)
    buffers = _make_buffers(min(block_len, T))
    block = Block(buffers)
    for shell, k0, length in _shell_chunks(n_max, block_len):
        bounds = values[k0 : k0 + length + 1]
        xi = np.diff(bounds)
        block._load(shell, k0, bounds, xi)
        for v in visitors:
            v.process_block(block)
    return [v.finish() for v in visitors]


# ---------------------------------------------------------------------------
# occupancy kernels

def _sojourn_occupancy(block: Block, gamma: float) -> np.ndarray:
    """Cells meeting min(|B_k|, |B_{k+1}|) <= k^gamma or crossing zero.

    Cell 0 is always occupied.  Returns a view of the shared occupancy
    buffer; consume before the next use.
    """
    L = block.num_cells
    occ = block.occupancy_scratch()
    m = block.min_abs
    k_top = float(block.k0 + L - 1)
    np.less_equal(m, k_top**gamma, out=occ)
    if gamma > 0.0 and block.k0 + L > 1:
        # threshold grows along the block: exact check on the cheap superset
        idx = np.flatnonzero(occ)
        if idx.size:
            kk = (block.k0 + idx).astype(np.float64)
            occ[idx] = m[idx] <= kk**gamma
    occ |= block.sign_flip
    if block.k0 == 0:
        occ[0] = True
    return occ


def _level_occupancy(block: Block, x: float) -> np.ndarray:
    """Cells where the walk crosses (or touches) level x."""
    L = block.num_cells
    occ = block.occupancy_scratch()
    b0 = block.bounds[:-1]
    b1 = block.bounds[1:]
    if x == 0.0:
        np.copyto(occ, block.sign_flip)
        return occ
    tmp = block._buf["tmp"][:L]
    np.subtract(b0, x, out=tmp)
    d1 = np.subtract(b1, x, out=block._buf["minabs"][:L])
    np.multiply(tmp, d1, out=tmp)
    np.less_equal(tmp, 0.0, out=occ)
    # the shared min_abs cache is now stale for this block
    block._minabs = None
    return occ


class _RunAccumulator:
    """Builds maximal runs of one shell from per-block occupancy masks."""

    def __init__(self, n: int):
        self.n = n
        self.runs: list[tuple[int, int]] = []
        self.open: list[int] | None = None

    def add(self, k0: int, occ: np.ndarray) -> None:
        L = occ.size
        a = occ.view(np.int8)
        d = np.diff(a)
        starts = (np.flatnonzero(d == 1) + 1).tolist()
        ends = (np.flatnonzero(d == -1) + 1).tolist()
        if occ[0]:
            starts.insert(0, 0)
        if occ[-1]:
            ends.append(L)
        block_end = k0 + L
        for s, e in zip(starts, ends):
            lo, hi = k0 + s, k0 + e
            if self.open is not None and self.open[1] == lo:
                self.open[1] = hi
            else:
                if self.open is not None:
                    self.runs.append((self.open[0], self.open[1]))
                self.open = [lo, hi]
            if hi != block_end:
                self.runs.append((self.open[0], self.open[1]))
                self.open = None

    def close(self) -> ShellSet:
        if self.open is not None:
            self.runs.append((self.open[0], self.open[1]))
            self.open = None
        return ShellSet.from_runs(self.n, self.runs)


class _ShellSetCollector(PathVisitor):
    """Shared machinery: turn an occupancy rule into per-shell ShellSets."""

    def __init__(self):
        self._acc: _RunAccumulator | None = None
        self._sets: dict[int, ShellSet] = {}

    def _occupancy(self, block: Block) -> np.ndarray:
        raise NotImplementedError

    def process_block(self, block: Block) -> None:
        if self._acc is None or self._acc.n != block.shell:
            if self._acc is not None:
                self._sets[self._acc.n] = self._acc.close()
            self._acc = _RunAccumulator(block.shell)
        self._acc.add(block.k0, self._occupancy(block))

    def finish(self) -> dict[int, ShellSet]:
        if self._acc is not None:
            self._sets[self._acc.n] = self._acc.close()
            self._acc = None
        return self._sets


class SojournVisitor(_ShellSetCollector):
    """Collects the occupied cells of the moving-boundary sojourn set.

    A cell k is occupied when the walk is inside the band |y| <= t^gamma at
    either endpoint, or changes sign inside the cell; cell 0 always is.
    """

    def __init__(self, spec: SojournSpec | float):
        super().__init__()
        self.spec = spec if isinstance(spec, SojournSpec) else SojournSpec(float(spec))

    def _occupancy(self, block: Block) -> np.ndarray:
        return _sojourn_occupancy(block, self.spec.gamma)


class LevelVisitor(_ShellSetCollector):
    """Collects cells where the walk crosses a fixed level."""

    def __init__(self, spec: LevelSpec | float):
        super().__init__()
        self.spec = spec if isinstance(spec, LevelSpec) else LevelSpec(float(spec))

    def _occupancy(self, block: Block) -> np.ndarray:
        return _level_occupancy(block, self.spec.x)


@dataclass
class SojournMeasureSeries:
    """Occupied-cell counts of the sojourn set up to each power of two."""

    gamma: float
    ns: np.ndarray      # shell exponents 0 .. n_max
    m_hat: np.ndarray   # M(2^n): occupied cells among 0 .. 2^n - 1


class SojournMeasureVisitor(PathVisitor):
    """Counts sojourn-occupied cells, recorded at every shell boundary."""

    def __init__(self, spec: SojournSpec | float):
        self.spec = spec if isinstance(spec, SojournSpec) else SojournSpec(float(spec))
        self._count = 0
        self._per_n: dict[int, int] = {}
        self._shell = None

    def process_block(self, block: Block) -> None:
        if self._shell is not None and block.shell != self._shell:
            self._per_n[self._shell] = self._count
        self._shell = block.shell
        occ = _sojourn_occupancy(block, self.spec.gamma)
        self._count += int(np.count_nonzero(occ))

    def finish(self) -> SojournMeasureSeries:
        if self._shell is not None:
            self._per_n[self._shell] = self._count
        ns = np.array(sorted(self._per_n), dtype=np.int64)
        m = np.array([self._per_n[n] for n in ns], dtype=np.int64)
        return SojournMeasureSeries(self.spec.gamma, ns, m)


@dataclass
class LocalTimeSeries:
    """Local time at zero, estimated from time spent near the axis.

    ``l_hat[n]`` is (1 / 2 eps) * #{k < 2^n : |B_k| <= eps}.  ``f_stat[N]``
    accumulates the shell increments of l_hat scaled by 1/sqrt(n 2^n); its
    mean grows like sqrt(N), which is what makes it a usable divergence
    witness for the zero set.
    """

    epsilon: float
    ns: np.ndarray
    l_hat: np.ndarray
    f_stat: np.ndarray
    samples: tuple[np.ndarray, np.ndarray] | None = None


class LocalTimeVisitor(PathVisitor):
    """Counts grid points with |B_k| <= eps; reports at shell boundaries."""

    def __init__(self, epsilon: float = 0.5, sample_stride: int | None = None):
        if not 0.0 < epsilon <= 2.0:
            raise ConfigError(f"epsilon must be in (0, 2], got {epsilon}")
        if sample_stride is not None and sample_stride < 1:
            raise ConfigError(f"sample_stride must be >= 1, got {sample_stride}")
        self.epsilon = float(epsilon)
        self.sample_stride = sample_stride
        self._count = 0
        self._per_n: dict[int, int] = {}
        self._shell = None
        self._sample_t: list[int] = []
        self._sample_c: list[int] = []

    def process_block(self, block: Block) -> None:
        if self._shell is not None and block.shell != self._shell:
            self._per_n[self._shell] = self._count
        self._shell = block.shell
        L = block.num_cells
        b = block.bounds[:L]  # grid points k0 .. k0+L-1, each counted once
        tmp = np.abs(b, out=block._buf["tmp"][:L])
        near = np.less_equal(tmp, self.epsilon, out=block.occupancy_scratch())
        if self.sample_stride:
            stride = self.sample_stride
            first = -block.k0 % stride
            if first < L:
                offs = np.arange(first, L, stride)
                cum = np.cumsum(near)
                counts = self._count + cum[offs] - near[offs]
                self._sample_t.extend((block.k0 + offs).tolist())
                self._sample_c.extend(counts.tolist())
        self._count += int(np.count_nonzero(near))

    def finish(self) -> LocalTimeSeries:
        if self._shell is not None:
            self._per_n[self._shell] = self._count
        ns = np.array(sorted(self._per_n), dtype=np.int64)
        scale = 1.0 / (2.0 * self.epsilon)
        l_hat = np.array([self._per_n[n] for n in ns], dtype=np.float64) * scale
        f = np.zeros(ns.size, dtype=np.float64)
        for i in range(1, ns.size):
            n = int(ns[i])
            f[i] = f[i - 1] + (l_hat[i] - l_hat[i - 1]) / math.sqrt(n * 2.0**n)
        samples = None
        if self.sample_stride:
            t = np.array(self._sample_t, dtype=np.int64)
            c = np.array(self._sample_c, dtype=np.float64) * scale
            samples = (t, c)
        return LocalTimeSeries(self.epsilon, ns, l_hat, f, samples)


def local_time_increment_ratio(ts, l_vals, h_min: int = 2) -> float:
    """Largest (L_{t+h} - L_t) / sqrt(h / log2 h) over sampled time pairs.

    Diagnostic for how fast local time can accumulate over short windows;
    normalized by n = log2(horizon) it stays bounded by a small constant.
    """
    ts = np.asarray(ts, dtype=np.float64)
    lv = np.asarray(l_vals, dtype=np.float64)
    if ts.size < 2:
        raise ConfigError("need at least two sampled times")
    dt = ts[None, :] - ts[:, None]
    dl = lv[None, :] - lv[:, None]
    ok = dt >= h_min
    denom = np.sqrt(np.where(ok, dt, 2.0) / np.log2(np.where(ok, dt, 2.0)))
    ratios = np.where(ok, dl / denom, -np.inf)
    return float(ratios.max())


@dataclass
class OscillationScan:
    """Per-window largest one-step move inside one shell.

    Windows of ``window`` consecutive cells partition the shell (trailing
    partial window dropped).  A window whose largest |increment| stays below
    log(log(n)) (natural logs) is flagged; for a unit Gaussian walk flags
    are vanishingly rare once n >= 16.
    """

    n: int
    window: int
    threshold: float
    maxima: np.ndarray

    @property
    def flags(self) -> np.ndarray:
        return self.maxima < self.threshold

    @property
    def num_windows(self) -> int:
        return int(self.maxima.size)

    @property
    def flagged_fraction(self) -> float:
        if self.maxima.size == 0:
            return 0.0
        return float(self.flags.mean())


class OscillationVisitor(PathVisitor):
    """Windowed max |increment| over one shell, window = floor(n^1.5)."""

    def __init__(self, n: int):
        if n < 16:
            raise ConfigError(f"oscillation scan needs n >= 16, got {n}")
        self.n = n
        self.window = int(n**1.5)
        self.threshold = math.log(math.log(n))
        self._tail = np.empty(0, dtype=np.float64)
        self._maxima: list[np.ndarray] = []

    def process_block(self, block: Block) -> None:
        if block.shell != self.n:
            return
        inc = np.abs(block.increments)
        data = np.concatenate([self._tail, inc]) if self._tail.size else inc
        w = self.window
        full = data.size // w
        if full:
            self._maxima.append(data[: full * w].reshape(full, w).max(axis=1))
        self._tail = data[full * w :].copy()

    def finish(self) -> OscillationScan:
        maxima = (
            np.concatenate(self._maxima) if self._maxima else np.empty(0, dtype=np.float64)
        )
        return OscillationScan(self.n, self.window, self.threshold, maxima)
