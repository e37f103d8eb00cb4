"""Optimal covering costs of shell sets under a gauge.

The covering cost of a shell set E in shell n is the cheapest way to cover
its occupied cells by integer-endpoint intervals Q inside the shell, where an
interval costs gauge(|Q| / 2^n).  Four routines compute it:

* :func:`nu_exact` - optimal over all interval covers, via a partition DP
  over the maximal runs.  Any cover can be normalized, group by group, so
  that each interval is the hull of a consecutive group of runs (padding an
  interval beyond the hull cannot help a gauge that is nondecreasing in
  length), so optimizing over run partitions is exhaustive.  The one wrinkle
  is the sqrt-log gauge, which decreases again near the half-shell length;
  there a group may alternatively be covered by a full-shell interval, so the
  group cost is min(gauge(hull), gauge(shell)).
* :func:`nu_bruteforce` - branch-and-bound enumeration over arbitrary
  interval families, used as an independent oracle in tests.  Hard caps keep
  it honest-sized.
* :func:`nu_dyadic` - cover restricted to shell-aligned dyadic intervals,
  computed level by level over the subdivision tree.  Cheap on huge shells
  and within a factor 2^(1+rho) of the exact cost for power gauges.
* :func:`nu_coarse` - interval lengths restricted to positive multiples of
  n^2; blocks may overrun the shell's right edge (costing only).

Ties are broken toward fewer intervals, then the lexicographically smallest
interval list, so witnesses are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, GaugeDomainError
from .gauges import GaugeFn, PowerGauge, SqrtLogGauge
from .lattice import IntegerInterval, ShellSet, shell_span


@dataclass(frozen=True)
class CoveringResult:
    """Covering cost with its witnessing intervals.

    ``cost`` equals the sum of gauge(length / 2^n) over ``intervals``, and
    the intervals cover every occupied cell of the input set.
    """

    n: int
    cost: float
    intervals: tuple[IntegerInterval, ...]
    method: str


def _check_shell(gauge: GaugeFn, n: int) -> None:
    min_shell = getattr(gauge, "min_shell", 0)
    if n < min_shell:
        raise GaugeDomainError(
            f"{gauge.label} gauge needs shell n >= {min_shell}, got n = {n}"
        )


# the sqrt-log gauge is only usable from shell 2 up (lengths must stay <= 1/2)
SqrtLogGauge.min_shell = 2
PowerGauge.min_shell = 0


# ---------------------------------------------------------------------------
# partition DP over runs (shared by nu_exact and nu_coarse)

def _suffix_dp(m: int, row_fn: Callable[[int], np.ndarray]):
    """Minimize sum of group costs over partitions of runs into consecutive groups.

    ``row_fn(i)`` returns the (m - i, K) matrix of costs of the group starting
    at run i and ending at run j, for j = i .. m-1 and K gauges.  Returns
    (suf, cnt): suf[i] is the optimal cost of covering runs i.., cnt[i] the
    fewest groups among optimal covers.  Reconstruction re-calls ``row_fn``,
    which must be deterministic so float equalities hold exactly.
    """
    probe = row_fn(m - 1)
    K = probe.shape[1]
    suf = np.zeros((m + 1, K))
    cnt = np.zeros((m + 1, K), dtype=np.int64)
    huge = np.iinfo(np.int64).max
    for i in range(m - 1, -1, -1):
        rows = probe if i == m - 1 else row_fn(i)
        totals = rows + suf[i + 1:]
        suf[i] = totals.min(axis=0)
        at_min = totals == suf[i]
        cnt[i] = 1 + np.where(at_min, cnt[i + 1:], huge).min(axis=0)
    return suf, cnt


def _reconstruct(m: int, row_fn, suf, cnt, k: int) -> list[tuple[int, int]]:
    """Group boundaries (i, j) of the optimal cover for gauge column k."""
    groups = []
    i = 0
    while i < m:
        rows = row_fn(i)[:, k]
        totals = rows + suf[i + 1:, k]
        # smallest j keeps the first interval shortest: lexicographic minimum
        for off in range(m - i):
            if totals[off] == suf[i, k] and 1 + cnt[i + 1 + off, k] == cnt[i, k]:
                groups.append((i, i + off))
                i += off + 1
                break
        else:  # pragma: no cover - DP guarantees a match
            raise AssertionError("no consistent group found")
    return groups


class _ExactRows:
    """Group costs for nu_exact: gauge of the hull span, with the full-shell
    alternative when the gauge is not monotone."""

    def __init__(self, los, his, n, gauges):
        self.los, self.his, self.gauges = los, his, gauges
        self.scale = 0.5 ** n
        lo, hi = shell_span(n)
        self.shell_arg = (hi - lo) * self.scale

    def __call__(self, i: int) -> np.ndarray:
        spans = (self.his[i:] - self.los[i]) * self.scale
        cols = []
        for g in self.gauges:
            vals = np.atleast_1d(g(spans))
            if not g.monotone:
                vals = np.minimum(vals, g(self.shell_arg))
            cols.append(vals)
        return np.stack(cols, axis=1)

    def padded(self, g, i, j) -> bool:
        """True when the group (i, j) is cheaper under a full-shell interval."""
        if g.monotone:
            return False
        span = (self.his[j] - self.los[i]) * self.scale
        return g(self.shell_arg) < g(span)


class _CoarseRows:
    """Group costs for nu_coarse: lengths rounded up to multiples of n^2."""

    def __init__(self, los, his, n, gauges):
        self.los, self.his, self.gauges = los, his, gauges
        self.scale = 0.5 ** n
        self.quantum = n * n
        lo, hi = shell_span(n)
        # largest in-shell block length, for the non-monotone alternative
        self.max_block = ((hi - lo) // self.quantum) * self.quantum

    def _lengths(self, i):
        spans = self.his[i:] - self.los[i]
        return -(spans // -self.quantum) * self.quantum

    def __call__(self, i: int) -> np.ndarray:
        lengths = self._lengths(i)
        cols = []
        for g in self.gauges:
            vals = np.atleast_1d(g(lengths * self.scale))
            if not g.monotone and self.max_block > 0:
                alt = np.atleast_1d(g(np.maximum(lengths, self.max_block) * self.scale))
                vals = np.minimum(vals, alt)
            cols.append(vals)
        return np.stack(cols, axis=1)

    def block_length(self, g, i, j) -> int:
        length = int(self._lengths(i)[j - i])
        if not g.monotone and self.max_block > length:
            if g(self.max_block * self.scale) < g(length * self.scale):
                return self.max_block
        return length


def _dp_result(s: ShellSet, gauge: GaugeFn, rows_cls, method: str) -> CoveringResult:
    if not s.runs:
        return CoveringResult(s.n, 0.0, (), method)
    los, his = s.run_bounds()
    rows = rows_cls(los, his, s.n, [gauge])
    suf, cnt = _suffix_dp(len(los), rows)
    groups = _reconstruct(len(los), rows, suf, cnt, 0)
    slo, shi = shell_span(s.n)
    intervals = []
    for i, j in groups:
        if isinstance(rows, _CoarseRows):
            length = rows.block_length(gauge, i, j)
            intervals.append(IntegerInterval(int(los[i]), int(los[i]) + length))
        elif rows.padded(gauge, i, j):
            intervals.append(IntegerInterval(slo, shi))
        else:
            intervals.append(IntegerInterval(int(los[i]), int(his[j])))
    return CoveringResult(s.n, float(suf[0, 0]), tuple(intervals), method)


def nu_exact(s: ShellSet, gauge: GaugeFn) -> CoveringResult:
    """Optimal covering cost of one shell set, O(runs^2)."""
    _check_shell(gauge, s.n)
    return _dp_result(s, gauge, _ExactRows, "exact")


def nu_exact_costs(s: ShellSet, gauges: Sequence[GaugeFn]) -> np.ndarray:
    """Optimal covering costs for several gauges in one DP sweep (no witnesses)."""
    for g in gauges:
        _check_shell(g, s.n)
    if not s.runs:
        return np.zeros(len(gauges))
    los, his = s.run_bounds()
    rows = _ExactRows(los, his, s.n, list(gauges))
    suf, _ = _suffix_dp(len(los), rows)
    return suf[0].copy()


def nu_coarse(s: ShellSet, gauge: GaugeFn) -> CoveringResult:
    """Covering cost with interval lengths forced to multiples of n^2.

    Needs shell n >= 1.  A block may overrun the shell's right edge; it is
    priced by its full rounded length regardless.
    """
    if s.n < 1:
        raise ValueError("coarse covering needs shell n >= 1")
    _check_shell(gauge, s.n)
    return _dp_result(s, gauge, _CoarseRows, "coarse")


# ---------------------------------------------------------------------------
# brute force oracle

def nu_bruteforce(
    s: ShellSet,
    gauge: GaugeFn,
    max_width: int = 32,
    max_cells: int = 12,
) -> CoveringResult:
    """Exhaustive minimum over families of at most (#runs) intervals.

    Branch and bound: repeatedly pick the leftmost uncovered cell c and try
    every in-shell interval [a, b) with a <= c < b, pruning branches whose
    partial cost already meets the best known total.  Unlike the DP this
    makes no structural assumption about optimal covers, which is the point:
    it is the test oracle for :func:`nu_exact`.  Hard caps on shell width and
    cell count keep the search bounded.
    """
    _check_shell(gauge, s.n)
    slo, shi = shell_span(s.n)
    if shi - slo > max_width:
        raise CapacityError(f"shell width {shi - slo} exceeds cap {max_width}")
    cells = s.cells()
    if cells.size > max_cells:
        raise CapacityError(f"{cells.size} occupied cells exceed cap {max_cells}")
    if cells.size == 0:
        return CoveringResult(s.n, 0.0, (), "bruteforce")

    scale = 0.5 ** s.n
    max_intervals = s.num_runs
    cells_list = [int(c) for c in cells]
    best_cost = np.inf
    best_cover: tuple[tuple[int, int], ...] = ()

    def search(next_idx: int, used: int, cost: float, chosen: list[tuple[int, int]]):
        nonlocal best_cost, best_cover
        if next_idx >= len(cells_list):
            if cost < best_cost:
                best_cost = cost
                best_cover = tuple(chosen)
            return
        if used >= max_intervals:
            return
        c = cells_list[next_idx]
        for a in range(c, slo - 1, -1):
            for b in range(c + 1, shi + 1):
                new_cost = cost + gauge((b - a) * scale)
                if new_cost >= best_cost:
                    continue
                idx = next_idx
                while idx < len(cells_list) and cells_list[idx] < b:
                    idx += 1
                chosen.append((a, b))
                search(idx, used + 1, new_cost, chosen)
                chosen.pop()

    search(0, 0, 0.0, [])
    intervals = tuple(IntegerInterval(a, b) for a, b in sorted(best_cover))
    return CoveringResult(s.n, float(best_cost), intervals, "bruteforce")


# ---------------------------------------------------------------------------
# dyadic covers

def _floor_pow2(x: np.ndarray) -> np.ndarray:
    """Largest power of two <= x, elementwise, for 1 <= x < 2^50."""
    exp = np.floor(np.log2(x)).astype(np.int64)
    return np.left_shift(np.int64(1), exp)


class _DyadicTree:
    """Per-level structure of the dyadic subdivision restricted to a run set.

    Fully occupied maximal dyadic blocks enter the tree at their own level;
    all other tracked nodes are ancestors of entered blocks.  The structure
    is gauge independent, so one build serves many gauge evaluations.
    """

    def __init__(self, s: ShellSet):
        n = s.n
        slo, shi = shell_span(n)
        self.n = n
        self.top = max(n - 1, 0)  # root level: width 2^(n-1) (width 1 for n <= 1)
        los, his = s.run_bounds()
        los = los.copy()

        entered = [[] for _ in range(self.top + 1)]
        # canonical decomposition of every run, all runs advanced in lockstep
        while True:
            active = los < his
            if not active.any():
                break
            a_lo = los[active]
            a_hi = his[active]
            step = a_lo & -a_lo if slo > 0 else np.maximum(a_lo & -a_lo, 1)
            # shell 0 starts at 0, where lo & -lo degenerates; width is 1 there
            if slo == 0:
                step = np.where(a_lo == 0, 1, step)
            blk = np.minimum(step, _floor_pow2(a_hi - a_lo))
            lev = np.log2(blk).astype(np.int64)
            for ell in np.unique(lev):
                sel = lev == ell
                entered[ell].append(a_lo[sel] >> ell)
            res = los[active]
            res += blk
            los[active] = res

        # upward merge: per level, sorted node ids = entered blocks + parents
        # of the previous level's nodes (the two kinds never collide)
        self.levels = []
        prev_idx = None
        for ell in range(self.top + 1):
            ent = (
                np.unique(np.concatenate(entered[ell]))
                if entered[ell]
                else np.empty(0, dtype=np.int64)
            )
            if prev_idx is None or prev_idx.size == 0:
                par = np.empty(0, dtype=np.int64)
                seg_starts = np.empty(0, dtype=np.int64)
            else:
                parents = prev_idx >> 1
                seg_starts = np.flatnonzero(
                    np.r_[True, parents[1:] != parents[:-1]]
                )
                par = parents[seg_starts]
            idx = np.concatenate([ent, par])
            order = np.argsort(idx, kind="stable")
            is_entered = np.concatenate(
                [np.ones(ent.size, dtype=bool), np.zeros(par.size, dtype=bool)]
            )[order]
            # position of each parent (in combined order) and its child segment
            par_pos = np.flatnonzero(~is_entered)
            self.levels.append(
                {
                    "idx": idx[order],
                    "is_entered": is_entered,
                    "par_pos": par_pos,
                    "seg_starts": seg_starts,
                }
            )
            prev_idx = idx[order]

    def costs(self, gauges: Sequence[GaugeFn], keep_flags: bool = False):
        """Total dyadic covering cost per gauge; optionally keep merge flags."""
        scale = 0.5 ** self.n
        K = len(gauges)
        flags = [] if keep_flags else None
        prev = None
        for ell, level in enumerate(self.levels):
            g_here = np.array([g((1 << ell) * scale) for g in gauges])
            vals = np.empty((level["idx"].size, K))
            vals[level["is_entered"]] = g_here
            if level["par_pos"].size:
                sums = np.add.reduceat(prev, level["seg_starts"], axis=0)
                merged = g_here <= sums
                vals[level["par_pos"]] = np.where(merged, g_here, sums)
                if keep_flags:
                    flags.append(merged)
            elif keep_flags:
                flags.append(np.empty((0, K), dtype=bool))
            prev = vals
        total = prev.sum(axis=0)
        return (total, flags) if keep_flags else total

    def witness(self, gauge: GaugeFn) -> list[IntegerInterval]:
        _, flags = self.costs([gauge], keep_flags=True)
        out = []
        top = len(self.levels) - 1

        def emit(ell: int, pos: int):
            level = self.levels[ell]
            if level["is_entered"][pos]:
                idx = int(level["idx"][pos])
                out.append(IntegerInterval(idx << ell, (idx + 1) << ell))
                return
            k = int(np.searchsorted(level["par_pos"], pos))
            if flags[ell][k, 0]:
                idx = int(level["idx"][pos])
                out.append(IntegerInterval(idx << ell, (idx + 1) << ell))
                return
            starts = level["seg_starts"]
            prev_size = self.levels[ell - 1]["idx"].size
            lo = int(starts[k])
            hi = int(starts[k + 1]) if k + 1 < starts.size else prev_size
            for child_pos in range(lo, hi):
                emit(ell - 1, child_pos)

        for pos in range(self.levels[top]["idx"].size):
            emit(top, pos)
        return out


def nu_dyadic(s: ShellSet, gauge: GaugeFn) -> CoveringResult:
    """Covering cost restricted to shell-aligned dyadic intervals.

    Runs in O(runs * n) and streams level by level, so it is the method of
    choice for large shells.  For a power gauge the result is sandwiched:
    nu_exact <= nu_dyadic <= 2^(1+rho) * nu_exact.
    """
    _check_shell(gauge, s.n)
    if not s.runs:
        return CoveringResult(s.n, 0.0, (), "dyadic")
    tree = _DyadicTree(s)
    total = tree.costs([gauge])
    intervals = tuple(tree.witness(gauge))
    return CoveringResult(s.n, float(total[0]), intervals, "dyadic")


def nu_dyadic_costs(s: ShellSet, gauges: Sequence[GaugeFn]) -> np.ndarray:
    """Dyadic covering costs for several gauges sharing one tree build."""
    for g in gauges:
        _check_shell(g, s.n)
    if not s.runs:
        return np.zeros(len(gauges))
    return _DyadicTree(s).costs(list(gauges)).astype(float)
