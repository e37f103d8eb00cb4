"""Integer-resolution sets organized by dyadic shells.

A subset of the nonnegative reals is handled one shell at a time: shell n
spans [2^(n-1), 2^n) for n >= 1 and shell 0 is [0, 1).  Inside a shell the
set is stored as sorted, disjoint, maximal runs of occupied unit cells
[k, k+1), which keeps memory proportional to the number of runs rather than
the number of cells.

All types here are immutable; construct new values instead of mutating.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import OutOfShellError, SetFileError


def shell_span(n: int) -> tuple[int, int]:
    """Half-open integer span [lo, hi) of shell n."""
    if n < 0:
        raise ValueError(f"shell index must be nonnegative, got {n}")
    if n == 0:
        return 0, 1
    return 1 << (n - 1), 1 << n


@dataclass(frozen=True, order=True)
class IntegerInterval:
    """Half-open interval [lo, hi) with integer endpoints, lo < hi."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo >= self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi})")

    @property
    def length(self) -> int:
        return self.hi - self.lo

    def as_tuple(self) -> tuple[int, int]:
        return (self.lo, self.hi)


@dataclass(frozen=True)
class Shell:
    """Dyadic shell n, spanning [2^(n-1), 2^n) (shell 0 is [0, 1))."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"shell index must be nonnegative, got {self.n}")

    @property
    def span(self) -> tuple[int, int]:
        return shell_span(self.n)

    @property
    def width(self) -> int:
        lo, hi = self.span
        return hi - lo


@dataclass(frozen=True)
class ShellSet:
    """Occupied cells of one shell, as sorted maximal runs.

    Use :meth:`from_cells` or :meth:`from_runs`; the raw constructor does not
    validate.  Runs never touch (maximality) and lie inside the shell span.
    """

    shell: Shell
    runs: tuple[IntegerInterval, ...]

    @property
    def n(self) -> int:
        return self.shell.n

    @classmethod
    def empty(cls, n: int) -> "ShellSet":
        return cls(Shell(n), ())

    @classmethod
    def from_runs(cls, n: int, runs: Iterable[tuple[int, int]]) -> "ShellSet":
        lo, hi = shell_span(n)
        out = []
        prev_hi = None
        for run in runs:
            a, b = (run.lo, run.hi) if isinstance(run, IntegerInterval) else run
            if a >= b:
                raise ValueError(f"empty run [{a}, {b}) in shell {n}")
            if a < lo or b > hi:
                raise OutOfShellError(
                    f"run [{a}, {b}) outside shell {n} span [{lo}, {hi})"
                )
            if prev_hi is not None and a <= prev_hi:
                # a == prev_hi would mean two adjacent runs, i.e. not maximal
                raise ValueError(
                    f"runs must be sorted with gaps: [{a}, {b}) follows hi={prev_hi}"
                )
            out.append(IntegerInterval(a, b))
            prev_hi = b
        return cls(Shell(n), tuple(out))

    @classmethod
    def from_cells(cls, n: int, cells: Iterable[int]) -> "ShellSet":
        """Build from occupied cell indices, merging adjacent cells into runs."""
        arr = np.asarray(sorted(set(int(c) for c in cells)), dtype=np.int64)
        lo, hi = shell_span(n)
        if arr.size and (arr[0] < lo or arr[-1] >= hi):
            bad = arr[0] if arr[0] < lo else arr[-1]
            raise OutOfShellError(f"cell {bad} outside shell {n} span [{lo}, {hi})")
        runs = []
        if arr.size:
            breaks = np.flatnonzero(np.diff(arr) > 1)
            starts = np.concatenate(([0], breaks + 1))
            ends = np.concatenate((breaks, [arr.size - 1]))
            runs = [IntegerInterval(int(arr[s]), int(arr[e]) + 1) for s, e in zip(starts, ends)]
        return cls(Shell(n), tuple(runs))

    def cells(self) -> np.ndarray:
        """Occupied cell indices in increasing order."""
        if not self.runs:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([np.arange(r.lo, r.hi, dtype=np.int64) for r in self.runs])

    @property
    def num_cells(self) -> int:
        return sum(r.length for r in self.runs)

    @property
    def num_runs(self) -> int:
        return len(self.runs)

    def __bool__(self) -> bool:
        return bool(self.runs)

    def run_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Run endpoints as two int64 arrays (los, his)."""
        los = np.fromiter((r.lo for r in self.runs), dtype=np.int64, count=len(self.runs))
        his = np.fromiter((r.hi for r in self.runs), dtype=np.int64, count=len(self.runs))
        return los, his


@dataclass(frozen=True, eq=False)
class PixelSet:
    """Sorted distinct integers within distance 1 of a set."""

    cells: np.ndarray

    @property
    def count(self) -> int:
        return int(self.cells.size)


def pixelize(intervals: Iterable[tuple[float, float]]) -> PixelSet:
    """Integers within distance <= 1 of a union of real intervals.

    Each interval is an (a, b) pair with a <= b; a == b is a point.  Distance
    is the infimum, so both endpoints pick up one pixel of slack: [2.5, 3.2]
    yields {2, 3, 4} and the point {5} yields {4, 5, 6}.
    """
    ranges = []
    for a, b in intervals:
        if not (np.isfinite(a) and np.isfinite(b)) or a > b:
            raise ValueError(f"bad interval ({a}, {b})")
        ranges.append((int(np.ceil(a - 1.0)), int(np.floor(b + 1.0))))
    ranges.sort()
    pixels = []
    cur = None
    for lo, hi in ranges:  # inclusive integer ranges
        if cur is None:
            cur = [lo, hi]
        elif lo <= cur[1] + 1:
            cur[1] = max(cur[1], hi)
        else:
            pixels.append(cur)
            cur = [lo, hi]
    if cur is not None:
        pixels.append(cur)
    if not pixels:
        return PixelSet(np.empty(0, dtype=np.int64))
    return PixelSet(np.concatenate([np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in pixels]))


def lebesgue_measure(s: ShellSet) -> float:
    """Total length of the occupied cells of one shell."""
    return float(s.num_cells)


def _resolve_shells(sets) -> list[ShellSet]:
    """Normalize a sequence or {n: ShellSet} mapping into [shell 0 .. shell N]."""
    if isinstance(sets, Mapping):
        if not sets:
            raise ValueError("no shells given")
        top = max(sets)
        out = []
        for n in range(top + 1):
            if n not in sets:
                raise ValueError(f"shell {n} missing from input")
            out.append(sets[n])
    else:
        out = list(sets)
        if not out:
            raise ValueError("no shells given")
    for n, s in enumerate(out):
        if s.n != n:
            raise ValueError(f"expected shell {n} at position {n}, got shell {s.n}")
    return out


def pixel_count_prefix(sets: Sequence[ShellSet] | Mapping[int, ShellSet]) -> np.ndarray:
    """P_n = number of pixels of the set truncated to [0, 2^n], for each n.

    ``sets`` must cover every shell 0..N (empty shells included); a missing
    shell raises.  Returns an int64 array of length N + 1.
    """
    shells = _resolve_shells(sets)
    counts = np.empty(len(shells), dtype=np.int64)
    total = 0
    cur = None  # open inclusive pixel range [lo, hi]
    for n, s in enumerate(shells):
        for run in s.runs:
            plo, phi = run.lo - 1, run.hi + 1
            if cur is None:
                cur = [plo, phi]
            elif plo <= cur[1] + 1:
                cur[1] = max(cur[1], phi)
            else:
                total += cur[1] - cur[0] + 1
                cur = [plo, phi]
        counts[n] = total + (cur[1] - cur[0] + 1 if cur else 0)
    return counts


def lebesgue_prefix(sets: Sequence[ShellSet] | Mapping[int, ShellSet]) -> np.ndarray:
    """Measure of the set truncated to [0, 2^n], for each n."""
    shells = _resolve_shells(sets)
    per_shell = np.fromiter((s.num_cells for s in shells), dtype=np.int64, count=len(shells))
    return np.cumsum(per_shell)


# ---------------------------------------------------------------------------
# set files: one run per line, "n lo hi", '#' starts a comment

def load_set_file(path) -> dict[int, ShellSet]:
    """Read a set file into {n: ShellSet}.

    Lines hold three whitespace-separated integers ``n lo hi`` for a run
    [lo, hi) in shell n; blank lines and ``#`` comments are ignored.  Runs of
    the same shell may appear in any order but must not overlap or touch.
    """
    per_shell: dict[int, list[tuple[int, int]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise SetFileError(
                    f"expected 'n lo hi', got {line!r}", line_no=line_no
                )
            try:
                n, lo, hi = (int(p) for p in parts)
            except ValueError:
                raise SetFileError(
                    f"non-integer field in {line!r}", line_no=line_no
                ) from None
            if n < 0:
                raise SetFileError(f"negative shell index {n}", line_no=line_no)
            if lo >= hi:
                raise SetFileError(f"empty run [{lo}, {hi})", line_no=line_no)
            slo, shi = shell_span(n)
            if lo < slo or hi > shi:
                raise SetFileError(
                    f"run [{lo}, {hi}) outside shell {n} span [{slo}, {shi})",
                    line_no=line_no,
                )
            per_shell.setdefault(n, []).append((lo, hi))
    out = {}
    for n, runs in per_shell.items():
        runs.sort()
        try:
            out[n] = ShellSet.from_runs(n, runs)
        except ValueError as exc:
            raise SetFileError(f"shell {n}: {exc}") from None
    return out


def save_set_file(path, sets: Mapping[int, ShellSet] | Iterable[ShellSet]) -> None:
    """Write shells in the text format read by :func:`load_set_file`."""
    if isinstance(sets, Mapping):
        shells = [sets[n] for n in sorted(sets)]
    else:
        shells = sorted(sets, key=lambda s: s.n)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# shell runs: n lo hi  (run [lo, hi) of shell n)\n")
        for s in shells:
            for run in s.runs:
                fh.write(f"{s.n} {run.lo} {run.hi}\n")
