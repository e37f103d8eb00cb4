"""Covering costs: exact DP against the brute-force oracle, dyadic and
coarse variants, witness validity, and the monotonicity properties."""

import numpy as np
import pytest

from macrodim.covering import (
    CoveringResult,
    nu_bruteforce,
    nu_coarse,
    nu_dyadic,
    nu_dyadic_costs,
    nu_exact,
    nu_exact_costs,
)
from macrodim.errors import CapacityError, GaugeDomainError
from macrodim.gauges import PowerGauge, SqrtLogGauge
from macrodim.lattice import ShellSet, shell_span


def random_small_set(rng, n, max_cells) -> ShellSet:
    lo, hi = shell_span(n)
    width = hi - lo
    count = int(rng.integers(1, min(max_cells, width) + 1))
    cells = rng.choice(np.arange(lo, hi), size=count, replace=False)
    return ShellSet.from_cells(n, cells)


def witness_cost(res: CoveringResult, gauge) -> float:
    return sum(gauge(iv.length * 0.5**res.n) for iv in res.intervals)


def covers(res: CoveringResult, s: ShellSet) -> bool:
    covered = set()
    for iv in res.intervals:
        covered.update(range(iv.lo, iv.hi))
    return set(s.cells().tolist()) <= covered


# ---------------------------------------------------------------------------
# frozen examples

def test_exact_full_shell():
    s = ShellSet.from_runs(4, [(8, 16)])
    res = nu_exact(s, PowerGauge(0.5))
    assert res.cost == pytest.approx(2.0**-0.5, abs=1e-15)
    assert [iv.as_tuple() for iv in res.intervals] == [(8, 16)]
    assert res.method == "exact"


def test_exact_two_far_cells():
    # two unit intervals beat the hull: 2 * (1/16)^0.5 = 0.5 < (8/16)^0.5
    s = ShellSet.from_cells(4, [8, 15])
    res = nu_exact(s, PowerGauge(0.5))
    assert res.cost == pytest.approx(0.5, abs=1e-15)
    assert [iv.as_tuple() for iv in res.intervals] == [(8, 9), (15, 16)]


def test_exact_single_run():
    s = ShellSet.from_runs(4, [(8, 11)])
    res = nu_exact(s, PowerGauge(0.5))
    assert res.cost == pytest.approx(0.4330127018922193, abs=1e-15)
    assert [iv.as_tuple() for iv in res.intervals] == [(8, 11)]


def test_exact_empty_set():
    res = nu_exact(ShellSet.empty(4), PowerGauge(0.5))
    assert res.cost == 0.0
    assert res.intervals == ()


def test_exact_tie_prefers_fewer_intervals():
    # cells {8, 11}: hull (4/16)^0.5 = 0.5 exactly ties two units at 0.5
    s = ShellSet.from_cells(4, [8, 11])
    res = nu_exact(s, PowerGauge(0.5))
    assert res.cost == pytest.approx(0.5, abs=1e-15)
    assert [iv.as_tuple() for iv in res.intervals] == [(8, 12)]


def test_bruteforce_single_cell():
    s = ShellSet.from_cells(3, [4])
    res = nu_bruteforce(s, PowerGauge(0.7))
    assert res.cost == pytest.approx((1.0 / 8.0) ** 0.7, abs=1e-15)
    res2 = nu_bruteforce(ShellSet.from_cells(4, [8, 15]), PowerGauge(0.5))
    assert res2.cost == pytest.approx(0.5, abs=1e-15)


def test_bruteforce_caps():
    with pytest.raises(CapacityError):
        nu_bruteforce(ShellSet.from_cells(8, [200]), PowerGauge(0.5), max_width=32)
    wide = ShellSet.from_cells(5, list(range(16, 30)))
    with pytest.raises(CapacityError):
        nu_bruteforce(wide, PowerGauge(0.5), max_cells=12)


def test_sqrtlog_needs_shell_two():
    s = ShellSet.from_cells(1, [1])
    with pytest.raises(GaugeDomainError):
        nu_exact(s, SqrtLogGauge())
    with pytest.raises(GaugeDomainError):
        nu_dyadic(ShellSet.from_cells(0, [0]), SqrtLogGauge())


# ---------------------------------------------------------------------------
# oracle equality (the DP's structural assumptions versus free enumeration)

def test_exact_matches_bruteforce_power():
    rng = np.random.default_rng(10)
    rhos = [PowerGauge(0.3), PowerGauge(0.5), PowerGauge(0.8)]
    for _ in range(200):
        n = int(rng.integers(0, 7))
        s = random_small_set(rng, n, max_cells=12)
        for g in rhos:
            a = nu_exact(s, g)
            b = nu_bruteforce(s, g)
            assert abs(a.cost - b.cost) <= 1e-12, (n, s.runs, g.rho)
            assert covers(a, s)
            assert covers(b, s)
            assert witness_cost(a, g) == pytest.approx(a.cost, abs=1e-12)
            assert witness_cost(b, g) == pytest.approx(b.cost, abs=1e-12)


def test_exact_matches_bruteforce_sqrtlog():
    # exercises the full-shell padding alternative of the non-monotone gauge
    rng = np.random.default_rng(11)
    g = SqrtLogGauge()
    for _ in range(60):
        n = int(rng.integers(2, 6))
        s = random_small_set(rng, n, max_cells=10)
        a = nu_exact(s, g)
        b = nu_bruteforce(s, g)
        assert abs(a.cost - b.cost) <= 1e-12, (n, s.runs)
        assert covers(a, s)
        assert witness_cost(a, g) == pytest.approx(a.cost, abs=1e-12)


def test_hull_partition_never_beaten():
    # free families of up to 4 intervals on tiny sets cannot beat the DP
    rng = np.random.default_rng(12)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        s = random_small_set(rng, n, max_cells=4)
        for rho in (0.3, 0.6, 1.0):
            g = PowerGauge(rho)
            assert nu_bruteforce(s, g).cost >= nu_exact(s, g).cost - 1e-12


# ---------------------------------------------------------------------------
# dyadic covers

def test_dyadic_full_shell_matches_exact():
    s = ShellSet.from_runs(4, [(8, 16)])
    res = nu_dyadic(s, PowerGauge(0.5))
    assert res.cost == pytest.approx(2.0**-0.5, abs=1e-15)
    assert [iv.as_tuple() for iv in res.intervals] == [(8, 16)]


def test_dyadic_two_far_cells():
    res = nu_dyadic(ShellSet.from_cells(4, [8, 15]), PowerGauge(0.5))
    assert res.cost == pytest.approx(0.5, abs=1e-15)
    assert [iv.as_tuple() for iv in res.intervals] == [(8, 9), (15, 16)]


def test_dyadic_intervals_are_aligned_blocks():
    rng = np.random.default_rng(13)
    for _ in range(50):
        n = int(rng.integers(0, 11))
        s = random_small_set(rng, n, max_cells=30)
        res = nu_dyadic(s, PowerGauge(0.5))
        assert covers(res, s)
        for iv in res.intervals:
            length = iv.length
            assert length & (length - 1) == 0  # power of two
            assert iv.lo % length == 0         # aligned to its own size
        assert witness_cost(res, PowerGauge(0.5)) == pytest.approx(res.cost, abs=1e-12)


def test_dyadic_sandwich():
    # nu_exact <= nu_dyadic <= 2^(1+rho) nu_exact, zero violations
    rng = np.random.default_rng(14)
    for _ in range(500):
        n = int(rng.integers(0, 9))
        s = random_small_set(rng, n, max_cells=40)
        for rho in (0.3, 0.5, 0.8):
            g = PowerGauge(rho)
            ex = nu_exact(s, g).cost
            dy = nu_dyadic(s, g).cost
            assert ex <= dy + 1e-12
            assert dy <= 2.0 ** (1 + rho) * ex + 1e-12


def test_multi_gauge_costs_match_single():
    rng = np.random.default_rng(15)
    gauges = [PowerGauge(0.3), PowerGauge(0.5), PowerGauge(0.9)]
    for _ in range(30):
        n = int(rng.integers(0, 9))
        s = random_small_set(rng, n, max_cells=25)
        ex = nu_exact_costs(s, gauges)
        dy = nu_dyadic_costs(s, gauges)
        for k, g in enumerate(gauges):
            assert ex[k] == pytest.approx(nu_exact(s, g).cost, abs=1e-12)
            assert dy[k] == pytest.approx(nu_dyadic(s, g).cost, abs=1e-12)
    assert nu_exact_costs(ShellSet.empty(3), gauges).tolist() == [0.0, 0.0, 0.0]


def test_dyadic_streams_large_sparse_shell():
    # far beyond brute force reach: 2000 scattered cells in shell 24
    rng = np.random.default_rng(16)
    lo, hi = shell_span(24)
    cells = np.unique(rng.integers(lo, hi, size=2000))
    s = ShellSet.from_cells(24, cells)
    g = PowerGauge(0.5)
    res = nu_dyadic(s, g)
    assert covers(res, s)
    assert witness_cost(res, g) == pytest.approx(res.cost, rel=1e-12)
    # scattered singleton cells: cost near #cells * (1/2^24)^0.5
    assert res.cost <= s.num_cells * g(1.0 / 2.0**24) + 1e-9


# ---------------------------------------------------------------------------
# coarse covers

def test_coarse_single_cell_forced_block():
    # n = 4: blocks are multiples of 16, so one cell costs a full shell width
    s = ShellSet.from_cells(4, [8])
    res = nu_coarse(s, PowerGauge(0.5))
    assert res.cost == pytest.approx(1.0, abs=1e-15)
    assert res.intervals[0].length == 16


def test_coarse_full_shell_overruns_edge():
    # n = 10: span 512 rounds up to 600; the block may pass the shell edge
    s = ShellSet.from_runs(10, [shell_span(10)])
    res = nu_coarse(s, PowerGauge(0.5))
    assert res.cost == pytest.approx((600.0 / 1024.0) ** 0.5, abs=1e-15)
    iv = res.intervals[0]
    assert iv.length == 600
    assert iv.lo == 512


def test_coarse_dominates_exact():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        s = random_small_set(rng, n, max_cells=30)
        for rho in (0.3, 0.5, 1.0):
            g = PowerGauge(rho)
            assert nu_coarse(s, g).cost >= nu_exact(s, g).cost - 1e-12


def test_coarse_blocks_are_quantized():
    rng = np.random.default_rng(18)
    for _ in range(40):
        n = int(rng.integers(2, 9))
        s = random_small_set(rng, n, max_cells=20)
        res = nu_coarse(s, PowerGauge(0.5))
        assert covers(res, s)
        for iv in res.intervals:
            assert iv.length % (n * n) == 0


def test_coarse_rejects_shell_zero():
    with pytest.raises(ValueError):
        nu_coarse(ShellSet.from_cells(0, [0]), PowerGauge(0.5))


# ---------------------------------------------------------------------------
# monotonicity

def test_cost_monotone_in_cells():
    # adding occupied cells never lowers any covering cost
    rng = np.random.default_rng(19)
    for _ in range(60):
        n = int(rng.integers(1, 8))
        lo, hi = shell_span(n)
        base = random_small_set(rng, n, max_cells=10)
        extra = set(base.cells().tolist())
        extra.update(
            rng.choice(np.arange(lo, hi), size=min(3, hi - lo), replace=False).tolist()
        )
        bigger = ShellSet.from_cells(n, sorted(extra))
        for fn in (nu_exact, nu_dyadic):
            for rho in (0.4, 0.8):
                g = PowerGauge(rho)
                assert fn(bigger, g).cost >= fn(base, g).cost - 1e-12


def test_cost_monotone_in_rho():
    # every normalized length is <= 1/2 inside a shell, so raising rho
    # shrinks each summand and the optimal total
    rng = np.random.default_rng(20)
    rhos = np.linspace(0.2, 1.0, 5)
    for _ in range(40):
        n = int(rng.integers(1, 9))
        s = random_small_set(rng, n, max_cells=20)
        costs = [nu_exact(s, PowerGauge(r)).cost for r in rhos]
        assert np.all(np.diff(costs) <= 1e-12)
