"""Shell-set storage, pixelization, and the set-file format."""

import numpy as np
import pytest

from macrodim.errors import OutOfShellError, SetFileError
from macrodim.lattice import (
    IntegerInterval,
    Shell,
    ShellSet,
    lebesgue_measure,
    lebesgue_prefix,
    load_set_file,
    pixel_count_prefix,
    pixelize,
    save_set_file,
    shell_span,
)


def random_shell_set(rng, n, p=0.3) -> ShellSet:
    lo, hi = shell_span(n)
    cells = [k for k in range(lo, hi) if rng.random() < p]
    return ShellSet.from_cells(n, cells)


# ---------------------------------------------------------------------------
# spans and intervals

def test_shell_span_values():
    assert shell_span(0) == (0, 1)
    assert shell_span(1) == (1, 2)
    assert shell_span(2) == (2, 4)
    assert shell_span(10) == (512, 1024)


def test_shell_span_rejects_negative():
    with pytest.raises(ValueError):
        shell_span(-1)


def test_interval_validation_and_length():
    iv = IntegerInterval(3, 7)
    assert iv.length == 4
    assert iv.as_tuple() == (3, 7)
    with pytest.raises(ValueError):
        IntegerInterval(5, 5)
    with pytest.raises(ValueError):
        IntegerInterval(6, 2)


def test_shell_width():
    assert Shell(0).width == 1
    assert Shell(5).width == 16


# ---------------------------------------------------------------------------
# ShellSet construction

def test_from_cells_merges_adjacent():
    s = ShellSet.from_cells(4, [8, 9, 10])
    assert [r.as_tuple() for r in s.runs] == [(8, 11)]


def test_from_cells_keeps_gaps():
    s = ShellSet.from_cells(4, [8, 15])
    assert [r.as_tuple() for r in s.runs] == [(8, 9), (15, 16)]
    assert s.num_cells == 2
    assert s.num_runs == 2


def test_from_cells_rejects_out_of_shell():
    with pytest.raises(OutOfShellError):
        ShellSet.from_cells(4, [16])
    with pytest.raises(OutOfShellError):
        ShellSet.from_cells(4, [7])


def test_from_cells_deduplicates_and_sorts():
    s = ShellSet.from_cells(3, [6, 4, 6, 5])
    assert [r.as_tuple() for r in s.runs] == [(4, 7)]


def test_from_runs_rejects_touching_and_unsorted():
    with pytest.raises(ValueError):
        ShellSet.from_runs(4, [(8, 10), (10, 12)])  # adjacent, not maximal
    with pytest.raises(ValueError):
        ShellSet.from_runs(4, [(12, 14), (8, 10)])
    with pytest.raises(ValueError):
        ShellSet.from_runs(4, [(9, 9)])
    with pytest.raises(OutOfShellError):
        ShellSet.from_runs(4, [(6, 9)])


def test_from_runs_accepts_interval_objects():
    s = ShellSet.from_runs(4, [IntegerInterval(8, 10), (12, 13)])
    assert s.num_cells == 3


def test_empty_set_is_falsy():
    s = ShellSet.empty(6)
    assert not s
    assert s.num_cells == 0
    assert s.cells().size == 0
    assert lebesgue_measure(s) == 0.0


def test_cells_round_trip_identity():
    # from_cells after enumerating cells reproduces the set exactly
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(0, 13))
        s = random_shell_set(rng, n, p=float(rng.uniform(0.05, 0.9)))
        again = ShellSet.from_cells(n, s.cells())
        assert again.runs == s.runs


def test_run_bounds_arrays():
    s = ShellSet.from_runs(5, [(16, 18), (20, 24), (30, 31)])
    los, his = s.run_bounds()
    assert los.tolist() == [16, 20, 30]
    assert his.tolist() == [18, 24, 31]


# ---------------------------------------------------------------------------
# pixelization

def test_pixelize_examples():
    assert pixelize([]).count == 0
    assert pixelize([(2.5, 3.2)]).cells.tolist() == [2, 3, 4]
    assert pixelize([(5.0, 5.0)]).cells.tolist() == [4, 5, 6]


def test_pixelize_merges_overlapping_ranges():
    # [0,1] covers -1..2 and the point 3 covers 2..4: one contiguous block
    p = pixelize([(0.0, 1.0), (3.0, 3.0)])
    assert p.cells.tolist() == [-1, 0, 1, 2, 3, 4]


def test_pixelize_rejects_bad_intervals():
    with pytest.raises(ValueError):
        pixelize([(2.0, 1.0)])
    with pytest.raises(ValueError):
        pixelize([(0.0, float("inf"))])


def test_pixelize_monotone_under_inclusion():
    # adding intervals can only add pixels
    rng = np.random.default_rng(1)
    for _ in range(100):
        base = [
            tuple(sorted(rng.uniform(-50, 50, size=2))) for _ in range(rng.integers(1, 6))
        ]
        extra = base + [
            tuple(sorted(rng.uniform(-50, 50, size=2))) for _ in range(rng.integers(1, 4))
        ]
        small = set(pixelize(base).cells.tolist())
        large = set(pixelize(extra).cells.tolist())
        assert small <= large


def test_pixels_dominate_lebesgue():
    # per-shell: pixel count of the occupied extent >= floor of the measure
    rng = np.random.default_rng(2)
    for n in range(13):
        for _ in range(80):
            s = random_shell_set(rng, n, p=float(rng.uniform(0.05, 0.95)))
            if not s.runs:
                continue
            pix = pixelize([r.as_tuple() for r in s.runs])
            assert pix.count >= int(np.floor(lebesgue_measure(s)))


# ---------------------------------------------------------------------------
# prefix series

def test_lebesgue_examples():
    assert lebesgue_measure(ShellSet.from_runs(4, [(8, 9), (15, 16)])) == 2.0
    assert lebesgue_measure(ShellSet.from_runs(4, [(8, 16)])) == 8.0


def test_pixel_prefix_empty():
    sets = [ShellSet.empty(n) for n in range(6)]
    assert pixel_count_prefix(sets).tolist() == [0] * 6


def test_pixel_prefix_single_cell():
    sets = [ShellSet.empty(n) for n in range(5)]
    sets[4] = ShellSet.from_cells(4, [8])
    counts = pixel_count_prefix(sets)
    # cell [8, 9): integers 7..10 are within distance 1
    assert counts.tolist() == [0, 0, 0, 0, 4]


def test_pixel_prefix_full_line():
    # full prefix [0, 2^n): every integer from -1 to 2^n + 1 is within
    # distance 1 of the occupied extent (the right edge is an infimum)
    n_top = 6
    sets = [ShellSet.from_runs(n, [shell_span(n)]) for n in range(n_top + 1)]
    counts = pixel_count_prefix(sets)
    for n in range(n_top + 1):
        assert counts[n] == 2**n + 3


def test_pixel_prefix_merges_across_shells():
    # runs [7,8) and [8,9) sit in different shells but share pixels
    sets = [ShellSet.empty(n) for n in range(5)]
    sets[3] = ShellSet.from_cells(3, [7])
    sets[4] = ShellSet.from_cells(4, [8])
    counts = pixel_count_prefix(sets)
    assert counts.tolist() == [0, 0, 0, 4, 5]  # 6..9 then 6..10


def test_pixel_prefix_matches_pixelize_oracle():
    # independent route: pixelize every run with shell <= n as a real interval
    rng = np.random.default_rng(3)
    for _ in range(100):
        n_top = int(rng.integers(1, 9))
        sets = {n: random_shell_set(rng, n, p=float(rng.uniform(0.1, 0.7)))
                for n in range(n_top + 1)}
        counts = pixel_count_prefix(sets)
        for n in range(n_top + 1):
            intervals = [
                r.as_tuple() for m in range(n + 1) for r in sets[m].runs
            ]
            assert counts[n] == pixelize(intervals).count
        assert np.all(np.diff(counts) >= 0)


def test_pixel_prefix_missing_shell():
    with pytest.raises(ValueError, match="shell 1"):
        pixel_count_prefix({0: ShellSet.empty(0), 2: ShellSet.empty(2)})


def test_pixel_prefix_rejects_misplaced():
    with pytest.raises(ValueError):
        pixel_count_prefix([ShellSet.empty(0), ShellSet.empty(2)])


def test_lebesgue_prefix_cumulative():
    rng = np.random.default_rng(4)
    sets = {n: random_shell_set(rng, n) for n in range(8)}
    leb = lebesgue_prefix(sets)
    direct = np.cumsum([sets[n].num_cells for n in range(8)])
    assert np.array_equal(leb, direct)


# ---------------------------------------------------------------------------
# set files

def test_set_file_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    sets = {n: random_shell_set(rng, n) for n in range(7)}
    sets = {n: s for n, s in sets.items() if s.runs}
    path = tmp_path / "sets.txt"
    save_set_file(path, sets)
    loaded = load_set_file(path)
    assert sorted(loaded) == sorted(sets)
    for n in sets:
        assert loaded[n].runs == sets[n].runs


def test_set_file_parses_comments_and_order(tmp_path):
    path = tmp_path / "sets.txt"
    path.write_text("# header\n4 12 14  # trailing comment\n\n4 8 9\n")
    loaded = load_set_file(path)
    assert [r.as_tuple() for r in loaded[4].runs] == [(8, 9), (12, 14)]


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("4 8", "expected"),
        ("4 8 9 10", "expected"),
        ("4 a 9", "non-integer"),
        ("-1 0 1", "negative shell"),
        ("4 9 9", "empty run"),
        ("4 6 9", "outside shell"),
    ],
)
def test_set_file_bad_lines(tmp_path, line, fragment):
    path = tmp_path / "sets.txt"
    path.write_text("# ok\n" + line + "\n")
    with pytest.raises(SetFileError, match=fragment) as err:
        load_set_file(path)
    assert "line 2" in str(err.value)


def test_set_file_rejects_overlap(tmp_path):
    path = tmp_path / "sets.txt"
    path.write_text("4 8 10\n4 9 11\n")
    with pytest.raises(SetFileError):
        load_set_file(path)
