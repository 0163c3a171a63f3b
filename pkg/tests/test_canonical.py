import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import balanced_cover, filter_ids
from sdrange.bench import random_ids
from sdrange.canonical import (
    F2Count,
    FixedM,
    GridRect,
    Interval1D,
    PrefixGrid,
    RangeTree1D,
    RangeTree2D,
    Rect2D,
    SegmentTree,
    StabPoint,
    StrataCount,
    Variable,
    attach_sketches,
    build_structure,
    contains,
    format_range,
    parse_range,
)
from sdrange.canonical.base import Dataset
from sdrange.errors import DataError
from sdrange.hashing import ceil_log2
from sdrange.ibf import Ibf
from sdrange.sketches import f2_build, level_config, strata_build


def net_coverage(st, q):
    net = np.zeros(len(st.dataset), dtype=np.int64)
    for sid, sign in st.decompose(q).terms:
        np.add.at(net, st.set_members(sid), sign)
    return net


def points1d(xs, ids=None):
    ids = np.arange(100, 100 + len(xs)) if ids is None else ids
    return Dataset("P", ids, np.array(xs).reshape(-1, 1), "points1d")


# 1D range tree

def test_tree1d_eight_points():
    st = RangeTree1D(points1d(range(1, 9)))
    d = st.decompose(Interval1D(3, 6))
    spans = sorted((int(st.set_start[s]), int(st.set_stop[s])) for s, _ in d.terms)
    assert spans == balanced_cover(2, 6, 8) == [(2, 4), (4, 6)]
    assert sorted(st.dataset.coords[np.concatenate([st.set_members(s) for s, _ in d.terms]), 0]) == [3, 4, 5, 6]
    assert st.decompose(Interval1D(0, 100)).terms == [(0, 1)]
    assert st.decompose(Interval1D(20, 30)).terms == []


def test_tree1d_ties_are_deterministic():
    ds = points1d([5, 5, 5, 1], ids=np.array([9, 3, 7, 1]))
    st = RangeTree1D(ds)
    assert ds.ids[st.members].tolist() == [1, 3, 7, 9]


def test_tree1d_random_against_oracle(rng):
    n = 300
    xs = rng.integers(0, 1000, n)
    st = RangeTree1D(points1d(xs))
    order_keys = np.sort(xs)
    for _ in range(100):
        a, b = sorted(rng.integers(-10, 1010, 2).tolist())
        q = Interval1D(a, b)
        assert np.array_equal(net_coverage(st, q), contains(q, st.dataset).astype(int))
        terms = st.decompose(q).terms
        assert len(terms) <= 2 * ceil_log2(n)
        lo, hi = np.searchsorted(order_keys, a), np.searchsorted(order_keys, b, side="right")
        assert len(terms) == len(balanced_cover(lo, hi, n))


# 2D range tree

def test_tree2d_single_point():
    st = RangeTree2D(Dataset("P", [1], [[4, 4]], "points2d"))
    assert len(st.decompose(Rect2D(0, 10, 0, 10)).terms) == 1


def test_tree2d_random_against_naive(rng):
    n = 256
    ds = Dataset("P", random_ids(rng, n), rng.integers(0, 100, (n, 2)), "points2d")
    st = RangeTree2D(ds)
    for _ in range(200):
        x0, x1 = sorted(rng.integers(-5, 105, 2).tolist())
        y0, y1 = sorted(rng.integers(-5, 105, 2).tolist())
        q = Rect2D(x0, x1, y0, y1)
        got = np.concatenate([st.set_elements(s) for s, _ in st.decompose(q).terms] or [np.empty(0, np.uint64)])
        assert len(got) == len(set(got.tolist()))  # disjoint
        assert sorted(got.tolist()) == sorted(filter_ids(ds.ids, ds.coords, q))


def test_tree2d_term_bound(rng):
    n = 4096
    ds = Dataset("P", random_ids(rng, n), rng.integers(0, 1 << 20, (n, 2)), "points2d")
    st = RangeTree2D(ds)
    worst = 0
    for _ in range(100):
        x0, x1 = sorted(rng.integers(0, 1 << 20, 2).tolist())
        y0, y1 = sorted(rng.integers(0, 1 << 20, 2).tolist())
        worst = max(worst, len(st.decompose(Rect2D(x0, x1, y0, y1))))
    assert worst <= 4 * ceil_log2(n) ** 2


# segment tree

def segs(pairs):
    return Dataset("S", np.arange(1, len(pairs) + 1), np.array(pairs), "segments")


def test_segment_examples():
    st = SegmentTree(segs([(1, 5), (3, 9)]))

    def stab(x):
        return sorted(int(v) for s, _ in st.decompose(StabPoint(x)).terms for v in st.set_elements(s))

    assert stab(4) == [1, 2]
    assert stab(7) == [2]
    assert stab(5) == [1, 2] and stab(9) == [2]  # endpoints count as inside
    assert stab(0) == [] and stab(10) == []


def test_segment_random(rng):
    n = 200
    lo = rng.integers(0, 500, n)
    ds = segs(np.stack([lo, lo + rng.integers(0, 80, n)], 1))
    st = SegmentTree(ds)
    for x in range(-3, 600, 7):
        q = StabPoint(x)
        assert np.array_equal(net_coverage(st, q), contains(q, ds).astype(int))
        assert len(st.decompose(q)) <= ceil_log2(st.leaf_count) + 1


def test_segment_storage_is_logarithmic(rng):
    n = 512
    lo = rng.integers(0, 10_000, n)
    st = SegmentTree(segs(np.stack([lo, lo + rng.integers(0, 3000, n)], 1)))
    per_segment = np.bincount(st.members, minlength=n)
    assert per_segment.max() <= 2 * ceil_log2(st.leaf_count)


# prefix grids

def grid2(cells):
    return Dataset("G", np.arange(1, len(cells) + 1), np.array(cells), "grid2d")


def test_prefix_full_and_single_cell():
    g = PrefixGrid(grid2([(1, 1), (1, 2), (2, 1), (2, 2)]), (2, 2))
    assert g.decompose(GridRect((1, 1), (2, 2))).terms == [(g.set_id((2, 2)), 1)]
    terms = g.decompose(GridRect((2, 2), (2, 2))).terms
    assert terms == [(g.set_id((2, 2)), 1), (g.set_id((1, 2)), -1), (g.set_id((2, 1)), -1), (g.set_id((1, 1)), 1)]


def test_prefix_exhaustive_8x8(rng):
    cells = rng.integers(1, 9, (150, 2))
    g = PrefixGrid(grid2(cells), (8, 8))
    for i in range(1, 9):
        for j in range(1, 9):
            for k in range(i, 9):
                for l in range(j, 9):
                    q = GridRect((i, j), (k, l))
                    assert len(g.decompose(q)) <= 4
                    assert np.array_equal(net_coverage(g, q), contains(q, g.dataset).astype(int))


def test_prefix_1d():
    ds = Dataset("G", np.arange(1, 21), np.arange(1, 21) % 10 + 1, "grid1d")
    g = PrefixGrid(ds, (10,))
    for i in range(1, 11):
        for k in range(i, 11):
            q = GridRect((i,), (k,))
            assert len(g.decompose(q)) <= 2
            assert np.array_equal(net_coverage(g, q), contains(q, ds).astype(int))


def test_prefix_bounds():
    with pytest.raises(ValueError):
        PrefixGrid(grid2([(3, 1)]), (2, 2))
    g = PrefixGrid(grid2([(1, 1)]), (2, 2))
    with pytest.raises(ValueError):
        g.decompose(GridRect((1, 1), (3, 1)))


# attaching sketches

def test_attach_fixed_every_node():
    st = RangeTree1D(points1d(range(64)))
    ix = attach_sketches(st, FixedM(8, 0.05), 3)
    assert st.set_count == 127
    for sid in range(st.set_count):
        s = ix.sketch(sid)
        assert s.capacity == 8 and s.ibf.cfg.table_size == 2 * s.ibf.cfg.k * 8
        assert s.ibf == Ibf.from_elements(st.set_elements(sid), s.ibf.cfg)


def test_attach_variable_ladder():
    st = RangeTree1D(points1d(range(128)))
    ix = attach_sketches(st, Variable(0.05), 3)
    sizes = st.set_sizes()
    sid = int(np.flatnonzero(sizes == 128)[0])
    assert sorted(ix.sketch(sid).levels) == [3, 4, 5, 6, 7]
    small = int(np.flatnonzero(sizes == 4)[0])
    assert sorted(ix.sketch(small).levels) == [3]
    assert all(b.row_of[small] < 0 for b in ix.banks.values())
    assert ix.banks[7].row_of[sid] < 0 and ix.banks[6].row_of[sid] >= 0
    lvl = ix.level_sketch(small, 6)
    mode = ix.mode
    assert lvl.ibf == Ibf.from_elements(st.set_elements(small), level_config(6, 0.05, 3, mode.j_min, mode.j_max))


def test_attach_deterministic(rng):
    ds = Dataset("P", random_ids(rng, 80), rng.integers(0, 50, (80, 2)), "points2d")
    for mode in (FixedM(8, 0.1), Variable(0.1), F2Count(0.5, 0.1), StrataCount(0.5, 0.1, 1 << 48)):
        a = attach_sketches(build_structure(ds, "tree2d"), mode, 11)
        b = attach_sketches(build_structure(ds, "tree2d"), mode, 11)
        for sid in range(0, a.structure.set_count, 17):
            assert a.sketch(sid) == b.sketch(sid)


def test_prefix_accumulation_equals_direct(rng):
    ds = grid2(rng.integers(1, 5, (40, 2)))
    g = PrefixGrid(ds, (4, 4))
    fixed = attach_sketches(g, FixedM(8, 0.1), 2)
    f2 = attach_sketches(g, F2Count(0.5, 0.1), 2)
    strata = attach_sketches(g, StrataCount(0.5, 0.1, 1 << 16), 2)
    for sid in range(g.set_count):
        el = g.set_elements(sid)
        assert fixed.sketch(sid).ibf == Ibf.from_elements(el, fixed.banks["ibf"].cfg)
        assert f2.sketch(sid) == f2_build(el, 0.5, 0.1, 2)
        s = strata.sketch(sid)
        assert s == strata_build(el, s.m_prime, 0.1, 1 << 16, 2)


def test_unknown_structure():
    with pytest.raises(ValueError):
        build_structure(points1d([1]), "kdtree")


# datasets and ranges

def test_dataset_validation():
    with pytest.raises(DataError, match="duplicate id 7"):
        Dataset("A", [7, 7], [[1], [2]], "points1d").validate()
    assert Dataset("A", [7, 7], [[1], [2]], "points1d").validate(allow_duplicates=True)
    with pytest.raises(DataError, match="48 bits"):
        Dataset("A", [1 << 48], [[1]], "points1d").validate()
    with pytest.raises(DataError, match="lo > hi"):
        segs([(5, 2)]).validate()
    with pytest.raises(DataError):
        Dataset("A", [1], [[0, 1]], "grid2d").validate()


@pytest.mark.parametrize("text, expected", [
    ("x:[0,3],y:[0,3]", Rect2D(0, 3, 0, 3)),
    ("x:[-2, 9]", Interval1D(-2, 9)),
    ("x:7", StabPoint(7)),
    ("(1,2)-(3,4)", GridRect((1, 2), (3, 4))),
    ("(2)-(5)", GridRect((2,), (5,))),
])
def test_parse_range(text, expected):
    assert parse_range(text) == expected
    assert parse_range(format_range(expected)) == expected


def test_parse_range_scale_and_errors():
    assert parse_range("x:[0.5,1.25]", scale=4) == Interval1D(2, 5)
    for bad in ("x:[1.5,2]", "z:[1,2]", "x:[3,1]", "x:[1,2],x:[1,2]", "y:[1,2]"):
        with pytest.raises(ValueError):
            parse_range(bad)


@settings(max_examples=60, deadline=None)
@given(xs=st.lists(st.integers(-50, 50), min_size=1, max_size=60), a=st.integers(-60, 60), w=st.integers(0, 120))
def test_tree1d_coverage_property(xs, a, w):
    st_ = RangeTree1D(points1d(xs))
    q = Interval1D(a, a + w)
    assert np.array_equal(net_coverage(st_, q), contains(q, st_.dataset).astype(int))
    assert all(s == 1 for _, s in st_.decompose(q).terms)
