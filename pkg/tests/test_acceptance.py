"""End-to-end acceptance checks; each records one PASS/FAIL line for the terminal summary."""

import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from oracle import ACCEPTANCE_LINES, filter_ids, signed_difference
from sdrange.bench import planted_pair, planted_points, random_ids, rect_with_changes
from sdrange.canonical import (
    F2Count,
    FixedM,
    GridRect,
    Interval1D,
    Rect2D,
    StabPoint,
    StrataCount,
    Variable,
    attach_sketches,
    build_structure,
    combine,
)
from sdrange.canonical.base import Dataset, contains
from sdrange.engine import SdQuerySpec, query_diff_fixed, query_diff_variable
from sdrange.hashing import ceil_log2
from sdrange.ibf import Ibf, params_for
from sdrange.sketches import (
    dissimilarities,
    f2_build,
    f2_estimate,
    f2_subtract,
    strata_build,
    strata_capacity,
    strata_estimate,
)


@contextmanager
def criterion(number, title):
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException:
        ACCEPTANCE_LINES.append(f"FAIL  {number}. {title}: {info.get('summary', 'see traceback')}")
        raise
    ACCEPTANCE_LINES.append(f"PASS  {number}. {title}: {info.get('summary', '')} ({time.perf_counter() - t0:.1f}s)")


def binomial_margin(p, trials):
    return p + 3 * np.sqrt(p * (1 - p) / trials)


def test_1_ibf_decode_guarantee():
    with criterion(1, "IBF decode rate, m=16, eps=0.1, 2000 trials") as info:
        t0 = time.perf_counter()
        rng = np.random.default_rng(101)
        m, eps, trials = 16, 0.1, 2000
        failures = wrong = 0
        for i in range(trials):
            n_a = int(rng.integers(0, m + 1))
            a, b = planted_pair(rng, 64, n_a, m - n_a)
            cfg = params_for(m, eps, seed=i)
            res = (Ibf.from_elements(a, cfg) - Ibf.from_elements(b, cfg)).list_items(m)
            if not res.complete:
                failures += 1
                continue
            want = signed_difference(a.tolist(), b.tolist())
            wrong += (sorted(res.positive), sorted(res.negative)) != want
        elapsed = time.perf_counter() - t0
        rate = failures / trials
        info["summary"] = f"failure rate {rate:.4f} (limit {binomial_margin(eps, trials):.4f}), wrong decodes {wrong}"
        assert rate <= binomial_margin(eps, trials)
        assert wrong == 0
        assert elapsed < 30


def test_2_linearity_and_group_laws():
    with criterion(2, "linearity and group laws, 500 multiset pairs") as info:
        rng = np.random.default_rng(202)
        cfg = params_for(8, 0.05, seed=5)
        mp, u = 8, 1 << 48
        mismatches = 0
        for i in range(500):
            pool = random_ids(rng, 60)
            p = rng.choice(pool, int(rng.integers(0, 80)))  # with repeats: a multiset
            q = rng.choice(pool, int(rng.integers(0, 80)))
            pq = np.concatenate([p, q])
            a, b = Ibf.from_elements(p, cfg), Ibf.from_elements(q, cfg)
            direct = Ibf.from_elements(p, cfg)
            direct.delete_many(q)
            ok = a + b == Ibf.from_elements(pq, cfg) and a - b == direct and (a + b) - b == a
            fa, fb = f2_build(p, 0.5, 0.1, i), f2_build(q, 0.5, 0.1, i)
            ok &= fa.add(fb) == f2_build(pq, 0.5, 0.1, i) and fa.add(fb).subtract(fb) == fa
            if i % 5 == 0:
                sa, sb = strata_build(p, mp, 0.1, u, i), strata_build(q, mp, 0.1, u, i)
                ok &= sa + sb == strata_build(pq, mp, 0.1, u, i) and (sa + sb) - sb == sa
            mismatches += not ok
        info["summary"] = f"{mismatches} mismatches"
        assert mismatches == 0


def _structure_case(rng, kind, n):
    ids = random_ids(rng, n)
    if kind == "tree1d":
        return Dataset("X", ids, rng.integers(0, 1 << 20, (n, 1)), "points1d"), None
    if kind == "tree2d":
        return Dataset("X", ids, rng.integers(0, 1 << 20, (n, 2)), "points2d"), None
    if kind == "segment":
        lo = rng.integers(0, 1 << 20, n)
        return Dataset("X", ids, np.stack([lo, lo + rng.integers(0, 1 << 16, n)], 1), "segments"), None
    if kind == "grid1d":
        return Dataset("X", ids, rng.integers(1, n + 1, (n, 1)), "grid1d"), (n,)
    side = int(np.sqrt(n))
    return Dataset("X", ids, rng.integers(1, side + 1, (n, 2)), "grid2d"), (side, side)


def _random_query(rng, kind, dims):
    if kind == "tree1d":
        a, b = sorted(rng.integers(-10, (1 << 20) + 10, 2).tolist())
        return Interval1D(a, b)
    if kind == "tree2d":
        a, b = sorted(rng.integers(-10, (1 << 20) + 10, 2).tolist())
        c, d = sorted(rng.integers(-10, (1 << 20) + 10, 2).tolist())
        return Rect2D(a, b, c, d)
    if kind == "segment":
        return StabPoint(int(rng.integers(-10, (1 << 20) + (1 << 16))))
    lo = tuple(int(rng.integers(1, g + 1)) for g in dims)
    return GridRect(lo, tuple(int(rng.integers(a, g + 1)) for a, g in zip(lo, dims)))


def test_3_decomposition_correctness():
    with criterion(3, "decomposition coverage and term bounds, 5 structures x 500 queries, n=4096") as info:
        rng = np.random.default_rng(303)
        n = 4096
        lg = ceil_log2(n)
        worst = {}
        bad = 0
        for kind in ("tree1d", "tree2d", "segment", "grid1d", "grid2d"):
            ds, dims = _structure_case(rng, kind, n)
            st = build_structure(ds, kind, dims)
            bound = {
                "tree1d": 2 * lg,
                "tree2d": 4 * lg * lg,  # c = 4, i.e. (2 log n)^2
                "segment": ceil_log2(getattr(st, "leaf_count", 1)) + 1,
                "grid1d": 2,
                "grid2d": 4,
            }[kind]
            worst[kind] = 0
            for _ in range(500):
                q = _random_query(rng, kind, dims)
                d = st.decompose(q)
                net = np.zeros(n, dtype=np.int64)
                for sid, sign in d.terms:
                    np.add.at(net, st.set_members(sid), sign)
                bad += not np.array_equal(net, contains(q, ds).astype(np.int64))
                if st.semigroup:
                    bad += any(s != 1 for _, s in d.terms)
                worst[kind] = max(worst[kind], len(d))
                bad += len(d) > bound
        info["summary"] = f"{bad} violations; max terms " + ", ".join(f"{k}={v}" for k, v in worst.items())
        assert bad == 0


def test_4_variable_m_end_to_end():
    with criterion(4, "variable-m 2D queries, n=4096, differences 1..32, 200 queries") as info:
        t0 = time.perf_counter()
        rng = np.random.default_rng(404)
        eps, trials = 0.05, 200
        a, b, changed = planted_points(rng, 4096, 400)
        ia = attach_sketches(build_structure(a, "tree2d"), Variable(eps), 44)
        ib = attach_sketches(build_structure(b, "tree2d"), Variable(eps), 44)
        failures = wrong = tight = 0
        for i in range(trials):
            d = 1 + i % 32  # sizes spread evenly over 1..32
            q = rect_with_changes(rng, changed, d)
            ans = query_diff_variable(SdQuerySpec(ia, q, ib, q))
            truth = signed_difference(filter_ids(a.ids, a.coords, q), filter_ids(b.ids, b.coords, q))
            assert len(truth[0]) + len(truth[1]) == d
            if not ans.ok:
                failures += 1
                continue
            wrong += (ans.only_in_a, ans.only_in_b) != truth
            tight += 2**ans.level_used < 4 * d
        elapsed = time.perf_counter() - t0
        ok = trials - failures
        frac = tight / ok if ok else 0.0
        info["summary"] = (f"non-complete {failures}/{trials}, wrong {wrong}, "
                           f"2^level < 4d in {frac:.1%} of successes, {elapsed:.1f}s with build")
        assert wrong == 0
        assert failures / trials <= binomial_margin(eps, trials)
        assert frac >= 0.9
        assert elapsed < 60


def test_5_cardinality_accuracy():
    with criterion(5, "difference-size estimates, delta=0.25, eps=0.05, |A xor B|=200") as info:
        t0 = time.perf_counter()
        rng = np.random.default_rng(505)
        delta, eps, h = 0.25, 0.05, 200
        f2_good = 0
        for i in range(500):
            a, b = planted_pair(rng, 4900, 100, 100)
            est = f2_estimate(f2_subtract(f2_build(a, delta, eps, i), f2_build(b, delta, eps, i)))
            f2_good += abs(est - h) <= delta * h
        mp = strata_capacity(delta, eps)
        u = 1 << 32
        strata_good = 0
        for i in range(200):
            a, b = planted_pair(rng, 4900, 100, 100, bits=32)
            est = strata_estimate(strata_build(a, mp, eps, u, i), strata_build(b, mp, eps, u, i))
            strata_good += abs(est - h) <= delta * h
        elapsed = time.perf_counter() - t0
        info["summary"] = f"F2 {f2_good}/500 within bound, strata {strata_good}/200 (m'={mp}), {elapsed:.1f}s"
        assert f2_good >= 0.9 * 500
        assert strata_good >= 0.85 * 200
        assert elapsed < 60


def test_6_partial_sum_group_identity():
    with criterion(6, "8x8 prefix grid, all rectangles") as info:
        rng = np.random.default_rng(606)
        n = 100
        ds = Dataset("G", random_ids(rng, n), rng.integers(1, 9, (n, 2)), "grid2d")
        st = build_structure(ds, "grid2d", (8, 8))
        ix = attach_sketches(st, FixedM(128, 0.01), 66)
        complete = wrong = rects = 0
        for i in range(1, 9):
            for j in range(1, 9):
                for k in range(i, 9):
                    for l in range(j, 9):
                        q = GridRect((i, j), (k, l))
                        rects += 1
                        res = combine(ix, st.decompose(q)).list_items(128)
                        if res.complete:
                            complete += 1
                            wrong += (sorted(res.positive), res.negative) != (sorted(filter_ids(ds.ids, ds.coords, q)), [])
        cfg = ix.banks["ibf"].cfg
        mismatched = sum(ix.sketch(s).ibf != Ibf.from_elements(st.set_elements(s), cfg) for s in range(st.set_count))
        f2 = attach_sketches(st, F2Count(0.25, 0.05), 66)
        mismatched += sum(f2.sketch(s) != f2_build(st.set_elements(s), 0.25, 0.05, 66) for s in range(st.set_count))
        strata = attach_sketches(st, StrataCount(0.5, 0.1, 1 << 48), 66)
        for s in range(st.set_count):
            sk = strata.sketch(s)
            mismatched += sk != strata_build(st.set_elements(s), sk.m_prime, 0.1, 1 << 48, 66)
        info["summary"] = (f"{rects} rectangles, {complete} complete, {wrong} wrong; "
                           f"{mismatched} prefix sketches differ from direct builds")
        assert wrong == 0 and mismatched == 0
        assert rects == 36 * 36


def _median_latency(n, queries, seed):
    rng = np.random.default_rng(seed)
    ds = Dataset("A", random_ids(rng, n), np.arange(n), "points1d")
    ix = attach_sketches(build_structure(ds, "tree1d"), FixedM(16, 0.1), seed)
    lat = []
    for _ in range(queries + 5):
        lo = int(rng.integers(0, n // 2))
        hi = int(rng.integers(lo + 4, n - 4))
        ans = query_diff_fixed(SdQuerySpec(ix, Interval1D(lo, hi), ix, Interval1D(lo + 4, hi + 4)))
        assert ans.ok and ans.size == 8
        lat.append(ans.timing_ns)
    del ix
    return float(np.median(lat[5:]))  # first few queries warm caches


def test_7_output_sensitive_scaling():
    with criterion(7, "fixed m=16 latency, n=2^16 vs n=2^12, 100 queries") as info:
        small = _median_latency(1 << 12, 100, 707)
        large = _median_latency(1 << 16, 100, 708)
        ratio = large / small
        info["summary"] = f"median {small / 1e3:.0f}us vs {large / 1e3:.0f}us, ratio {ratio:.2f} (limit 4)"
        assert ratio <= 4


def test_8_dissimilarity_identities():
    with criterion(8, "dissimilarity identities, 1000 exact triples") as info:
        rng = np.random.default_rng(808)
        bad = 0
        for _ in range(1000):
            a, b = (int(v) for v in rng.integers(0, 10_000, 2))
            inter = int(rng.integers(0, min(a, b) + 1))
            h = a + b - 2 * inter
            r = dissimilarities(a, b, h)
            bad += not (2 * r.intersection + r.hamming == a + b and r.union == r.intersection + r.hamming)
            bad += r.tversky != r.jaccard
            bad += not all(isinstance(v, Fraction) for v in (r.intersection, r.union, r.jaccard, r.tversky))
            bad += r.intersection != inter
        info["summary"] = f"{bad} violations"
        assert bad == 0
