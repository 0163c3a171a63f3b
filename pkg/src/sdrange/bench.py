"""Seeded trial loops that check decode, counting and scaling behaviour against the naive oracle."""

from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .canonical import FixedM, Interval1D, Rect2D, Variable, attach_sketches, build_structure
from .canonical.base import Dataset
from .engine import SdQuerySpec, naive_diff, query_diff_fixed, query_diff_variable
from .ibf import Ibf, params_for
from .sketches import f2_build, strata_build, strata_capacity

SUITES = ("decode", "count-accuracy", "strata-accuracy", "e2e", "scaling")


@dataclass
class BenchReport:
    suite: str
    trials: int
    params: dict
    failure_rate: float = 0.0
    accuracy_quantiles: dict = field(default_factory=dict)
    timing_quantiles: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def __post_init__(self):
        if self.trials <= 0:
            raise ValueError("a report needs at least one trial")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        d.pop("columns")
        return d

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            w.writerows(self.rows)


def _quantiles(values, qs=(0.05, 0.5, 0.95)) -> dict:
    if len(values) == 0:
        return {}
    v = np.asarray(values, dtype=np.float64)
    return {f"q{int(q * 100):02d}": float(np.quantile(v, q)) for q in qs}


def random_ids(rng: np.random.Generator, n: int, bits: int = 48) -> np.ndarray:
    """``n`` distinct ids below ``2**bits``."""
    out = np.unique(rng.integers(0, 1 << bits, size=n + n // 8 + 8, dtype=np.uint64))
    while out.shape[0] < n:
        out = np.unique(np.concatenate([out, rng.integers(0, 1 << bits, size=n, dtype=np.uint64)]))
    return rng.permutation(out)[:n]


def planted_pair(rng: np.random.Generator, shared: int, only_a: int, only_b: int, bits: int = 48):
    ids = random_ids(rng, shared + only_a + only_b, bits)
    common = ids[:shared]
    a = np.concatenate([common, ids[shared:shared + only_a]])
    b = np.concatenate([common, ids[shared + only_a:]])
    return a, b


def decode_trial(rng, m: int, epsilon: float, diff: int, seed: int, shared: int = 0) -> tuple[bool, bool]:
    """One IBF reconciliation; returns ``(complete, exact)``."""
    n_a = int(rng.integers(0, diff + 1))
    a, b = planted_pair(rng, shared, n_a, diff - n_a)
    cfg = params_for(m, epsilon, seed)
    res = Ibf.from_elements(a, cfg).subtract(Ibf.from_elements(b, cfg)).list_items(m)
    want_pos = set(int(v) for v in a[shared:])
    want_neg = set(int(v) for v in b[shared:])
    exact = set(res.positive) == want_pos and set(res.negative) == want_neg
    return res.complete, res.complete and exact


def run_decode(trials=2000, m=16, epsilon=0.1, seed=0, loads=None) -> BenchReport:
    rng = np.random.default_rng(seed)
    loads = loads or [m // 2, m, 2 * m]
    rows, fails_at_m, wrong = [], 0, 0
    times = []
    for load in loads:
        fails = 0
        for i in range(trials):
            t0 = time.perf_counter_ns()
            ok, exact = decode_trial(rng, m, epsilon, load, seed + i)
            times.append(time.perf_counter_ns() - t0)
            fails += not ok
            if load <= m and ok and not exact:
                wrong += 1
        rows.append([load, trials, fails / trials])
        if load == m:
            fails_at_m = fails
    return BenchReport(
        "decode", trials, {"m": m, "epsilon": epsilon, "seed": seed, "loads": loads},
        failure_rate=fails_at_m / trials, timing_quantiles=_quantiles(times),
        extra={"silent_errors": wrong}, columns=["load", "trials", "failure_rate"], rows=rows,
    )


def run_count(trials=500, delta=0.25, epsilon=0.05, diff=200, size=5000, seed=0, strata=False) -> BenchReport:
    rng = np.random.default_rng(seed)
    est, times = [], []
    shared = size - diff // 2
    universe = 1 << 32
    m_prime = strata_capacity(delta, epsilon) if strata else 0
    for i in range(trials):
        a, b = planted_pair(rng, shared, diff // 2, diff - diff // 2, bits=32)
        t0 = time.perf_counter_ns()
        if strata:
            sa = strata_build(a, m_prime, epsilon, universe, seed + i)
            sb = strata_build(b, m_prime, epsilon, universe, seed + i)
        else:
            sa = f2_build(a, delta, epsilon, seed + i)
            sb = f2_build(b, delta, epsilon, seed + i)
        est.append(sa.subtract(sb).estimate())
        times.append(time.perf_counter_ns() - t0)
    est = np.array(est)
    within = np.abs(est - diff) <= delta * diff
    params = {"delta": delta, "epsilon": epsilon, "diff": diff, "size": size, "seed": seed}
    if strata:
        params["m_prime"] = m_prime
    return BenchReport(
        "strata-accuracy" if strata else "count-accuracy", trials, params,
        failure_rate=float(1 - within.mean()),
        accuracy_quantiles=_quantiles(est / diff, (0.05, 0.25, 0.5, 0.75, 0.95)),
        timing_quantiles=_quantiles(times),
        extra={"within_fraction": float(within.mean())},
        columns=["trial", "estimate", "ratio"], rows=[[i, float(e), float(e / diff)] for i, e in enumerate(est)],
    )


def planted_points(rng, n: int, changes: int, coord_bits: int = 20):
    """A 2D point set of size ``n`` and a copy with ``changes`` deletions and insertions mixed in."""
    ids = random_ids(rng, n + changes // 2)
    coords = rng.integers(0, 1 << coord_bits, size=(n + changes // 2, 2))
    drop = rng.choice(n, changes - changes // 2, replace=False)
    keep = np.ones(n, dtype=bool)
    keep[drop] = False
    a = Dataset("A", ids[:n], coords[:n], "points2d")
    b = Dataset("B", np.concatenate([ids[:n][keep], ids[n:]]),
                np.concatenate([coords[:n][keep], coords[n:]]), "points2d")
    changed = np.concatenate([coords[:n][~keep], coords[n:]])
    return a, b, changed


def rect_with_changes(rng, changed: np.ndarray, target: int, coord_bits: int = 20) -> Rect2D:
    """A rectangle holding exactly ``target`` changed points (closest in scaled L-inf distance)."""
    while True:
        x0, y0 = (int(v) for v in rng.integers(0, 1 << coord_bits, 2))
        w, h = np.exp(rng.uniform(-1, 1, size=2))
        r = np.maximum(np.abs(changed[:, 0] - x0) / w, np.abs(changed[:, 1] - y0) / h)
        r.sort()
        if r[target] - r[target - 1] < 2:
            continue
        s = (r[target] + r[target - 1]) / 2
        q = Rect2D(int(np.ceil(x0 - s * w)), int(np.floor(x0 + s * w)),
                   int(np.ceil(y0 - s * h)), int(np.floor(y0 + s * h)))
        inside = (changed[:, 0] >= q.xlo) & (changed[:, 0] <= q.xhi) & (changed[:, 1] >= q.ylo) & (changed[:, 1] <= q.yhi)
        if int(inside.sum()) == target:
            return q


def run_e2e(trials=200, n=4096, epsilon=0.05, max_diff=32, changes=400, seed=0) -> BenchReport:
    rng = np.random.default_rng(seed)
    a, b, changed = planted_points(rng, n, changes)
    t0 = time.perf_counter()
    ia = attach_sketches(build_structure(a, "tree2d"), Variable(epsilon), seed)
    ib = attach_sketches(build_structure(b, "tree2d"), Variable(epsilon), seed)
    build_s = time.perf_counter() - t0
    rows, times = [], []
    fails = wrong = tight = 0
    for i in range(trials):
        d = 1 + i % max_diff  # sizes spread evenly, no sampling noise in the mix
        q = rect_with_changes(rng, changed, d)
        spec = SdQuerySpec(ia, q, ib, q)
        ans = query_diff_variable(spec)
        truth = naive_diff(spec)
        times.append(ans.timing_ns)
        if not ans.ok:
            fails += 1
        else:
            wrong += (ans.only_in_a, ans.only_in_b) != (truth.only_in_a, truth.only_in_b)
            tight += 2**ans.level_used < 4 * truth.size
        rows.append([i, truth.size, ans.status, ans.level_used, ans.timing_ns])
    ok = trials - fails
    return BenchReport(
        "e2e", trials, {"n": n, "epsilon": epsilon, "max_diff": max_diff, "seed": seed},
        failure_rate=fails / trials, timing_quantiles=_quantiles(times),
        extra={"wrong": wrong, "tight_level_fraction": tight / ok if ok else 0.0, "build_seconds": build_s},
        columns=["trial", "true_diff", "status", "level_used", "timing_ns"], rows=rows,
    )


def scaling_point(n: int, m: int, epsilon: float, queries: int, seed: int, shift: int = 4) -> np.ndarray:
    """Latencies (ns) of fixed-m diff queries on a 1D tree of ``n`` points; each query differs in ``2*shift`` items."""
    rng = np.random.default_rng(seed)
    ds = Dataset("A", random_ids(rng, n), np.arange(n), "points1d")
    idx = attach_sketches(build_structure(ds, "tree1d"), FixedM(m, epsilon), seed)
    out = np.empty(queries, dtype=np.int64)
    for i in range(queries):
        lo = int(rng.integers(0, n // 2))
        hi = int(rng.integers(lo + shift, n - shift))
        spec = SdQuerySpec(idx, Interval1D(lo, hi), idx, Interval1D(lo + shift, hi + shift))
        ans = query_diff_fixed(spec)
        out[i] = ans.timing_ns
    return out


def run_scaling(queries=100, m=16, epsilon=0.1, seed=0, exponents=(12, 14, 16)) -> BenchReport:
    rows = []
    medians = {}
    for e in exponents:
        lat = scaling_point(1 << e, m, epsilon, queries, seed)
        medians[e] = float(np.median(lat))
        rows.append([1 << e, medians[e], float(np.quantile(lat, 0.9))])
    lo, hi = min(exponents), max(exponents)
    return BenchReport(
        "scaling", queries, {"m": m, "epsilon": epsilon, "seed": seed, "exponents": list(exponents)},
        timing_quantiles={f"median_n{1 << e}": v for e, v in medians.items()},
        extra={"ratio": medians[hi] / medians[lo]},
        columns=["n", "median_ns", "p90_ns"], rows=rows,
    )


def run_suite(name: str, **kw) -> BenchReport:
    if name == "decode":
        return run_decode(**kw)
    if name == "count-accuracy":
        return run_count(**kw)
    if name == "strata-accuracy":
        return run_count(strata=True, **kw)
    if name == "e2e":
        return run_e2e(**kw)
    if name == "scaling":
        return run_scaling(**kw)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


__all__ = ["BenchReport", "SUITES", "run_suite", "planted_pair", "planted_points", "rect_with_changes",
           "random_ids"]
