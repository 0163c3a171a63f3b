"""Compare the compiled kernels with the numpy/pure-Python fallback.

    python3 benchmarks/bench_backends.py [--n 20000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from sdrange import _pure
from sdrange._backend import BACKEND, kernels
from sdrange.hashing import TAG_STRATA, f2_row_keys, function_key
from sdrange.ibf import Ibf, params_for


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, seed=1):
    rng = np.random.default_rng(seed)
    ids = rng.integers(0, 1 << 48, n, dtype=np.uint64)
    cfg = params_for(64, 0.01, seed)
    keys = cfg.cell_keys
    sub = cfg.subtable_size
    rows = f2_row_keys(seed, 24)
    idx = _pure.hash_cells(ids, keys, sub)
    g = _pure.hash_checksums(ids, cfg.checksum_key, cfg.checksum_mask)
    zeros = np.zeros(n, dtype=np.int64)
    pos = np.arange(n, dtype=np.int64)
    small = Ibf.from_elements(ids[:64], cfg).cells

    def scatter(mod):
        cells = np.zeros(cfg.table_size * 3, dtype=np.uint64)
        mod.scatter_cells(cells, cfg.table_size, zeros, pos, idx, ids, g, 1)

    def peel(mod):
        mod.peel(small.copy(), keys, sub, cfg.checksum_key, cfg.checksum_mask, 64)

    skey = function_key(seed, TAG_STRATA)
    return {
        "hash_cells": lambda m: m.hash_cells(ids, keys, sub),
        "hash_checksums": lambda m: m.hash_checksums(ids, cfg.checksum_key, cfg.checksum_mask),
        "hash_strata": lambda m: m.hash_strata(ids, skey, 32),
        "hash_f2": lambda m: m.hash_f2(ids, rows, 64),
        "scatter_cells": scatter,
        "peel_64": peel,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if BACKEND != "compiled":
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':<16}{'compiled ms':>14}{'python ms':>12}{'speedup':>10}")
    for name, fn in cases(args.n).items():
        tp = best(lambda: fn(_pure), args.repeat) * 1e3
        tc = best(lambda: fn(kernels), args.repeat) * 1e3
        print(f"{name:<16}{tc:>14.3f}{tp:>12.3f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
