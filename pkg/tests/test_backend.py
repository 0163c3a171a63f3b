import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdrange import _pure
from sdrange._backend import BACKEND, kernels
from sdrange.hashing import TAG_STRATA, f2_row_keys, function_key
from sdrange.ibf import Ibf, params_for

compiled = pytest.mark.skipif(BACKEND != "compiled", reason="compiled extension not built")
id_lists = st.lists(st.integers(0, (1 << 64) - 1), min_size=1, max_size=50)
seeds = st.integers(0, (1 << 64) - 1)


@compiled
@settings(max_examples=100, deadline=None)
@given(ids=id_lists, seed=seeds, k=st.integers(2, 16), sub=st.integers(1, 64))
def test_hash_kernels_agree(ids, seed, k, sub):
    x = np.array(ids, dtype=np.uint64)
    cfg = params_for(max(1, sub // 2), 0.1, seed)
    keys = cfg.cell_keys[:k] if cfg.k >= k else cfg.cell_keys
    assert np.array_equal(kernels.hash_cells(x, keys, sub), _pure.hash_cells(x, keys, sub))
    mask = np.uint64(cfg.checksum_mask)
    assert np.array_equal(kernels.hash_checksums(x, cfg.checksum_key, int(mask)), _pure.hash_checksums(x, cfg.checksum_key, int(mask)))
    skey = function_key(seed, TAG_STRATA)
    assert np.array_equal(kernels.hash_strata(x, skey, 48), _pure.hash_strata(x, skey, 48))
    rows = f2_row_keys(seed, 4)
    for a, b in zip(kernels.hash_f2(x, rows, 37), _pure.hash_f2(x, rows, 37)):
        assert np.array_equal(a, b)


@compiled
@settings(max_examples=100, deadline=None)
@given(ids=id_lists, seed=seeds, sign=st.sampled_from([1, -1]), n_rows=st.integers(1, 4))
def test_scatter_kernels_agree(ids, seed, sign, n_rows):
    x = np.array(ids, dtype=np.uint64)
    cfg = params_for(8, 0.1, seed)
    idx = _pure.hash_cells(x, cfg.cell_keys, cfg.subtable_size)
    g = _pure.hash_checksums(x, cfg.checksum_key, cfg.checksum_mask)
    rows = np.arange(len(ids), dtype=np.int64) % n_rows
    pos = np.arange(len(ids), dtype=np.int64)
    t = cfg.table_size
    a = np.zeros(n_rows * t * 3, dtype=np.uint64)
    b = a.copy()
    kernels.scatter_cells(a, t, rows, pos, idx, x, g, sign)
    _pure.scatter_cells(b, t, rows, pos, idx, x, g, sign)
    assert np.array_equal(a, b)
    bidx, signs = _pure.hash_f2(x, f2_row_keys(seed, 3), 16)
    fa = np.zeros(n_rows * 3 * 16, dtype=np.int64)
    fb = fa.copy()
    kernels.scatter_f2(fa, 3, 16, rows, pos, bidx, signs, sign)
    _pure.scatter_f2(fb, 3, 16, rows, pos, bidx, signs, sign)
    assert np.array_equal(fa, fb)


@compiled
@settings(max_examples=100, deadline=None)
@given(a=st.sets(st.integers(0, (1 << 48) - 1), max_size=30), b=st.sets(st.integers(0, (1 << 48) - 1), max_size=30),
       seed=seeds, cap=st.integers(0, 24))
def test_peel_agrees(a, b, seed, cap):
    cfg = params_for(8, 0.1, seed)
    diff = Ibf.from_elements(sorted(a), cfg) - Ibf.from_elements(sorted(b), cfg)
    args = (cfg.cell_keys, cfg.subtable_size, cfg.checksum_key, cfg.checksum_mask, cap)
    wa, wb = diff.cells.copy(), diff.cells.copy()
    ra = kernels.peel(wa, *args)
    rb = _pure.peel(wb, *args)
    assert (sorted(ra[0]), sorted(ra[1]), ra[2]) == (sorted(rb[0]), sorted(rb[1]), rb[2])
    if ra[2]:
        assert np.array_equal(wa, wb)


def test_pure_backend_selected_by_environment():
    env = dict(os.environ, SDRANGE_PURE="1")
    code = "from sdrange._backend import BACKEND; print(BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    assert out.strip() == "python"


def test_pure_backend_end_to_end():
    env = dict(os.environ, SDRANGE_PURE="1")
    proc = subprocess.run([sys.executable, "-m", "sdrange.cli", "selftest"], env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "backend: python" in proc.stdout
