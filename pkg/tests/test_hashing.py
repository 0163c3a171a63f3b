import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import splitmix64_stream
from sdrange import hashing
from sdrange.hashing import (
    TAG_CELL,
    TAG_CHECKSUM,
    TAG_F2,
    TAG_STRATA,
    HashConfig,
    cell_indices,
    cell_indices_batch,
    checksum,
    checksum_batch,
    f2_hashes,
    f2_hashes_batch,
    function_key,
    mix64,
    strata_layer,
    strata_layer_batch,
    trailing_layer,
)

GAMMA = 0x9E3779B97F4A7C15
ids64 = st.integers(min_value=0, max_value=(1 << 64) - 1)


def test_mix64_matches_published_splitmix64_outputs():
    # reference outputs of SplitMix64 seeded with 1234567
    expected = [0x599ED017FB08FC85, 0x2C73F08458540FA5, 0x883EBCE5A3F27C77]
    assert splitmix64_stream(1234567, 3) == expected
    assert [mix64((1234567 + i * GAMMA) & hashing.MASK64) for i in range(3)] == expected
    assert mix64(0) == 0xE220A8397B1DCDAF


def test_indices_fall_one_per_subtable():
    cfg = HashConfig(99, 3, 12, 5)
    for x in range(200):
        idx = cell_indices(x, cfg)
        assert len(idx) == 3
        assert [lo <= i < lo + 4 for i, lo in zip(idx, (0, 4, 8))] == [True] * 3


def test_indices_deterministic():
    cfg = HashConfig(5, 4, 64, 6)
    assert cell_indices(123456789, cfg) == cell_indices(123456789, cfg)
    assert cell_indices(123456789, cfg) == cell_indices(123456789, HashConfig(5, 4, 64, 6))


def test_subtable_histograms_uniform(rng):
    cfg = HashConfig(11, 4, 1024, 6)
    xs = rng.integers(0, 1 << 48, 10_000, dtype=np.uint64)
    idx = cell_indices_batch(xs, cfg)
    sub = cfg.subtable_size
    dof = sub - 1
    for i in range(cfg.k):
        counts = np.bincount(idx[:, i] - i * sub, minlength=sub)
        expect = len(xs) / sub
        chi2 = float(((counts - expect) ** 2 / expect).sum())
        assert abs(chi2 - dof) <= 5 * np.sqrt(2 * dof)


def test_checksum_range_and_determinism(rng):
    cfg = HashConfig(3, 9, 144, 13)
    xs = rng.integers(0, 1 << 48, 5000, dtype=np.uint64)
    g = checksum_batch(xs, cfg)
    assert g.min() >= 1 and g.max() < 8192
    assert checksum(77, cfg) == checksum(77, cfg)


def test_checksum_collisions_match_birthday(rng):
    cfg = HashConfig(8, 4, 64, 16)
    xs = np.unique(rng.integers(0, 1 << 48, 10_050, dtype=np.uint64))[:10_000]
    _, counts = np.unique(checksum_batch(xs, cfg), return_counts=True)
    pairs = int((counts * (counts - 1) // 2).sum())
    n, space = len(xs), (1 << 16) - 1
    expect = n * (n - 1) / 2 / space
    assert abs(pairs - expect) <= 5 * np.sqrt(expect)


@pytest.mark.parametrize("h, layer", [(0b1100, 2), (1, 0), (0, 31), (1 << 40, 31), (1 << 5, 5)])
def test_trailing_layer(h, layer):
    assert trailing_layer(h, 32) == layer


def test_strata_layer_uses_its_own_hash():
    x, seed = 4242, 17
    h = hashing.hash64(x, function_key(seed, TAG_STRATA))
    assert strata_layer(x, seed, 64) == trailing_layer(h, 64)


def test_f2_hashes_determinism_and_range():
    for row in range(5):
        assert f2_hashes(31337, row, 9, 64) == f2_hashes(31337, row, 9, 64)
        b, s = f2_hashes(31337, row, 9, 64)
        assert 0 <= b < 64 and s in (-1, 1)


def test_f2_sign_balance(rng):
    xs = rng.integers(0, 1 << 48, 10_000, dtype=np.uint64)
    _, signs = f2_hashes_batch(xs, 1, 4, 64)
    frac = float((signs[:, 0] == 1).mean())
    assert abs(frac - 0.5) <= 5 * np.sqrt(0.25 / len(xs))


def test_f2_rows_independent(rng):
    xs = rng.integers(0, 1 << 48, 10_000, dtype=np.uint64)
    b, _ = f2_hashes_batch(xs, 2, 4, 64)
    same = int((b[:, 0] == b[:, 1]).sum())
    expect = len(xs) / 64
    assert abs(same - expect) <= 5 * np.sqrt(expect)


def test_domain_tags_are_distinct_and_separate():
    tags = [TAG_CELL, TAG_CHECKSUM, TAG_STRATA, TAG_F2]
    assert len(set(tags)) == 4
    keys = {function_key(1, t, 0) for t in tags}
    assert len(keys) == 4
    # checksums depend only on the checksum tag, so cell keys can move without touching them
    cfg = HashConfig(1, 3, 12, 5)
    assert cfg.checksum_key == function_key(1, TAG_CHECKSUM, 0)
    assert list(cfg.cell_keys) == [function_key(1, TAG_CELL, i) for i in range(3)]


@pytest.mark.parametrize("args", [(0, 1, 4, 8), (0, 3, 10, 8), (0, 3, 12, 4), (0, 3, 12, 65), (0, 3, 0, 8)])
def test_config_validation(args):
    with pytest.raises(ValueError):
        HashConfig(*args)


def test_config_properties():
    cfg = HashConfig(0, 9, 144, 13)
    assert cfg.subtable_size == 16
    assert cfg.checksum_mask == (1 << 13) - 1


@settings(max_examples=200, deadline=None)
@given(x=ids64, seed=ids64, k=st.integers(2, 12), sub=st.integers(1, 50))
def test_indices_distinct_and_checksum_nonzero(x, seed, k, sub):
    cfg = HashConfig(seed, k, k * sub, hashing.default_lambda(k))
    idx = cell_indices(x, cfg)
    assert len(set(idx)) == k
    assert [i // sub for i in idx] == list(range(k))
    assert 1 <= checksum(x, cfg) < 1 << cfg.lam


@settings(max_examples=50, deadline=None)
@given(xs=st.lists(ids64, min_size=1, max_size=40), seed=ids64)
def test_batch_matches_scalar(xs, seed):
    cfg = HashConfig(seed, 5, 40, 8)
    arr = np.array(xs, dtype=np.uint64)
    assert cell_indices_batch(arr, cfg).tolist() == [cell_indices(x, cfg) for x in xs]
    assert checksum_batch(arr, cfg).tolist() == [checksum(x, cfg) for x in xs]
    assert strata_layer_batch(arr, seed, 20).tolist() == [strata_layer(x, seed, 20) for x in xs]
    b, s = f2_hashes_batch(arr, 3, seed, 37)
    for i, x in enumerate(xs):
        assert [(int(b[i, r]), int(s[i, r])) for r in range(3)] == [f2_hashes(x, r, seed, 37) for r in range(3)]


def test_ceil_log2():
    assert [hashing.ceil_log2(v) for v in (1, 2, 3, 4, 5, 160, 1 / 0.1 * 16)] == [0, 1, 2, 2, 3, 8, 8]
