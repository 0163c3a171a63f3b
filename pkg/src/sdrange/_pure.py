"""Reference kernels in numpy and plain Python.

Same signatures and results as the compiled ``_kernels`` extension.
Arrays passed in are assumed contiguous with the documented dtypes.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S32 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(32)
_M = (1 << 64) - 1


def _mix(z):
    z = z + _GAMMA
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def _hash(ids, key):
    key = np.uint64(key)
    return _mix(_mix(ids ^ key) + key)


def _mix_int(z):
    z = (z + 0x9E3779B97F4A7C15) & _M
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M
    return z ^ (z >> 31)


def _hash_int(x, key):
    return _mix_int((_mix_int(x ^ key) + key) & _M)


def hash_cells(ids, cell_keys, sub):
    n, k = ids.shape[0], cell_keys.shape[0]
    out = np.empty((n, k), dtype=np.int64)
    usub = np.uint64(sub)
    for i in range(k):
        out[:, i] = (_hash(ids, cell_keys[i]) % usub).astype(np.int64) + i * sub
    return out


def hash_checksums(ids, gkey, mask):
    return _hash(ids, gkey) % np.uint64(mask) + np.uint64(1)


def hash_strata(ids, key, layers):
    h = _hash(ids, key)
    low = h & (~h + np.uint64(1))
    out = np.full(h.shape[0], layers - 1, dtype=np.int64)
    nz = low != 0
    # low is a power of two, exactly representable as float64
    out[nz] = np.minimum(np.log2(low[nz].astype(np.float64)).astype(np.int64), layers - 1)
    return out


def hash_f2(ids, row_keys, buckets):
    n, rows = ids.shape[0], row_keys.shape[0]
    b = np.empty((n, rows), dtype=np.int64)
    s = np.empty((n, rows), dtype=np.int64)
    ub = np.uint64(buckets)
    for r in range(rows):
        h = _hash(ids, row_keys[r])
        b[:, r] = (((h >> _S32) * ub) >> _S32).astype(np.int64)
        s[:, r] = (h & np.uint64(1)).astype(np.int64) * 2 - 1
    return b, s


def scatter_cells(flat, t, rows, pos, idx, ids, g, sign):
    """Add ``sign`` copies of item ``pos[p]`` to IBF row ``rows[p]`` of the flat ``(S, t, 3)`` table."""
    if rows.shape[0] == 0:
        return
    k = idx.shape[1]
    base = (rows[:, None] * t + idx[pos]) * 3
    base = base.ravel()
    if sign > 0:
        x, gx, c = ids[pos], g[pos], np.uint64(1)
    else:
        x, gx, c = np.uint64(0) - ids[pos], np.uint64(0) - g[pos], np.uint64(_M)
    np.add.at(flat, base, c)
    np.add.at(flat, base + 1, np.repeat(x, k))
    np.add.at(flat, base + 2, np.repeat(gx, k))


def scatter_f2(flat, n_rows, buckets, rows, pos, bidx, signs, v):
    """Add ``v * sign`` of item ``pos[p]`` into every row of F2 sketch ``rows[p]``."""
    if rows.shape[0] == 0:
        return
    r = np.arange(n_rows, dtype=np.int64)
    cells = (rows[:, None] * n_rows + r[None, :]) * buckets + bidx[pos]
    np.add.at(flat, cells.ravel(), (signs[pos] * v).ravel())


def peel(cells, cell_keys, sub, gkey, mask, max_items):
    """Peel the ``(t, 3)`` uint64 table in place; returns ``(positive, negative, complete)``."""
    keys = [int(v) for v in cell_keys]
    t = cells.shape[0]
    cnt = cells[:, 0].view(np.int64).tolist()
    ids = cells[:, 1].tolist()
    gs = cells[:, 2].tolist()
    stack = [i for i in range(t) if cnt[i] == 1 or cnt[i] == -1]
    positive, negative = [], []
    emitted = 0
    while stack and emitted < max_items:
        i = stack.pop()
        c = cnt[i]
        if c == 1:
            x = ids[i]
            if gs[i] & mask != _hash_int(x, gkey) % mask + 1:
                continue
            d = -1
        elif c == -1:
            x = -ids[i] & _M
            if -gs[i] & mask != _hash_int(x, gkey) % mask + 1:
                continue
            d = 1
        else:
            continue
        gx = _hash_int(x, gkey) % mask + 1
        dx, dg = (d * x) & _M, (d * gx) & _M
        for j, key in enumerate(keys):
            q = j * sub + _hash_int(x, key) % sub
            cnt[q] += d
            ids[q] = (ids[q] + dx) & _M
            gs[q] = (gs[q] + dg) & _M
            if cnt[q] == 1 or cnt[q] == -1:
                stack.append(q)
        (positive if d < 0 else negative).append(x)
        emitted += 1
    cells[:, 0] = np.array(cnt, dtype=np.int64).view(np.uint64)
    cells[:, 1] = np.array(ids, dtype=np.uint64)
    cells[:, 2] = np.array(gs, dtype=np.uint64)
    complete = not (any(cnt) or any(ids) or any(gs))
    return positive, negative, complete
