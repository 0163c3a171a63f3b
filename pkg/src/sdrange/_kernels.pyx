# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: hashing, bulk cell scatter and IBF peeling.

Mirrors ``_pure`` exactly; see there for the contracts.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = z + GAMMA
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t hash64(uint64_t x, uint64_t key) noexcept nogil:
    return mix64(mix64(x ^ key) + key)


def hash_cells(const uint64_t[::1] ids, const uint64_t[::1] cell_keys, uint64_t sub):
    cdef Py_ssize_t n = ids.shape[0], k = cell_keys.shape[0], p, i
    out = np.empty((n, k), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    with nogil:
        for p in range(n):
            for i in range(k):
                o[p, i] = <int64_t>(i * sub + hash64(ids[p], cell_keys[i]) % sub)
    return out


def hash_checksums(const uint64_t[::1] ids, uint64_t gkey, uint64_t mask):
    cdef Py_ssize_t n = ids.shape[0], p
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for p in range(n):
            o[p] = hash64(ids[p], gkey) % mask + 1
    return out


def hash_strata(const uint64_t[::1] ids, uint64_t key, int64_t layers):
    cdef Py_ssize_t n = ids.shape[0], p
    cdef uint64_t h
    cdef int64_t z
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for p in range(n):
            h = hash64(ids[p], key)
            if h == 0:
                o[p] = layers - 1
            else:
                z = __builtin_ctzll(h)
                o[p] = z if z < layers - 1 else layers - 1
    return out


def hash_f2(const uint64_t[::1] ids, const uint64_t[::1] row_keys, uint64_t buckets):
    cdef Py_ssize_t n = ids.shape[0], rows = row_keys.shape[0], p, r
    cdef uint64_t h
    b = np.empty((n, rows), dtype=np.int64)
    s = np.empty((n, rows), dtype=np.int64)
    cdef int64_t[:, ::1] bv = b
    cdef int64_t[:, ::1] sv = s
    with nogil:
        for p in range(n):
            for r in range(rows):
                h = hash64(ids[p], row_keys[r])
                bv[p, r] = <int64_t>(((h >> 32) * buckets) >> 32)
                sv[p, r] = 1 if h & 1 else -1
    return b, s


def scatter_cells(uint64_t[::1] flat, int64_t t, const int64_t[::1] rows,
                  const int64_t[::1] pos, const int64_t[:, ::1] idx,
                  const uint64_t[::1] ids, const uint64_t[::1] g, int64_t sign):
    cdef Py_ssize_t n_pairs = rows.shape[0], k = idx.shape[1], p, j
    cdef int64_t q, c, base
    cdef uint64_t dc, dx, dg
    with nogil:
        for p in range(n_pairs):
            q = pos[p]
            if sign > 0:
                dc, dx, dg = 1, ids[q], g[q]
            else:
                dc, dx, dg = <uint64_t>(-1), 0 - ids[q], 0 - g[q]
            base = rows[p] * t
            for j in range(k):
                c = (base + idx[q, j]) * 3
                flat[c] += dc
                flat[c + 1] += dx
                flat[c + 2] += dg


def scatter_f2(int64_t[::1] flat, int64_t n_rows, int64_t buckets, const int64_t[::1] rows,
               const int64_t[::1] pos, const int64_t[:, ::1] bidx,
               const int64_t[:, ::1] signs, int64_t v):
    cdef Py_ssize_t n_pairs = rows.shape[0], p, r
    cdef int64_t q, base
    with nogil:
        for p in range(n_pairs):
            q = pos[p]
            base = rows[p] * n_rows
            for r in range(n_rows):
                flat[(base + r) * buckets + bidx[q, r]] += signs[q, r] * v


def peel(uint64_t[:, ::1] cells, const uint64_t[::1] cell_keys, uint64_t sub,
         uint64_t gkey, uint64_t mask, int64_t max_items):
    cdef Py_ssize_t t = cells.shape[0], k = cell_keys.shape[0], i, j
    cdef Py_ssize_t cap = t + 16 * k + 1, top = 0
    cdef int64_t c, cc, emitted = 0
    cdef uint64_t x, gx, dc, dx, dg, q
    buf = np.empty(cap, dtype=np.int64)
    cdef int64_t[::1] st = buf
    for i in range(t):
        c = <int64_t>cells[i, 0]
        if c == 1 or c == -1:
            st[top] = i
            top += 1
    positive, negative = [], []
    while top > 0 and emitted < max_items:
        top -= 1
        i = st[top]
        c = <int64_t>cells[i, 0]
        if c == 1:
            x = cells[i, 1]
            gx = hash64(x, gkey) % mask + 1
            if (cells[i, 2] & mask) != gx:
                continue
            dc, dx, dg = <uint64_t>(-1), 0 - x, 0 - gx
        elif c == -1:
            x = 0 - cells[i, 1]
            gx = hash64(x, gkey) % mask + 1
            if ((0 - cells[i, 2]) & mask) != gx:
                continue
            dc, dx, dg = 1, x, gx
        else:
            continue
        if top + k > cap:
            cap = 2 * cap + k
            buf = np.concatenate([buf, np.empty(cap - buf.shape[0], dtype=np.int64)])
            st = buf
        for j in range(k):
            q = j * sub + hash64(x, cell_keys[j]) % sub
            cells[q, 0] += dc
            cells[q, 1] += dx
            cells[q, 2] += dg
            cc = <int64_t>cells[q, 0]
            if cc == 1 or cc == -1:
                st[top] = <int64_t>q
                top += 1
        if c == 1:
            positive.append(x)
        else:
            negative.append(x)
        emitted += 1
    complete = True
    for i in range(t):
        if cells[i, 0] != 0 or cells[i, 1] != 0 or cells[i, 2] != 0:
            complete = False
            break
    return positive, negative, complete
