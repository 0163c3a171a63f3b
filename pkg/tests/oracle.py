"""Independent reference implementations used to derive expected values."""

from collections import Counter

M64 = (1 << 64) - 1


def splitmix64_stream(state, count):
    """The published SplitMix64 generator; its outputs are the finalizer applied to state + k*gamma."""
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        out.append(z ^ (z >> 31))
    return out


def in_range(query, coords):
    """Brute-force closed-range test for one item, by query type name."""
    name = type(query).__name__
    if name == "Interval1D":
        return query.lo <= coords[0] <= query.hi
    if name == "Rect2D":
        return query.xlo <= coords[0] <= query.xhi and query.ylo <= coords[1] <= query.yhi
    if name == "StabPoint":
        return coords[0] <= query.x <= coords[1]
    if name == "GridRect":
        return all(a <= c <= b for a, c, b in zip(query.lo, coords, query.hi))
    raise TypeError(name)


def filter_ids(ids, coords, query):
    return [int(i) for i, c in zip(ids, coords) if in_range(query, [int(v) for v in c])]


def signed_difference(a_ids, b_ids):
    net = Counter(a_ids)
    net.subtract(Counter(b_ids))
    return sorted(x for x, c in net.items() if c > 0), sorted(x for x, c in net.items() if c < 0)


def balanced_cover(lo_pos, hi_pos, n):
    """Maximal nodes of a midpoint-split tree over [0, n) inside [lo_pos, hi_pos), as (start, stop) spans."""
    out = []

    def walk(s, e):
        if e <= lo_pos or hi_pos <= s:
            return
        if lo_pos <= s and e <= hi_pos:
            out.append((s, e))
            return
        mid = (s + e) // 2
        walk(s, mid)
        walk(mid, e)

    if n:
        walk(0, n)
    return out


# pass/fail lines printed in the terminal summary by conftest
ACCEPTANCE_LINES = []
