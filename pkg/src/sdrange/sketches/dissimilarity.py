"""Set dissimilarities derived from two exact sizes and a (possibly estimated) Hamming distance."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


@dataclass(frozen=True)
class DissimilarityReport:
    hamming: float | Fraction
    intersection: float | Fraction
    union: float | Fraction
    a_only: float | Fraction
    b_only: float | Fraction
    jaccard: float | Fraction
    dice: float | Fraction
    tversky: float | Fraction
    alpha: float | Fraction
    beta: float | Fraction
    clamped: bool = False


def _ratio(num, den):
    if den == 0:
        return num * 0
    return num / den


def dissimilarities(size_a, size_b, hamming, alpha=1, beta=1) -> DissimilarityReport:
    """Intersection, union, Jaccard, Dice and Tversky dissimilarities of A and B.

    With integer (or Fraction) inputs everything is computed in exact
    rational arithmetic and the triple must be consistent: ``H`` at least
    ``| |A| - |B| |`` and ``|A| + |B| + H`` even.  Float ``hamming`` is
    treated as an estimate; set-difference parts that come out negative are
    clamped to zero and ``clamped`` is set.

    >>> r = dissimilarities(4, 6, 4)
    >>> r.intersection, r.union, r.dice, r.jaccard
    (Fraction(3, 1), Fraction(7, 1), Fraction(2, 5), Fraction(4, 7))
    """
    values = (size_a, size_b, hamming, alpha, beta)
    if any(v < 0 for v in values):
        raise ValueError(f"sizes, hamming and weights must be non-negative, got {values}")
    if hamming > size_a + size_b:
        raise ValueError(f"hamming {hamming} exceeds |A| + |B| = {size_a + size_b}")
    exact = all(isinstance(v, Rational) for v in values)
    if exact:
        size_a, size_b, hamming, alpha, beta = (Fraction(v) for v in values)
    else:
        size_a, size_b, hamming, alpha, beta = (float(v) for v in values)

    total = size_a + size_b
    intersection = (total - hamming) / 2
    union = (total + hamming) / 2
    a_only = (size_a - size_b + hamming) / 2
    b_only = (hamming - size_a + size_b) / 2
    clamped = False
    if exact:
        if a_only < 0 or b_only < 0 or (total + hamming).denominator != 1 or (total + hamming) % 2:
            raise ValueError(f"inconsistent exact triple |A|={size_a}, |B|={size_b}, H={hamming}")
    elif a_only < 0 or b_only < 0:
        clamped = True
        a_only, b_only = max(a_only, 0.0), max(b_only, 0.0)

    dice = _ratio(hamming, total)
    jaccard = _ratio(2 * hamming, total + hamming)
    # orient so the larger difference part is the denominator of p
    if a_only >= b_only:
        big, small, w_big, w_small = a_only, b_only, alpha, beta
    else:
        big, small, w_big, w_small = b_only, a_only, beta, alpha
    if big == 0:
        tversky = hamming * 0
    else:
        p = small / big
        q = intersection / big
        tversky = _ratio(w_big + w_small * p, w_big + w_small * p + q)
    return DissimilarityReport(
        hamming, intersection, union, a_only, b_only, jaccard, dice, tversky, alpha, beta, clamped
    )
