"""Closed-form pointwise majorants of the quadratic and cubic fibre suprema."""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = ["pointwise_majorant", "majorant_ratio"]


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _clamped(x: Fraction, m: int, N: int) -> float:
    """``min(1/||m x||, N)`` with ``||.||`` taken exactly."""
    r = (m * x.numerator) % x.denominator
    dist = min(r, x.denominator - r)
    if dist == 0:
        return float(N)
    return min(x.denominator / dist, float(N))


def pointwise_majorant(x, N: int, d: int) -> float:
    """``N + sum_{h<=N} min(1/||2hx||, N)`` for ``d = 2``;
    ``N^3 + N sum_{0<|g|,|h|<=N} min(1/||6ghx||, N)`` for ``d = 3``.

    The first dominates ``sup_y |S|^2`` and the second ``sup |S|^4`` up to a
    constant.
    """
    x = _exact(x)
    if d == 2:
        return N + math.fsum(_clamped(x, 2 * h, N) for h in range(1, N + 1))
    if d == 3:
        # |g h| depends only on the magnitudes: four sign patterns
        inner = math.fsum(
            _clamped(x, 6 * g * h, N) for g in range(1, N + 1) for h in range(1, N + 1)
        )
        return float(N) ** 3 + N * 4 * inner
    raise ValueError("d must be 2 or 3")


def majorant_ratio(sup_value: float, x, N: int, d: int) -> float:
    """``sup^power / majorant`` with power 2 (d=2) or 4 (d=3); an empirical constant."""
    power = 2 if d == 2 else 4
    return sup_value**power / pointwise_majorant(x, N, d)
