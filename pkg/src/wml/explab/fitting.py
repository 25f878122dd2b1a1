"""Log-log slope fits and the tail-to-moment exponent."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from ..errors import DegenerateLadder, RhoExceedsB

__all__ = ["ExponentFit", "fit_exponent", "level_set_moment_exponent"]


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    stderr_slope: float
    points: tuple

    def predict(self, N: float) -> float:
        return math.exp(self.intercept) * N**self.slope

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr_slope": self.stderr_slope,
            "points": [list(p) for p in self.points],
        }


def _least_squares(xs, ys):
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    resid = math.fsum((y - intercept - slope * x) ** 2 for x, y in zip(xs, ys))
    stderr = math.sqrt(resid / (n - 2) / sxx) if n > 2 else 0.0
    return slope, intercept, stderr


def fit_exponent(points) -> ExponentFit:
    """Least squares line through ``(ln N, ln value)``."""
    pts = [(float(N), float(v)) for N, v in points]
    if len(pts) < 3:
        raise DegenerateLadder(f"need at least 3 points, got {len(pts)}")
    if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
        raise DegenerateLadder("N must be strictly increasing")
    if any(N <= 0 or v <= 0 for N, v in pts):
        raise DegenerateLadder("N and values must be positive")
    logs = tuple((math.log(N), math.log(v)) for N, v in pts)
    slope, intercept, stderr = _least_squares([p[0] for p in logs], [p[1] for p in logs])
    return ExponentFit(slope, intercept, stderr, logs)


def level_set_moment_exponent(a, b, rho):
    """Moment exponent ``rho * a / b`` implied by a tail bound ``N^a T^-b``.

    Rational inputs give an exact ``Fraction``.
    """
    if all(isinstance(v, (Rational, Fraction)) for v in (a, b, rho)):
        a, b, rho = Fraction(a), Fraction(b), Fraction(rho)
    if not 0 < a < b:
        raise ValueError(f"need 0 < a < b, got a={a}, b={b}")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if rho > b:
        raise RhoExceedsB(f"rho={rho} exceeds b={b}")
    return rho * a / b
