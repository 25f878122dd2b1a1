"""Counting the boxes of a uniform partition of ``T_d`` where a sum gets large."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.fft

from ..errors import BoxBudgetExceeded
from ..polyfam import PolynomialFamily, WeightSpec, format_fraction
from ..sumeval import eval_points, value_table

__all__ = ["BoxCountReport", "box_count_experiment", "ceil_power", "box_counts"]

_EPS = np.finfo(np.float64).eps
# refinement stops once a level would need more centre evaluations than this
_LEVEL_POINT_CAP = 1 << 23


def ceil_power(N: int, exponent) -> int:
    """``ceil(N ** exponent)`` computed exactly for a rational exponent."""
    r = Fraction(exponent)
    p, q = r.numerator, r.denominator
    if N < 1:
        raise ValueError("N must be positive")
    if N == 1 or p <= 0:
        return 1
    target = N**p
    m = max(1, math.ceil(float(N) ** float(r)))
    while m**q < target:
        m += 1
    while m > 1 and (m - 1) ** q >= target:
        m -= 1
    return m


def box_counts(family: PolynomialFamily, N: int, alpha, eps) -> tuple:
    """Boxes per axis ``ceil(N^{e_j + 1 + eps - alpha})`` with ``e_j = deg phi_j``."""
    a = Fraction(str(alpha)) if isinstance(alpha, float) else Fraction(alpha)
    e = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    return tuple(ceil_power(N, deg + 1 + e - a) for deg in family.degrees)


@dataclass(frozen=True)
class BoxCountReport:
    zeta: tuple
    U: int
    marked: int
    marked_lower: int
    bound: float
    alpha: float
    eps: float
    N: int
    slack: float
    levels: int
    evaluations: int

    @property
    def within_bound(self) -> bool:
        return self.marked <= self.bound

    def as_dict(self) -> dict:
        return {
            "zeta": [format_fraction(z) for z in self.zeta],
            "U": self.U,
            "marked": self.marked,
            "marked_lower": self.marked_lower,
            "bound": self.bound,
            "alpha": self.alpha,
            "eps": self.eps,
            "N": self.N,
            "slack": self.slack,
            "levels": self.levels,
            "evaluations": self.evaluations,
            "within_bound": self.within_bound,
        }


def _center_values(family, weights, N, counts, K):
    """``|T|`` at every box centre ``((i_j + 1/2) / c_j)_j`` through one inverse FFT."""
    a = np.asarray(weights.values(K, N), dtype=complex)
    tables = [value_table(p, K, N) for p in family.polys]
    half = np.zeros(N)
    for t, c in zip(tables, counts):
        half += t.residues(2 * c) / (2.0 * c)
    coeffs = a * np.exp(2j * np.pi * np.mod(half, 1.0))
    idx = np.ravel_multi_index(tuple(t.residues(c) for t, c in zip(tables, counts)), counts)
    total = math.prod(counts)
    spec = np.bincount(idx, weights=coeffs.real, minlength=total) + 1j * np.bincount(
        idx, weights=coeffs.imag, minlength=total
    )
    grid = scipy.fft.ifftn(spec.reshape(counts), norm="forward")
    return np.abs(grid).ravel()


def box_count_experiment(
    family: PolynomialFamily,
    weights: WeightSpec,
    N: int,
    alpha: float,
    eps: float = 0.05,
    sampler_density: int = 4,
    levels: int = 3,
    slack: float = 0.2,
    cap: int = 10**6,
    K: int = 0,
) -> BoxCountReport:
    """Count boxes that may contain a point with ``|T(u; N)| >= N^alpha``.

    A box is cleared when a centre value plus the Lipschitz allowance over its
    half-widths stays below the threshold; boxes that cannot be cleared are
    split into ``sampler_density`` parts per axis, up to ``levels`` times.
    Whatever is not cleared is marked, so ``marked`` counts a superset of the
    boxes that meet the threshold.  ``marked_lower`` counts boxes where some
    evaluated point actually reached it.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if sampler_density < 2 or levels < 0:
        raise ValueError("sampler_density must be >= 2 and levels >= 0")
    counts = box_counts(family, N, alpha, eps)
    U = math.prod(counts)
    if U > cap:
        raise BoxBudgetExceeded(f"U={U} boxes exceeds the cap {cap}")
    d = family.d
    zeta = tuple(Fraction(1, c) for c in counts)
    thr = float(N) ** alpha
    s = d * (d + 1) // 2
    bound = U * float(N) ** (s * (1 - 2 * alpha)) * float(N) ** slack

    absa = np.abs(weights.values(K, N))
    abs_sum = math.fsum(absa)
    lips = np.array(
        [2 * math.pi * math.fsum(absa * value_table(p, K, N).abs) for p in family.polys]
    )
    widths = np.array([1.0 / c for c in counts])

    vals = _center_values(family, weights, N, counts, K)
    err = 5 * _EPS * (math.log2(max(U, 2)) + 2) * abs_sum
    evaluations = U
    hit = vals >= thr
    allowance = float(np.dot(lips, widths / 2)) + err
    open_boxes = np.flatnonzero(~hit & (vals + allowance >= thr))

    # centres of the surviving boxes
    idx = np.array(np.unravel_index(open_boxes, counts)).T
    owner = open_boxes
    centers = (idx + 0.5) * widths
    sub = sampler_density
    level = 0
    while level < levels and len(owner):
        level += 1
        child_w = widths / sub**level
        if len(owner) * sub**d > _LEVEL_POINT_CAP:
            break
        offs = np.stack(
            np.meshgrid(*[(np.arange(sub) - (sub - 1) / 2) for _ in range(d)], indexing="ij"),
            axis=-1,
        ).reshape(-1, d)
        centers = (centers[:, None, :] + offs[None, :, :] * child_w).reshape(-1, d)
        owner = np.repeat(owner, len(offs))
        v, e = eval_points(family, weights, np.mod(centers, 1.0), N, K)
        v = np.abs(v)
        evaluations += len(v)
        reached = v >= thr
        hit[owner[reached]] = True
        keep = (v + float(np.dot(lips, child_w / 2)) + e >= thr) & ~hit[owner]
        owner, centers = owner[keep], centers[keep]

    marked_set = hit.copy()
    marked_set[owner] = True
    return BoxCountReport(
        zeta=zeta,
        U=U,
        marked=int(np.count_nonzero(marked_set)),
        marked_lower=int(np.count_nonzero(hit)),
        bound=float(bound),
        alpha=float(alpha),
        eps=float(eps),
        N=N,
        slack=float(slack),
        levels=level,
        evaluations=int(evaluations),
    )
