"""Extreme discrepancy of finite sequences in [0, 1) and related bounds.

For a sequence ``xi_1..xi_N`` the discrepancy is the supremum over open
intervals ``(a, b)`` of ``|#{xi_n in (a, b)} - (b - a) N|``.  Writing

    G(t) = #{xi < t} - N t        H(t) = #{xi <= t} - N t

the excess of ``(a, b)`` tends to ``H(t') - G(t)`` when ``a -> t^-`` and
``b -> t'^+`` (``t <= t'``), and the deficit is ``H(t) - G(t')`` at
``a = t < b = t'``.  Both extremes live on the breakpoints ``{0, xi_n, 1}``,
except that ``a`` cannot approach ``0`` from below, where ``H(0)`` replaces
``G(0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimensionMismatch, EmptySequence
from .polyfam import PolynomialFamily, WeightSpec
from .sumeval import TorusVector, _as_torus, _quantize, value_table
from .supopt import BudgetSpec

__all__ = [
    "PointSequence",
    "DiscrepancyResult",
    "polynomial_fractional_parts",
    "exact_discrepancy",
    "discrepancy_rows",
    "brute_force_discrepancy",
    "erdos_turan_bound",
    "sup_discrepancy_fiber",
    "FiberDiscrepancy",
    "read_sequence",
    "write_sequence",
]

_TWO63 = 1 << 63
_MASK63 = np.uint64(_TWO63 - 1)
_INV63 = 1.0 / _TWO63


@dataclass(frozen=True)
class PointSequence:
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        for v in vals:
            if not 0.0 <= v < 1.0:
                raise ValueError(f"sequence value {v} outside [0, 1)")
        object.__setattr__(self, "values", vals)

    @property
    def N(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


@dataclass(frozen=True)
class DiscrepancyResult:
    value: float
    excess: float
    deficit: float
    excess_interval: tuple
    deficit_interval: tuple


def read_sequence(path) -> PointSequence:
    """One value per line; blank lines and ``#`` comments are skipped."""
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                vals.append(float(line))
    return PointSequence(tuple(vals))


def write_sequence(seq: PointSequence, path) -> None:
    with open(path, "w") as fh:
        for v in seq.values:
            fh.write(f"{v!r}\n")


def _fixed_phases(family: PolynomialFamily, coords, N: int, K: int) -> np.ndarray:
    acc = np.zeros(N, dtype=np.uint64)
    for c, poly in zip(coords, family.polys):
        q, _ = _quantize(float(c))
        acc += np.uint64(q) * value_table(poly, K, N).mod64
    return acc & _MASK63


def polynomial_fractional_parts(family: PolynomialFamily, x, y=(), N: int = 1, K: int = 0) -> PointSequence:
    """Fractional parts of ``sum_j x_j phi_j(n) + sum_j y_j phi_{k+j}(n)`` for ``n = K+1..K+N``."""
    x, y = _as_torus(x), _as_torus(y)
    if x.dim + y.dim != family.d:
        raise DimensionMismatch(f"{x.dim} + {y.dim} coordinates for a family of {family.d}")
    if N == 0:
        return PointSequence(())
    vals = _fixed_phases(family, x.coords + y.coords, N, K).astype(np.float64) * _INV63
    # float conversion may round 2^63 - small up to 1.0
    vals[vals >= 1.0] = 0.0
    return PointSequence(tuple(vals.tolist()))


def discrepancy_rows(rows: np.ndarray) -> np.ndarray:
    """Discrepancy of every row of an ``(r, N)`` array of points in ``[0, 1)``."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    r, N = rows.shape
    s = np.sort(rows, axis=1)
    idx = np.arange(1, N + 1, dtype=np.float64)
    # i - N s_i <= H(s_i) with equality at the last of a tie group;
    # (i - 1) - N s_i >= G(s_i) with equality at the first.
    Hp = idx - N * s
    Gp = Hp - 1.0
    zero = s == 0.0
    n_zero = zero.sum(axis=1).astype(np.float64)

    g_adm = np.where(zero, np.inf, Gp)
    run_min = np.minimum(np.minimum.accumulate(g_adm, axis=1), n_zero[:, None])
    excess = np.maximum(np.max(Hp - run_min, axis=1), 0.0)
    # right endpoint t' = 1 where H(1) = 0
    excess = np.maximum(excess, -np.minimum(run_min[:, -1], 0.0))

    prev_max = np.empty_like(Hp)
    prev_max[:, 0] = n_zero
    if N > 1:
        prev_max[:, 1:] = np.maximum(np.maximum.accumulate(Hp[:, :-1], axis=1), n_zero[:, None])
    g_b = np.where(zero, np.inf, Gp)
    deficit = np.max(prev_max - g_b, axis=1)
    # right endpoint b = 1 where G(1) = 0
    deficit = np.maximum(deficit, np.maximum(np.max(Hp, axis=1), n_zero))
    return np.maximum(excess, deficit)


def exact_discrepancy(seq) -> DiscrepancyResult:
    """Extreme discrepancy with witness intervals, ``O(N log N)``."""
    x = seq.as_array() if isinstance(seq, PointSequence) else np.asarray(seq, dtype=np.float64)
    N = len(x)
    if N == 0:
        raise EmptySequence("discrepancy of an empty sequence")
    pts = np.unique(x)
    le = np.searchsorted(np.sort(x), pts, side="right").astype(np.float64)
    lt = np.searchsorted(np.sort(x), pts, side="left").astype(np.float64)
    t = np.concatenate([[0.0], pts, [1.0]])
    H = np.concatenate([[float(np.sum(x == 0.0))], le - N * pts, [0.0]])
    G = np.concatenate([[0.0], lt - N * pts, [0.0]])
    if pts[0] == 0.0:
        # duplicate breakpoint 0 collapses onto the explicit one
        t, H, G = np.delete(t, 1), np.delete(H, 1), np.delete(G, 1)
    G_adm = G.copy()
    G_adm[0] = H[0]

    # excess: max over i <= j of H[j] - G_adm[i]  (H[-1] at t=1 equals G there)
    best_ex, ex_pair = -math.inf, (0.0, 0.0)
    run_i = 0
    for j in range(len(t)):
        if G_adm[j] < G_adm[run_i]:
            run_i = j
        val = H[j] - G_adm[run_i]
        if val > best_ex:
            best_ex, ex_pair = val, (t[run_i], t[j])
    # deficit: max over i < j of H[i] - G[j]
    best_de, de_pair = -math.inf, (0.0, 1.0)
    run_i = 0
    for j in range(1, len(t)):
        val = H[run_i] - G[j]
        if val > best_de:
            best_de, de_pair = val, (t[run_i], t[j])
        if H[j] > H[run_i]:
            run_i = j
    best_ex = max(best_ex, 0.0)
    value = max(best_ex, best_de)
    return DiscrepancyResult(
        value=float(value),
        excess=float(best_ex),
        deficit=float(best_de),
        excess_interval=(float(ex_pair[0]), float(ex_pair[1])),
        deficit_interval=(float(de_pair[0]), float(de_pair[1])),
    )


def brute_force_discrepancy(values: Iterable[float]) -> float:
    """Reference value by enumerating every endpoint configuration, ``O(N^3)``.

    Endpoints are breakpoints ``{0, xi_n, 1}`` optionally displaced by an
    infinitesimal to either side; counts use the displaced position, lengths
    use the limit.
    """
    x = [float(v) for v in values]
    N = len(x)
    if N == 0:
        raise EmptySequence("discrepancy of an empty sequence")
    cands = [(0.0, 0), (1.0, 0)]
    for v in x:
        cands += [(v, -1), (v, 0), (v, 1)]
    # no approach to 0 from below or to 1 from above
    cands = sorted({c for c in cands if not (c[0] == 0.0 and c[1] < 0)})
    best = 0.0
    for ai, a in enumerate(cands):
        for b in cands[ai + 1 :]:
            count = 0
            for v in x:
                above_a = v > a[0] or (v == a[0] and a[1] < 0)
                below_b = v < b[0] or (v == b[0] and b[1] > 0)
                if above_a and below_b:
                    count += 1
            best = max(best, abs(count - (b[0] - a[0]) * N))
    return best


def erdos_turan_bound(seq, G: int) -> float:
    """``3 (N/(G+1) + sum_{g<=G} |sum_n e(g xi_n)| / g)``."""
    if G < 1:
        raise ValueError("G must be a positive integer")
    x = seq.as_array() if isinstance(seq, PointSequence) else np.asarray(seq, dtype=np.float64)
    N = len(x)
    total = N / (G + 1)
    for g in range(1, G + 1):
        # g * xi mod 1 before the exponential keeps the phase small
        ph = np.mod(g * x, 1.0)
        total += abs(np.sum(np.exp(2j * np.pi * ph))) / g
    return 3 * total


@dataclass(frozen=True)
class FiberDiscrepancy:
    lower: float
    upper: float
    witness: TorusVector
    evaluations: int
    mesh: tuple
    heuristic: bool = True
    exhausted: bool = False

    def __iter__(self):
        return iter((self.lower, self.upper))


def _disc_grid_sizes(family, k, N, K, budget: BudgetSpec):
    m = family.d - k
    if budget.coarse_grid is not None:
        sizes = budget.coarse_grid
        if len(sizes) == 1 and m > 1:
            sizes = sizes * m
        return tuple(sizes)
    # phase motion per mesh half-width kept to 0.025 per coordinate
    lam = [value_table(p, K, N).max_abs for p in family.polys[k:]]
    sizes = [max(4, math.ceil(L * m / (2 * 0.025))) for L in lam]
    cap = max(1, budget.max_evaluations // 2)
    if math.prod(sizes) > cap:
        factor = (cap / math.prod(sizes)) ** (1.0 / m)
        sizes = [max(1, int(s * factor)) for s in sizes]
    return tuple(sizes)


def sup_discrepancy_fiber(
    family: PolynomialFamily,
    x,
    N: int,
    budget: BudgetSpec = BudgetSpec(),
    K: int = 0,
) -> FiberDiscrepancy:
    """Bracket ``sup_y D(x, y; N)``; the upper end is a heuristic continuity allowance.

    Moving ``y`` by at most half a mesh cell moves every point by at most
    ``delta = sum_j max_n |phi_{k+j}(n)| h_j / 2``; the allowance is
    ``2 N delta + 1`` on top of the best grid value.
    """
    x = _as_torus(x)
    k = x.dim
    if not 1 <= k <= family.d:
        raise DimensionMismatch(f"x has {k} coordinates; family has {family.d}")
    if k == family.d or N == 0:
        val = exact_discrepancy(polynomial_fractional_parts(family, x, (), N, K)).value if N else 0.0
        return FiberDiscrepancy(val, val, TorusVector(()), 1, (), heuristic=False)

    m = family.d - k
    sizes = _disc_grid_sizes(family, k, N, K, budget)
    mesh = tuple(1.0 / s for s in sizes)
    base = _fixed_phases(PolynomialFamily(family.polys[:k]), x.coords, N, K)
    fib_tables = [value_table(p, K, N).mod64 for p in family.polys[k:]]

    def rows_for(points):
        acc = np.broadcast_to(base, (len(points), N)).copy()
        for j, tab in enumerate(fib_tables):
            q = np.round(points[:, j] * float(_TWO63)).astype(np.uint64) & _MASK63
            acc += q[:, None] * tab[None, :]
        vals = (acc & _MASK63).astype(np.float64) * _INV63
        vals[vals >= 1.0] = 0.0
        return vals

    grid = np.stack(np.meshgrid(*[np.arange(s) / s for s in sizes], indexing="ij"), axis=-1).reshape(-1, m)
    chunk = max(1, (1 << 21) // max(N, 1))
    D = np.empty(len(grid))
    for s in range(0, len(grid), chunk):
        D[s : s + chunk] = discrepancy_rows(rows_for(grid[s : s + chunk]))
    evaluations = len(grid)
    best = int(np.argmax(D))
    best_val = float(D[best])
    grid_max = best_val
    best_y = grid[best]

    # local refinement: finer grids around the best nodes
    order = np.argsort(-D, kind="stable")[: budget.multistarts]
    sub = 8
    for idx in order:
        if evaluations >= budget.max_evaluations:
            break
        center = grid[idx]
        offsets = np.stack(
            np.meshgrid(*[(np.arange(-sub, sub + 1) / (2 * sub)) * h for h in mesh], indexing="ij"),
            axis=-1,
        ).reshape(-1, m)
        pts = np.mod(center + offsets, 1.0)
        vals = discrepancy_rows(rows_for(pts))
        evaluations += len(pts)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_y = float(vals[j]), pts[j]

    lam = [value_table(p, K, N).max_abs for p in family.polys[k:]]
    delta = sum(L * h / 2 for L, h in zip(lam, mesh))
    upper = min(float(N), max(best_val, grid_max + 2 * N * delta + 1))
    return FiberDiscrepancy(
        lower=best_val,
        upper=max(upper, best_val),
        witness=TorusVector(tuple(best_y)),
        evaluations=evaluations,
        mesh=mesh,
        exhausted=evaluations >= budget.max_evaluations,
    )
