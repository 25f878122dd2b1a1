"""Certified estimates of ``sup_y |T(x, y; N)|`` over a fibre of the torus.

The fibre coordinates ``y`` are scanned on a uniform grid (one FFT gives the
sum at every grid node), the best nodes are polished by ascent on ``|T|^2``
with the analytic gradient, and the result is bracketed:

* ``lower`` is an actual evaluation of ``|T|`` at ``witness`` (direct engine);
* ``upper`` is the grid maximum plus the Lipschitz slack ``sum_j L_j h_j / 2``
  plus the FFT round-off bound, which dominates the true supremum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft

from .errors import BudgetExhausted, DimensionMismatch
from .polyfam import IntPolynomial, PolynomialFamily, WeightSpec
from .sumeval import TorusVector, _as_torus, eval_sum, reduced_phases, value_table

__all__ = [
    "BudgetSpec",
    "SupEstimate",
    "Fiber",
    "lipschitz_bounds",
    "sup_fiber",
    "sup_short",
    "short_family",
    "GAP_FRACTION",
]

# per-coordinate certified gap target, as a fraction of sum |a_n|
GAP_FRACTION = 0.05
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class BudgetSpec:
    max_evaluations: int = 1 << 22
    coarse_grid: Optional[tuple] = None
    multistarts: int = 4
    ascent_iterations: int = 40

    def __post_init__(self):
        if self.max_evaluations < 1 or self.multistarts < 1 or self.ascent_iterations < 0:
            raise ValueError("budget counts must be positive")
        if self.coarse_grid is not None:
            grid = self.coarse_grid
            if isinstance(grid, int):
                grid = (grid,)
            grid = tuple(int(g) for g in grid)
            if any(g < 1 for g in grid):
                raise ValueError("coarse_grid resolutions must be positive")
            object.__setattr__(self, "coarse_grid", grid)


@dataclass(frozen=True)
class SupEstimate:
    lower: float
    upper: float
    witness: TorusVector
    evaluations: int
    mesh: tuple
    lipschitz: tuple = ()
    grid_max: float = 0.0
    eval_error: float = 0.0
    grid_error: float = 0.0
    exhausted: bool = False

    @property
    def slack(self) -> float:
        """Certified gap allowance: Lipschitz mesh slack plus round-off."""
        return sum(L * h / 2 for L, h in zip(self.lipschitz, self.mesh)) + self.grid_error


def lipschitz_bounds(family: PolynomialFamily, weights: WeightSpec, N: int, k: int, K: int = 0):
    """``L_j = 2 pi sum_n |a_n| |phi_{k+j}(n)|`` for each fibre coordinate."""
    absa = np.abs(weights.values(K, N))
    return tuple(
        2 * math.pi * math.fsum(absa * value_table(p, K, N).abs) for p in family.polys[k:]
    )


class Fiber:
    """``y -> T(x, y; N)`` for a fixed base point ``x``, with derivatives."""

    def __init__(self, family: PolynomialFamily, weights: WeightSpec, x, N: int, K: int = 0):
        x = _as_torus(x)
        k = x.dim
        if not 1 <= k <= family.d:
            raise DimensionMismatch(f"x has {k} coordinates; family has {family.d}")
        self.family = family
        self.k = k
        self.m = family.d - k
        self.N = N
        self.K = K
        self.x = x
        a = weights.values(K, N)
        self.abs_sum = math.fsum(np.abs(a))
        base_tables = [value_table(p, K, N) for p in family.polys[:k]]
        self.tables = [value_table(p, K, N) for p in family.polys[k:]]
        ph = reduced_phases(np.array(x.coords), base_tables)
        self.coeffs = a * np.exp(2j * np.pi * ph)
        self.freqs = [t.as_float for t in self.tables]
        self.evaluations = 0

    def value(self, y) -> complex:
        self.evaluations += 1
        if self.m == 0:
            return complex(np.sum(self.coeffs))
        terms = self.coeffs * np.exp(2j * np.pi * reduced_phases(np.asarray(y, float), self.tables))
        return complex(np.sum(terms))

    def derivatives(self, y):
        """``(T, dT/dy_j, d^2T/dy_j^2)`` at ``y``."""
        self.evaluations += 1
        terms = self.coeffs * np.exp(2j * np.pi * reduced_phases(np.asarray(y, float), self.tables))
        T = complex(np.sum(terms))
        first = np.array([2j * np.pi * np.sum(terms * f) for f in self.freqs])
        second = np.array([-4 * np.pi**2 * np.sum(terms * f * f) for f in self.freqs])
        return T, first, second

    def grid(self, sizes):
        """``T`` at every node ``(m_1/M_1, ..., m_r/M_r)`` via one inverse FFT."""
        self.evaluations += int(np.prod(sizes))
        idx = np.ravel_multi_index(
            tuple(t.residues(M) for t, M in zip(self.tables, sizes)), sizes
        )
        total = int(np.prod(sizes))
        spectrum = np.bincount(idx, weights=self.coeffs.real, minlength=total) + 1j * np.bincount(
            idx, weights=self.coeffs.imag, minlength=total
        )
        spectrum = spectrum.reshape(sizes)
        return scipy.fft.ifftn(spectrum, norm="forward")

    def eval_error(self) -> float:
        nl = sum(t.limbs.shape[0] for t in self.tables)
        per_term = 2 * math.pi * (2 * nl + 4) * _EPS + 4 * _EPS
        return self.abs_sum * (per_term + (self.N + 8) * _EPS)


def _grid_sizes(lips, abs_sum, budget: BudgetSpec, m: int):
    if budget.coarse_grid is not None:
        sizes = budget.coarse_grid
        if len(sizes) == 1 and m > 1:
            sizes = sizes * m
        if len(sizes) != m:
            raise DimensionMismatch(f"coarse_grid has {len(sizes)} entries for {m} coordinates")
        return tuple(sizes), True
    target = 2 * GAP_FRACTION * abs_sum
    sizes = [max(4, math.ceil(L / target)) if target > 0 else 4 for L in lips]
    sizes = [scipy.fft.next_fast_len(s) for s in sizes]
    cap = max(1, budget.max_evaluations // 2)
    met = True
    if math.prod(sizes) > cap:
        met = False
        factor = (cap / math.prod(sizes)) ** (1.0 / m)
        sizes = [max(1, int(s * factor)) for s in sizes]
    return tuple(sizes), met


def _local_maxima(A: np.ndarray) -> np.ndarray:
    mask = np.ones(A.shape, dtype=bool)
    for ax in range(A.ndim):
        if A.shape[ax] > 1:
            mask &= A >= np.roll(A, 1, axis=ax)
            mask &= A >= np.roll(A, -1, axis=ax)
    return np.flatnonzero(mask)


def _start_nodes(A: np.ndarray, sizes, count: int) -> list:
    """Coordinates of the ``count`` largest local maxima (ties: lowest index first)."""
    flat = A.ravel()
    peaks = _local_maxima(A)
    order = np.argsort(-flat[peaks], kind="stable")
    chosen = list(peaks[order[:count]])
    best = int(np.argmax(flat))
    if best not in chosen:
        chosen = [best] + chosen[: count - 1]
    return [
        tuple(float(i) / M for i, M in zip(np.unravel_index(int(c), sizes), sizes)) for c in chosen
    ]


def _ascend(fiber: Fiber, y0, mesh, iterations, eval_cap):
    y = np.array(y0, dtype=float)
    T, g1, g2 = fiber.derivatives(y)
    f = abs(T) ** 2
    mesh = np.asarray(mesh)
    for _ in range(iterations):
        if fiber.evaluations >= eval_cap:
            return y, T, True
        grad = 2 * np.real(np.conj(T) * g1)
        hess = 2 * np.abs(g1) ** 2 + 2 * np.real(np.conj(T) * g2)
        step = np.where(hess < 0, -grad / np.where(hess < 0, hess, 1.0), np.sign(grad) * mesh / 2)
        step = np.clip(step, -mesh, mesh)
        if not np.any(step):
            break
        t = 1.0
        improved = False
        for _ in range(40):
            cand = y + t * step
            Tc = fiber.value(cand)
            if abs(Tc) ** 2 > f:
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        gain = (abs(Tc) ** 2 - f) / max(f, 1e-300)
        y = cand - np.floor(cand)
        T, g1, g2 = fiber.derivatives(y)
        f = abs(T) ** 2
        if gain < 1e-10:
            break
    return y, T, False


def sup_fiber(
    family: PolynomialFamily,
    weights: WeightSpec,
    x,
    N: int,
    budget: BudgetSpec = BudgetSpec(),
    K: int = 0,
    strict: bool = False,
) -> SupEstimate:
    """Bracket ``sup_{y in T_{d-k}} |T(x, y; N)|`` where ``k = len(x)``."""
    fiber = Fiber(family, weights, x, N, K)
    if fiber.m == 0 or N == 0:
        value = abs(eval_sum(family, weights, fiber.x, (), N, K))
        return SupEstimate(float(value), float(value), TorusVector(()), 1, (), (), float(value))

    lips = lipschitz_bounds(family, weights, N, fiber.k, K)
    sizes, _ = _grid_sizes(lips, fiber.abs_sum, budget, fiber.m)
    mesh = tuple(1.0 / s for s in sizes)
    G = fiber.grid(sizes)
    A = np.abs(G)
    flat = A.ravel()
    grid_max = float(flat.max())
    grid_err = 5 * _EPS * (math.log2(flat.size) + 2) * fiber.abs_sum

    # start nodes: the best local maxima of this grid and of every halved
    # grid nested in it, so a refined grid never loses a coarser start
    starts = _start_nodes(A, sizes, budget.multistarts)
    level = tuple(sizes)
    while all(s % 2 == 0 and s >= 4 for s in level):
        level = tuple(s // 2 for s in level)
        starts += _start_nodes(np.abs(fiber.grid(level)), level, budget.multistarts)
    seen = set()
    starts = [y for y in starts if not (y in seen or seen.add(y))]

    # ascent steps are capped at a quarter period of the fastest phase, independent of the grid
    scale = tuple(0.25 / max(1.0, t.max_abs) for t in fiber.tables)
    eval_cap = budget.max_evaluations
    best_y, best_val, exhausted = None, -1.0, False
    for node in starts:
        y, T, hit = _ascend(fiber, np.array(node), scale, budget.ascent_iterations, eval_cap)
        exhausted |= hit
        if abs(T) > best_val:
            best_y, best_val = y, abs(T)
        if hit:
            break

    witness = TorusVector(tuple(best_y))
    lower = best_val
    upper = grid_max + sum(L * h / 2 for L, h in zip(lips, mesh)) + grid_err
    # the triangle inequality caps every value at sum |a_n|
    upper = max(min(upper, fiber.abs_sum + fiber.eval_error()), lower)
    est = SupEstimate(
        lower=float(lower),
        upper=float(upper),
        witness=witness,
        evaluations=fiber.evaluations,
        mesh=mesh,
        lipschitz=lips,
        grid_max=grid_max,
        eval_error=float(fiber.eval_error()),
        grid_error=float(grid_err),
        exhausted=exhausted,
    )
    if exhausted and strict:
        raise BudgetExhausted("evaluation budget exhausted during ascent", est)
    return est


def short_family(d: int) -> PolynomialFamily:
    """``(T^d, T, T^2, ..., T^{d-1})``: the leading coefficient is the base coordinate."""
    polys = (IntPolynomial.monomial(d),) + tuple(IntPolynomial.monomial(i) for i in range(1, d))
    return PolynomialFamily(polys)


def sup_short(
    u_d: float, d: int, N: int, budget: BudgetSpec = BudgetSpec(), strict: bool = False
) -> SupEstimate:
    """``sup_{v in T_{d-1}} |S_d((v, u_d); N)|``, a majorant of ``sup_K |S_d(u; K, N)|``."""
    if d < 2:
        raise ValueError("short-interval sums need d >= 2")
    return sup_fiber(short_family(d), WeightSpec.unit(), (u_d,), N, budget, strict=strict)
