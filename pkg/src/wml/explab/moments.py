"""Monte Carlo and quadrature estimates of sup-moments and superlevel measures."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft

from ..discrepancy import sup_discrepancy_fiber
from ..errors import KOutOfRange, ValidityWarning
from ..polyfam import PolynomialFamily, WeightSpec
from ..sumeval import eval_points, value_table
from ..supopt import BudgetSpec, sup_fiber, sup_short
from .sampling import (
    binomial_stderr,
    fsum_mean,
    mean_stderr,
    parallel_chunks,
    uniform_points,
)

__all__ = [
    "SupSamples",
    "MomentEstimate",
    "MeasureEstimate",
    "sample_sup",
    "sample_short",
    "sample_discrepancy",
    "moment_from_samples",
    "measure_from_samples",
    "moment_estimate",
    "measure_superlevel",
    "short_moment_estimate",
    "discrepancy_moment_estimate",
    "torus_grid_moment",
]


@dataclass(frozen=True)
class SupSamples:
    """Per-sample sup brackets; ``points`` are the sampled base coordinates."""

    points: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    exhausted: np.ndarray
    N: int
    seed: int
    evaluations: int = 0

    def __len__(self):
        return len(self.lower)


@dataclass(frozen=True)
class MomentEstimate:
    mean_lower: float
    mean_upper: float
    stderr: float
    samples: int
    rho: float
    N: int
    seed: Optional[int]
    stderr_lower: float = 0.0
    method: str = "monte_carlo"
    exhausted: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MeasureEstimate:
    fraction_lower: float
    fraction_upper: float
    threshold: float
    samples: int
    stderr: float
    seed: int
    N: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def _check_k(family: PolynomialFamily, k: int):
    if not 1 <= k <= family.d:
        raise KOutOfRange(f"k={k} outside [1, {family.d}]")


def _collect(chunks, N, seed) -> SupSamples:
    if not chunks:
        empty = np.zeros(0)
        return SupSamples(np.zeros((0, 0)), empty, empty, np.zeros(0, bool), N, seed)
    pts = np.concatenate([c[0] for c in chunks])
    lo = np.concatenate([c[1] for c in chunks])
    up = np.concatenate([c[2] for c in chunks])
    ex = np.concatenate([c[3] for c in chunks])
    ev = sum(c[4] for c in chunks)
    return SupSamples(pts, lo, up, ex, N, seed, ev)


def sample_sup(
    family: PolynomialFamily,
    weights: WeightSpec,
    k: int,
    N: int,
    samples: int,
    budget: BudgetSpec = BudgetSpec(),
    seed: int = 0,
    K: int = 0,
    threads: int = 1,
) -> SupSamples:
    """``sup_y |T(x, y; N)|`` brackets at ``samples`` uniform points ``x`` of ``T_k``.

    Upper ends are clipped at ``sum |a_n|``, which is itself a valid majorant.
    """
    _check_k(family, k)
    cap = weights.abs_sum(K, N)

    if k == family.d:

        def work(a, b):
            pts = uniform_points(seed, a, b, k)
            vals, _ = eval_points(family, weights, pts, N, K)
            mag = np.minimum(np.abs(vals), cap)
            return pts, mag, mag.copy(), np.zeros(b - a, bool), b - a

    else:

        def work(a, b):
            pts = uniform_points(seed, a, b, k)
            lo = np.empty(b - a)
            up = np.empty(b - a)
            ex = np.zeros(b - a, bool)
            ev = 0
            for i, x in enumerate(pts):
                est = sup_fiber(family, weights, tuple(x), N, budget, K)
                lo[i] = min(est.lower, cap)
                up[i] = min(est.upper, cap)
                ex[i] = est.exhausted
                ev += est.evaluations
            return pts, lo, up, ex, ev

    return _collect(parallel_chunks(work, samples, threads), N, seed)


def sample_short(
    d: int,
    N: int,
    samples: int,
    budget: BudgetSpec = BudgetSpec(),
    seed: int = 0,
    threads: int = 1,
) -> SupSamples:
    """``sup_v |S_d((v, u_d); N)|`` at uniform leading coefficients ``u_d``."""

    def work(a, b):
        pts = uniform_points(seed, a, b, 1)
        lo = np.empty(b - a)
        up = np.empty(b - a)
        ex = np.zeros(b - a, bool)
        ev = 0
        for i, (u,) in enumerate(pts):
            est = sup_short(float(u), d, N, budget)
            lo[i] = min(est.lower, N)
            up[i] = min(est.upper, N)
            ex[i] = est.exhausted
            ev += est.evaluations
        return pts, lo, up, ex, ev

    return _collect(parallel_chunks(work, samples, threads), N, seed)


def sample_discrepancy(
    family: PolynomialFamily,
    k: int,
    N: int,
    samples: int,
    budget: BudgetSpec = BudgetSpec(),
    seed: int = 0,
    K: int = 0,
    threads: int = 1,
) -> SupSamples:
    """``sup_y D(x, y; N)`` brackets at uniform ``x``; upper ends clipped at ``N``."""
    _check_k(family, k)

    def work(a, b):
        pts = uniform_points(seed, a, b, k)
        lo = np.empty(b - a)
        up = np.empty(b - a)
        ex = np.zeros(b - a, bool)
        ev = 0
        for i, x in enumerate(pts):
            est = sup_discrepancy_fiber(family, tuple(x), N, budget, K)
            lo[i] = min(est.lower, N)
            up[i] = min(est.upper, N)
            ex[i] = est.exhausted
            ev += est.evaluations
        return pts, lo, up, ex, ev

    return _collect(parallel_chunks(work, samples, threads), N, seed)


def moment_from_samples(samp: SupSamples, rho: float) -> MomentEstimate:
    if rho <= 0:
        raise ValueError("rho must be positive")
    lo = samp.lower**rho
    up = samp.upper**rho
    m_lo = fsum_mean(lo)
    m_up = fsum_mean(up)
    return MomentEstimate(
        mean_lower=m_lo,
        mean_upper=max(m_up, m_lo),
        stderr=mean_stderr(up, m_up),
        samples=len(samp),
        rho=float(rho),
        N=samp.N,
        seed=samp.seed,
        stderr_lower=mean_stderr(lo, m_lo),
        exhausted=int(np.count_nonzero(samp.exhausted)),
    )


def measure_from_samples(samp: SupSamples, threshold: float) -> MeasureEstimate:
    n = len(samp)
    hi = int(np.count_nonzero(samp.upper >= threshold))
    lo = int(np.count_nonzero(samp.lower >= threshold))
    f_up = hi / n if n else 0.0
    return MeasureEstimate(
        fraction_lower=lo / n if n else 0.0,
        fraction_upper=f_up,
        threshold=float(threshold),
        samples=n,
        stderr=binomial_stderr(f_up, n),
        seed=samp.seed,
        N=samp.N,
    )


def measure_superlevel(
    family: PolynomialFamily,
    weights: WeightSpec,
    k: int,
    N: int,
    threshold,
    samples: int,
    budget: BudgetSpec = BudgetSpec(),
    seed: int = 0,
    K: int = 0,
    threads: int = 1,
):
    """Fraction of ``x`` in ``T_k`` whose fibre supremum reaches ``threshold``.

    A sequence of thresholds returns one estimate per threshold, all read off
    the same samples.
    """
    many = isinstance(threshold, (list, tuple, np.ndarray))
    levels = [float(t) for t in (threshold if many else [threshold])]
    for t in levels:
        if not 1 <= t <= N:
            raise ValueError(f"threshold {t} outside [1, N={N}]")
    samp = sample_sup(family, weights, k, N, samples, budget, seed, K, threads)
    out = [measure_from_samples(samp, t) for t in levels]
    return out if many else out[0]


def _rho_max(family: PolynomialFamily, k: int) -> int:
    d = family.d
    return d * (d + 1) + d - k


def torus_grid_moment(
    family: PolynomialFamily, weights: WeightSpec, rho: float, N: int, points: int, K: int = 0
) -> float:
    """Trapezoid rule for ``int_{T_d} |T(u; N)|^rho du`` with ``points`` nodes per axis.

    All node values come from one inverse FFT of the coefficients scattered at
    ``phi_j(n) mod points``.  Exact for ``rho = 2`` once ``points`` exceeds the
    spread of every ``phi_j``, and for even ``rho`` under the matching condition.
    """
    sizes = (int(points),) * family.d
    total = math.prod(sizes)
    a = np.asarray(weights.values(K, N), dtype=complex)
    idx = np.ravel_multi_index(
        tuple(value_table(p, K, N).residues(M) for p, M in zip(family.polys, sizes)), sizes
    )
    spec = np.bincount(idx, weights=a.real, minlength=total) + 1j * np.bincount(
        idx, weights=a.imag, minlength=total
    )
    grid = scipy.fft.ifftn(spec.reshape(sizes), norm="forward")
    return math.fsum(np.abs(grid).ravel() ** rho) / total


def moment_estimate(
    family: PolynomialFamily,
    weights: WeightSpec,
    k: int,
    rho: float,
    N: int,
    samples: int = 1000,
    budget: BudgetSpec = BudgetSpec(),
    seed: int = 0,
    K: int = 0,
    threads: int = 1,
    method: str = "monte_carlo",
    quadrature_points: int = 20000,
) -> MomentEstimate:
    """``int_{T_k} sup_y |T(x, y; N)|^rho dx`` with lower/upper accounting.

    ``method="quadrature"`` replaces the random sample with the uniform
    periodic grid of ``quadrature_points`` nodes per axis of ``T_k``.
    """
    _check_k(family, k)
    if rho <= 0:
        raise ValueError("rho must be positive")
    if rho > _rho_max(family, k):
        warnings.warn(
            f"rho={rho} exceeds 2s+d-k={_rho_max(family, k)}; no bound is claimed there",
            ValidityWarning,
            stacklevel=2,
        )
    if method == "monte_carlo":
        return moment_from_samples(
            sample_sup(family, weights, k, N, samples, budget, seed, K, threads), rho
        )
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    M = int(quadrature_points)
    nodes = M**k
    if nodes > budget.max_evaluations:
        raise ValueError(f"{nodes} quadrature nodes exceed the evaluation budget")
    if k == family.d:
        value = torus_grid_moment(family, weights, rho, N, M, K)
        return MomentEstimate(value, value, 0.0, nodes, float(rho), N, None, method="quadrature")

    axes = np.meshgrid(*[np.arange(M) / M] * k, indexing="ij")
    grid = np.stack(axes, axis=-1).reshape(-1, k)
    cap = weights.abs_sum(K, N)

    def work(a, b):
        lo = np.empty(b - a)
        up = np.empty(b - a)
        ex = np.zeros(b - a, bool)
        ev = 0
        for i, x in enumerate(grid[a:b]):
            est = sup_fiber(family, weights, tuple(x), N, budget, K)
            lo[i], up[i], ex[i] = min(est.lower, cap), min(est.upper, cap), est.exhausted
            ev += est.evaluations
        return grid[a:b], lo, up, ex, ev

    samp = _collect(parallel_chunks(work, nodes, threads), N, None)
    est = moment_from_samples(samp, rho)
    return MomentEstimate(
        est.mean_lower,
        est.mean_upper,
        0.0,
        nodes,
        float(rho),
        N,
        None,
        method="quadrature",
        exhausted=est.exhausted,
    )


def short_moment_estimate(
    d: int,
    rho: float,
    N: int,
    samples: int = 1000,
    budget: BudgetSpec = BudgetSpec(),
    seed: int = 0,
    threads: int = 1,
) -> MomentEstimate:
    """``int_{T_d} sup_K |S_d(u; K, N)|^rho du`` majorised through the fibre supremum.

    The integrand depends on ``u`` only through ``u_d``, so only that
    coordinate is sampled.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if rho > d * d + 2 * d - 1:
        warnings.warn(f"rho={rho} exceeds d^2+2d-1", ValidityWarning, stacklevel=2)
    return moment_from_samples(sample_short(d, N, samples, budget, seed, threads), rho)


def discrepancy_moment_estimate(
    family: PolynomialFamily,
    k: int,
    rho: float,
    N: int,
    samples: int = 200,
    budget: BudgetSpec = BudgetSpec(),
    seed: int = 0,
    K: int = 0,
    threads: int = 1,
) -> MomentEstimate:
    """``int_{T_k} sup_y D(x, y; N)^rho dx`` with lower/upper accounting."""
    if rho < 1:
        raise ValueError("rho must be at least 1")
    if rho > _rho_max(family, k):
        warnings.warn(
            f"rho={rho} exceeds 2s+d-k={_rho_max(family, k)}", ValidityWarning, stacklevel=2
        )
    return moment_from_samples(
        sample_discrepancy(family, k, N, samples, budget, seed, K, threads), rho
    )
