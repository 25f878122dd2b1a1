"""Evaluation of weighted polynomial exponential sums on the torus.

Three engines share one contract:

``direct``
    Each phase ``u_j * phi_j(n) mod 1`` is formed from error-free partial
    products (26-bit splits of both factors), so the only phase error is the
    final few additions.
``fixed_point``
    Coordinates are rounded to 63 fractional bits and phases are integer
    multiply-adds that wrap modulo ``2^64``; exact mod 1 for the rounded
    coordinate.
``difference_table``
    ``e(P(n))`` is advanced with the forward-difference recurrence
    (``deg P`` complex multiplications per step) in extended precision and
    resynchronised from exactly reduced differences every ``R`` steps.

Every result carries an absolute worst-case ``error_bound``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, PhasePrecisionLoss
from .polyfam import IntPolynomial, PolynomialFamily, WeightSpec

__all__ = [
    "ENGINES",
    "RESYNC_PERIOD",
    "TorusVector",
    "SumValue",
    "eval_sum",
    "eval_points",
    "reduced_phases",
    "frac_times_int",
    "shift_coefficients",
    "compare_engines",
    "value_table",
]

ENGINES = ("direct", "fixed_point", "difference_table")
RESYNC_PERIOD = 1024

_EPS = np.finfo(np.float64).eps
_EPS_LD = float(np.finfo(np.longdouble).eps)
_TWO63 = 1 << 63
_MASK63 = np.uint64(_TWO63 - 1)
_MASK64 = (1 << 64) - 1
_LIMB_BITS = 26
_SPLITTER = float(2**27 + 1)
_TWO_PI_LD = 2 * np.longdouble("3.14159265358979323846264338327950288")
# float64 work arrays per chunk in batched evaluation
_CHUNK_ELEMS = 1 << 21


def _reduce(c: float) -> float:
    r = c - math.floor(c)
    return 0.0 if r >= 1.0 else r


@dataclass(frozen=True)
class TorusVector:
    """Point of the unit torus; coordinates are reduced to ``[0, 1)`` on construction."""

    coords: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(_reduce(float(c)) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def negated(self) -> "TorusVector":
        return TorusVector(tuple(-c for c in self.coords))


def _as_torus(v) -> TorusVector:
    return v if isinstance(v, TorusVector) else TorusVector(tuple(v))


@dataclass(frozen=True)
class SumValue:
    value: complex
    N: int
    engine: str
    error_bound: float
    K: int = 0

    def __abs__(self) -> float:
        return abs(self.value)


# ---------------------------------------------------------------------------
# exact value tables


class ValueTable:
    """Exact values of one polynomial on ``n = K+1 .. K+N`` in the forms the engines need."""

    def __init__(self, poly: IntPolynomial, K: int, N: int):
        vals = poly.values(K, N)
        self.values = vals
        self.poly = poly
        self.K = K
        self.N = N
        self.max_abs = max((abs(v) for v in vals), default=0)
        self.abs = np.array([float(abs(v)) for v in vals], dtype=np.float64)
        self.as_float = np.array([float(v) for v in vals], dtype=np.float64)
        self.mod64 = np.array([v & _MASK64 for v in vals], dtype=np.uint64)
        nlimbs = max(1, -(-self.max_abs.bit_length() // _LIMB_BITS))
        limbs = np.zeros((nlimbs, N), dtype=np.float64)
        mask = (1 << _LIMB_BITS) - 1
        for i, v in enumerate(vals):
            sign = -1.0 if v < 0 else 1.0
            m = abs(v)
            for l in range(nlimbs):
                limbs[l, i] = sign * float(m & mask)
                m >>= _LIMB_BITS
        self.limbs = limbs
        self._mod_cache = {}

    def residues(self, M: int) -> np.ndarray:
        """``m(n) mod M`` as an int64 array."""
        if M not in self._mod_cache:
            self._mod_cache[M] = np.array([v % M for v in self.values], dtype=np.int64)
        return self._mod_cache[M]


@lru_cache(maxsize=64)
def value_table(poly: IntPolynomial, K: int, N: int) -> ValueTable:
    return ValueTable(poly, K, N)


def _split(u: np.ndarray):
    c = _SPLITTER * u
    hi = c - (c - u)
    return hi, u - hi


def _two_sum(s: np.ndarray, c: np.ndarray, t: np.ndarray):
    """Add ``t`` into the running sum ``s`` keeping the rounding error in ``c``."""
    total = s + t
    bb = total - s
    c += (s - (total - bb)) + (t - bb)
    return total


def _frac_terms(u: np.ndarray, table: ValueTable):
    """Exact pieces of ``u * m(n) mod 1``: each is an exact product minus its nearest integer."""
    hi, lo = _split(u)
    for l in range(table.limbs.shape[0]):
        scale = float(2 ** (_LIMB_BITS * l))
        for part in (hi, lo):
            t = (part * scale) * table.limbs[l]
            yield t - np.round(t)


def _compensated_phases(pairs, rows: int, N: int) -> np.ndarray:
    s = np.zeros((rows, N))
    c = np.zeros((rows, N))
    for u, table in pairs:
        for term in _frac_terms(u, table):
            s = _two_sum(s, c, term)
            s -= np.round(s)
    s += c
    s -= np.floor(s)
    return s


def frac_times_int(u, table: ValueTable) -> np.ndarray:
    """``u * m(n) mod 1`` for every tabulated integer ``m(n)``, from exact partial products.

    ``u`` may be a scalar or a 1-D array of ``r`` reals; the result has shape
    ``(N,)`` or ``(r, N)``.
    """
    u = np.asarray(u, dtype=np.float64)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)[:, None]
    acc = _compensated_phases([(u, table)], u.shape[0], table.N)
    return acc[0] if scalar else acc


def _direct_phase_error(nlimbs_total: int) -> float:
    # 2 fractional parts per limb and coordinate plus the final reductions
    return (2 * nlimbs_total + 2) * _EPS


def reduced_phases(coords, tables: Sequence[ValueTable]) -> np.ndarray:
    """``sum_j u_j phi_j(n) mod 1`` with the direct engine's exact products.

    ``coords`` has shape ``(len(tables),)`` or ``(r, len(tables))``.  The
    pieces are added with compensation, so the result is within a couple of
    ulps of the exact fractional part.
    """
    coords = np.asarray(coords, dtype=np.float64)
    scalar = coords.ndim == 1
    coords = np.atleast_2d(coords)
    pairs = [(coords[:, j : j + 1], tab) for j, tab in enumerate(tables)]
    acc = _compensated_phases(pairs, coords.shape[0], tables[0].N)
    return acc[0] if scalar else acc


def _quantize(u: float):
    """63-bit fixed-point representation and its exact quantisation error."""
    scaled = u * float(_TWO63)
    q = int(round(scaled)) % _TWO63
    err = abs(Fraction(u) - Fraction(int(round(scaled)), _TWO63))
    return q, float(err)


def _tables_for(family: PolynomialFamily, K: int, N: int):
    return [value_table(p, K, N) for p in family.polys]


def _sum_error(abs_weights: np.ndarray, per_term: np.ndarray) -> float:
    n = len(abs_weights)
    total = math.fsum(abs_weights * per_term)
    # sequential (BLAS) accumulation: gamma_n bound
    total += (n + 8) * _EPS * math.fsum(abs_weights)
    return total * (1 + 1e-6)


def _engine_direct(family, weights, U, N, K):
    tables = _tables_for(family, K, N)
    a = weights.values(K, N)
    absa = np.abs(a)
    nl = sum(t.limbs.shape[0] for t in tables)
    err = _sum_error(absa, np.full(N, 2 * math.pi * _direct_phase_error(nl) + 4 * _EPS))
    rows = max(1, _CHUNK_ELEMS // max(N, 1))
    out = np.empty(U.shape[0], dtype=complex)
    for s in range(0, U.shape[0], rows):
        ph = reduced_phases(U[s : s + rows], tables)
        out[s : s + rows] = np.exp(2j * np.pi * ph) @ a
    return out, np.full(U.shape[0], err)


def _engine_fixed(family, weights, U, N, K):
    tables = _tables_for(family, K, N)
    a = weights.values(K, N)
    absa = np.abs(a)
    out = np.empty(U.shape[0], dtype=complex)
    errs = np.empty(U.shape[0])
    for r in range(U.shape[0]):
        acc = np.zeros(N, dtype=np.uint64)
        qerr = np.zeros(N)
        for j, tab in enumerate(tables):
            q, e = _quantize(float(U[r, j]))
            acc += np.uint64(q) * tab.mod64
            if e:
                qerr += e * tab.abs
        theta = (acc & _MASK63).astype(np.float64) * (1.0 / _TWO63)
        out[r] = np.exp(2j * np.pi * theta) @ a
        errs[r] = _sum_error(absa, 2 * math.pi * (qerr + _EPS) + 4 * _EPS)
    return out, errs


def _forward_differences(poly: IntPolynomial, n0: int, order: int):
    vals = [poly(n0 + t) for t in range(order + 1)]
    diffs = []
    for _ in range(order + 1):
        diffs.append(vals[0])
        vals = [b - a for a, b in zip(vals, vals[1:])]
    return diffs


def _engine_difference(family, weights, U, N, K, period=RESYNC_PERIOD):
    a = weights.values(K, N)
    absa = np.abs(a)
    D = max(family.degrees)
    tables = _tables_for(family, K, N)
    # worst-case relative drift per block: c * sum_i B^i
    B = min(period, max(N, 1))
    drift = 8 * _EPS_LD * sum(float(B) ** i for i in range(D + 1))
    out = np.empty(U.shape[0], dtype=complex)
    errs = np.empty(U.shape[0])
    a_ld = a.astype(np.clongdouble)
    for r in range(U.shape[0]):
        quant = [_quantize(float(U[r, j])) for j in range(family.d)]
        qerr = np.zeros(N)
        for (q, e), tab in zip(quant, tables):
            if e:
                qerr += e * tab.abs
        total = np.clongdouble(0)
        start = 0
        while start < N:
            n0 = K + start + 1
            blen = min(period, N - start)
            thetas = [0] * (D + 1)
            for (q, _), poly in zip(quant, family.polys):
                for i, dv in enumerate(_forward_differences(poly, n0, D)):
                    thetas[i] = (thetas[i] + q * dv) % _TWO63
            E = []
            for th in thetas:
                t = np.longdouble(th) / np.longdouble(_TWO63)
                if t >= 0.5:
                    t -= 1
                ang = _TWO_PI_LD * t
                E.append(np.clongdouble(np.cos(ang) + 1j * np.sin(ang)))
            seq = np.full(blen, E[D], dtype=np.clongdouble)
            # high degrees can overflow the products; the error bound then rejects the value
            with np.errstate(over="ignore", invalid="ignore"):
                for i in range(D - 1, -1, -1):
                    nxt = np.empty(blen, dtype=np.clongdouble)
                    nxt[0] = E[i]
                    if blen > 1:
                        nxt[1:] = E[i] * np.cumprod(seq[:-1])
                    seq = nxt
                total += np.sum(a_ld[start : start + blen] * seq)
            start += blen
        out[r] = complex(total)
        errs[r] = _sum_error(absa, drift + 2 * math.pi * qerr + 2 * _EPS)
    return out, errs


_ENGINE_FUNCS = {
    "direct": _engine_direct,
    "fixed_point": _engine_fixed,
    "difference_table": _engine_difference,
}


def eval_points(
    family: PolynomialFamily,
    weights: WeightSpec,
    U,
    N: int,
    K: int = 0,
    engine: str = "direct",
    certify: bool = True,
):
    """Batched sums at the rows of ``U`` (shape ``(r, d)``); returns ``(values, error_bounds)``."""
    if engine not in _ENGINE_FUNCS:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    U = np.atleast_2d(np.asarray(U, dtype=np.float64))
    if U.shape[1] != family.d:
        raise DimensionMismatch(f"points have {U.shape[1]} coordinates, family has {family.d}")
    if N < 0:
        raise ValueError("N must be non-negative")
    if N == 0:
        weights.values(K, 0)
        return np.zeros(U.shape[0], dtype=complex), np.zeros(U.shape[0])
    U = U - np.floor(U)
    values, errs = _ENGINE_FUNCS[engine](family, weights, U, N, K)
    if certify:
        limit = 1e-6 * N
        bad = np.nonzero(errs > limit)[0]
        if len(bad):
            raise PhasePrecisionLoss(
                f"{engine} engine error bound {errs[bad[0]]:.3g} exceeds {limit:.3g} at N={N}"
            )
    return values, errs


def eval_sum(
    family: PolynomialFamily,
    weights: WeightSpec,
    x,
    y=(),
    N: int = 1,
    K: int = 0,
    engine: str = "direct",
) -> SumValue:
    """``sum_{n=K+1}^{K+N} a_n e(sum_j x_j phi_j(n) + sum_j y_j phi_{k+j}(n))``."""
    x = _as_torus(x)
    y = _as_torus(y)
    if x.dim + y.dim != family.d:
        raise DimensionMismatch(
            f"x has {x.dim} and y has {y.dim} coordinates; family has {family.d}"
        )
    u = np.array(x.coords + y.coords, dtype=np.float64)
    values, errs = eval_points(family, weights, u[None, :], N, K, engine)
    return SumValue(complex(values[0]), N, engine, float(errs[0]), K)


def shift_coefficients(u, K: int) -> tuple:
    """Coefficients of ``sum_j u_j (T+K)^j`` as ``(v_0, ..., v_{d-1}, u_d)``.

    ``v_i`` are reduced mod 1 exactly; the leading coefficient is passed through.
    """
    u = [float(c) for c in u]
    d = len(u)
    out = []
    for i in range(d):
        acc = 0.0
        for j in range(max(i, 1), d + 1):
            m = comb(j, i) * K ** (j - i)
            tab = ValueTable(IntPolynomial((m,)), 0, 1)
            acc += float(frac_times_int(u[j - 1], tab)[0])
        out.append(_reduce(acc))
    out.append(u[-1])
    return tuple(out)


def compare_engines(
    family: PolynomialFamily,
    weights: WeightSpec,
    N: int,
    trials: int = 10,
    seed: int = 0,
    points=None,
    K: int = 0,
) -> float:
    """Largest pairwise engine disagreement over ``trials`` random points (plus any given ``points``)."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    U = rng.random((trials, family.d))
    if points is not None:
        U = np.vstack([U, np.atleast_2d(np.asarray(points, dtype=np.float64))])
    results = [eval_points(family, weights, U, N, K, e)[0] for e in ENGINES]
    worst = 0.0
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            worst = max(worst, float(np.max(np.abs(results[i] - results[j]))))
    return worst
