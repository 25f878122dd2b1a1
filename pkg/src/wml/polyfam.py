"""Integer polynomial families, their Wronskian and the closed-form exponents.

Family ordering is significant: ``sigma_k`` sums the degrees of the polynomials
*after* position ``k``, so ``"T^2; T"`` and ``"T; T^2"`` are different inputs.
The order-free variant ``sigma_tilde_k`` sums the ``d - k`` largest degrees.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConstantPolynomial,
    DuplicatePolynomial,
    EmptyFamily,
    KOutOfRange,
    NuOutOfRange,
    ParseError,
    WeightTableTooShort,
)

__all__ = [
    "IntPolynomial",
    "PolynomialFamily",
    "WeightSpec",
    "ExponentReport",
    "parse_polynomial",
    "parse_family",
    "classical_family",
    "wronskian",
    "exponent_report",
    "individual_bound",
    "format_fraction",
]


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(int(c) for c in coeffs)


@dataclass(frozen=True)
class IntPolynomial:
    """Univariate polynomial with exact integer coefficients, constant term first."""

    coefficients: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _trim(self.coefficients))

    @classmethod
    def monomial(cls, power: int, coeff: int = 1) -> "IntPolynomial":
        return cls((0,) * power + (coeff,))

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        a, b = self.coefficients, other.coefficients
        if len(a) < len(b):
            a, b = b, a
        return IntPolynomial(tuple(x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)))

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(tuple(-c for c in self.coefficients))

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPolynomial(tuple(c * other for c in self.coefficients))
        a, b = self.coefficients, other.coefficients
        if not a or not b:
            return IntPolynomial()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return IntPolynomial(tuple(out))

    __rmul__ = __mul__

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * c for i, c in enumerate(self.coefficients) if i))

    def __call__(self, n: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * n + c
        return acc

    def shift(self, K: int) -> "IntPolynomial":
        """The polynomial ``p(T + K)``."""
        out = IntPolynomial()
        base = IntPolynomial((K, 1))
        for c in reversed(self.coefficients):
            out = out * base + IntPolynomial((c,))
        return out

    def values(self, start: int, count: int) -> list:
        """Exact values ``p(start + 1), ..., p(start + count)`` as Python ints."""
        return [self(n) for n in range(start + 1, start + count + 1)]

    def __str__(self) -> str:
        if not self.coefficients:
            return "0"
        parts = []
        for power in range(self.degree, -1, -1):
            c = self.coefficients[power]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if power == 0:
                body = str(mag)
            else:
                var = "T" if power == 1 else f"T^{power}"
                body = var if mag == 1 else f"{mag}*{var}"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


_TERM = re.compile(r"([+-]?)(\d*)\s*\*?\s*(T(?:\s*\^\s*(\d+))?)?")


def parse_polynomial(text: str) -> IntPolynomial:
    """Parse e.g. ``"3T^2 - 2*T + 1"``; the variable letter is ``T``."""
    src = text.replace(" ", "").replace("\t", "")
    if not src:
        raise ParseError(f"empty polynomial in {text!r}")
    pos = 0
    coeffs: dict = {}
    while pos < len(src):
        m = _TERM.match(src, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"cannot parse {text!r} at offset {pos}")
        sign, digits, var, power = m.groups()
        if not digits and not var:
            raise ParseError(f"dangling sign in {text!r}")
        if pos > 0 and not sign:
            raise ParseError(f"missing operator in {text!r} at offset {pos}")
        c = int(digits) if digits else 1
        if sign == "-":
            c = -c
        p = 0 if not var else (int(power) if power else 1)
        coeffs[p] = coeffs.get(p, 0) + c
        pos = m.end()
    top = max(coeffs)
    return IntPolynomial(tuple(coeffs.get(i, 0) for i in range(top + 1)))


@dataclass(frozen=True)
class PolynomialFamily:
    """Ordered tuple of distinct nonconstant integer polynomials."""

    polys: tuple

    def __post_init__(self):
        polys = tuple(self.polys)
        object.__setattr__(self, "polys", polys)
        if not polys:
            raise EmptyFamily("a family needs at least one polynomial")
        for p in polys:
            if p.degree < 1:
                raise ConstantPolynomial(f"polynomial {p} is constant")
        if len(set(polys)) != len(polys):
            raise DuplicatePolynomial("family polynomials must be pairwise distinct")

    @property
    def d(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple:
        return tuple(p.degree for p in self.polys)

    def is_classical(self) -> bool:
        """True when the polynomials are exactly the monomials T, ..., T^d in some order."""
        monos = {IntPolynomial.monomial(i) for i in range(1, self.d + 1)}
        return set(self.polys) == monos

    def __str__(self) -> str:
        return "; ".join(str(p) for p in self.polys)


def parse_family(text: str, d: Optional[int] = None) -> PolynomialFamily:
    """Parse a semicolon-separated family such as ``"T^3; T^2; T"``."""
    chunks = [c.strip() for c in text.split(";")]
    chunks = [c for c in chunks if c]
    if not chunks:
        raise EmptyFamily("family description is empty")
    polys = []
    for chunk in chunks:
        p = parse_polynomial(chunk)
        if p.degree < 1:
            raise ConstantPolynomial(f"{chunk!r} is constant")
        polys.append(p)
    if d is not None and len(polys) != d:
        raise ParseError(f"expected {d} polynomials, got {len(polys)}")
    return PolynomialFamily(tuple(polys))


def classical_family(d: int, order: Optional[Sequence[int]] = None) -> PolynomialFamily:
    """The monomials ``T^i``; default order is ``T, T^2, ..., T^d``."""
    order = range(1, d + 1) if order is None else order
    return PolynomialFamily(tuple(IntPolynomial.monomial(i) for i in order))


@dataclass(frozen=True)
class WeightSpec:
    """Weights ``a_n``: either all ones or a finite table ``a_1..a_L``."""

    kind: str = "unit"
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("unit", "table"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "table":
            if self.table is None:
                raise ValueError("table weights need a table")
            object.__setattr__(self, "table", tuple(complex(a) for a in self.table))

    @classmethod
    def unit(cls) -> "WeightSpec":
        return cls("unit")

    @classmethod
    def from_table(cls, values) -> "WeightSpec":
        return cls("table", tuple(values))

    def values(self, start: int, count: int) -> np.ndarray:
        """Weights for ``n = start+1 .. start+count`` as a complex array."""
        if self.kind == "unit":
            return np.ones(count, dtype=complex)
        if start < 0 or start + count > len(self.table):
            raise WeightTableTooShort(
                f"weights needed for n={start + 1}..{start + count}, table has {len(self.table)}"
            )
        return np.asarray(self.table[start : start + count], dtype=complex)

    def abs_sum(self, start: int, count: int) -> float:
        return float(math.fsum(np.abs(self.values(start, count))))

    def max_abs(self, start: int, count: int) -> float:
        if count == 0:
            return 0.0
        return float(np.max(np.abs(self.values(start, count))))


# ---------------------------------------------------------------------------
# Wronskian


@lru_cache(maxsize=256)
def _wronskian_cached(family: PolynomialFamily) -> IntPolynomial:
    d = family.d
    # rows: derivative order j, columns: polynomial i (determinant is transpose-invariant)
    rows = []
    current = list(family.polys)
    for _ in range(d):
        rows.append(current)
        current = [p.derivative() for p in current]
    # subset expansion along rows: minors[S] = det of rows 0..|S|-1 over columns S
    minors = {0: IntPolynomial((1,))}
    for r in range(d):
        nxt = {}
        for mask, minor in minors.items():
            if minor.is_zero():
                continue
            for c in range(d):
                bit = 1 << c
                if mask & bit:
                    continue
                above = bin(mask >> (c + 1)).count("1")
                term = rows[r][c] * minor
                if above % 2:
                    term = -term
                new = mask | bit
                nxt[new] = nxt[new] + term if new in nxt else term
        minors = nxt
    return minors.get((1 << d) - 1, IntPolynomial())


def wronskian(family: PolynomialFamily) -> IntPolynomial:
    """Exact ``det(phi_i^{(j-1)}(T))``; identically zero iff the zero polynomial is returned."""
    return _wronskian_cached(family)


# ---------------------------------------------------------------------------
# Exponents


def format_fraction(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class ExponentReport:
    d: int
    k: int
    theta: Fraction
    s: Fraction
    sigma_k: int
    sigma_tilde_k: int
    sigma_0: int
    delta: int
    mu: Fraction
    mu_V: Fraction
    mu_theta: Fraction
    delta_W: Fraction
    delta_CS: Fraction
    rho_max: Fraction
    mu_d: Optional[Fraction] = None
    wronskian_nonzero: bool = True
    warnings: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if isinstance(value, Fraction):
                value = format_fraction(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[name] = value
        return out


def exponent_report(
    family: PolynomialFamily,
    k: int,
    theta=Fraction(1),
    check_wronskian: bool = True,
) -> ExponentReport:
    """All exponents of the hybrid mean value bounds as exact rationals.

    With ``check_wronskian`` the report still comes back for a degenerate
    family, but ``wronskian_nonzero`` is False and a warning is attached.
    """
    d = family.d
    if not 1 <= k <= d:
        raise KOutOfRange(f"k={k} outside [1, {d}]")
    theta = Fraction(theta)
    if not 0 < theta <= 1:
        raise ValueError(f"theta={theta} outside (0, 1]")

    degs = family.degrees
    s = Fraction(d * (d + 1), 2)
    sigma_k = sum(degs[k:])
    sigma_tilde = sum(sorted(degs)[k:])
    sigma_0 = sum(degs)
    delta = min(degs)

    denom = 2 * s + d - k
    mu = (s + sigma_k + d - k) / denom
    mu_V = (s + sigma_tilde + d - k) / denom
    mu_theta = (s + sigma_0 + d - (delta + 1) * theta * k) / (2 * s + d - k * theta)
    delta_W = Fraction(2 * sigma_k + d - k + 1) / (2 * s + d - k + 1)
    delta_CS = min(Fraction(2 * sigma_k + d - k) / denom, (sigma_k + 1) / s)
    mu_d = None
    if sorted(degs) == list(range(1, d + 1)):
        mu_d = 1 - Fraction(d, d * d + 2 * d - 1)

    warnings = []
    nonzero = True
    if check_wronskian:
        nonzero = not wronskian(family).is_zero()
        if not nonzero:
            warnings.append("Wronskian vanishes identically; the bounds do not apply")
    return ExponentReport(
        d=d,
        k=k,
        theta=theta,
        s=s,
        sigma_k=sigma_k,
        sigma_tilde_k=sigma_tilde,
        sigma_0=sigma_0,
        delta=delta,
        mu=mu,
        mu_V=mu_V,
        mu_theta=mu_theta,
        delta_W=delta_W,
        delta_CS=delta_CS,
        rho_max=denom,
        mu_d=mu_d,
        wronskian_nonzero=nonzero,
        warnings=tuple(warnings),
    )


def individual_bound(d: int, nu: int, q: int, N: int, eps: float = 0.0) -> float:
    """Majorant shape ``N^{1+eps} (1/q + 1/N + q N^-nu)^{1/(d(d-1))}`` with the constant set to 1.

    Valid when ``|u_nu - a/q| <= 1/q^2`` with ``gcd(a, q) = 1``; checking that
    is the caller's job.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 2 <= nu <= d:
        raise NuOutOfRange(f"nu={nu} outside [2, {d}]")
    if q < 1 or N < 1:
        raise ValueError("q and N must be positive")
    inner = 1.0 / q + 1.0 / N + q * float(N) ** (-nu)
    return float(N) ** (1.0 + eps) * inner ** (1.0 / (d * (d - 1)))
