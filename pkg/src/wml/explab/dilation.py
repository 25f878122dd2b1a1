"""Quadrature check that ``x -> g x`` preserves integrals over the torus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = ["TrigPolynomial", "DilationCheck", "dilation_invariance_check"]


def _freq(m) -> tuple:
    return tuple(int(c) for c in m) if isinstance(m, (tuple, list)) else (int(m),)


@dataclass(frozen=True)
class TrigPolynomial:
    """``F(x) = sum_m c_m e(m . x)`` with integer frequency vectors ``m``."""

    terms: tuple  # ((freq tuple, complex coefficient), ...)

    @classmethod
    def from_terms(cls, terms: Mapping) -> "TrigPolynomial":
        acc = {}
        for m, c in terms.items():
            m = _freq(m)
            acc[m] = acc.get(m, 0) + complex(c)
        dims = {len(m) for m in acc}
        if len(dims) > 1:
            raise ValueError("frequencies of mixed dimension")
        return cls(tuple(sorted((m, c) for m, c in acc.items() if c != 0)))

    @classmethod
    def constant(cls, c=1.0, dim: int = 1) -> "TrigPolynomial":
        return cls.from_terms({(0,) * dim: c})

    @property
    def dim(self) -> int:
        return len(self.terms[0][0]) if self.terms else 1

    def abs_square(self) -> "TrigPolynomial":
        """``|F|^2`` expanded into frequencies."""
        out = {}
        for m1, c1 in self.terms:
            for m2, c2 in self.terms:
                m = tuple(a - b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * np.conj(c2)
        return TrigPolynomial.from_terms(out)

    def mean(self) -> complex:
        return dict(self.terms).get((0,) * self.dim, 0j)

    def grid_mean(self, M: int, g: int = 1) -> complex:
        """Trapezoid mean of ``F(g x)`` over the ``M^dim`` periodic grid.

        Phases ``g m j / M`` are reduced with integer arithmetic before
        exponentiation, so every node value is correctly rounded.
        """
        dim = self.dim
        axes = np.meshgrid(*[np.arange(M, dtype=np.int64)] * dim, indexing="ij")
        total = np.zeros(axes[0].shape, dtype=complex)
        for m, c in self.terms:
            r = np.zeros(axes[0].shape, dtype=np.int64)
            for mi, ax in zip(m, axes):
                r = (r + ((g * mi) % M) * ax) % M
            total += c * np.exp(2j * np.pi * (r / M))
        vals = total.ravel()
        return complex(math.fsum(vals.real), math.fsum(vals.imag)) / vals.size


@dataclass(frozen=True)
class DilationCheck:
    original: complex
    dilated: complex

    @property
    def difference(self) -> float:
        return abs(self.original - self.dilated)

    def __iter__(self):
        return iter((self.original, self.dilated))


def dilation_invariance_check(g: int, testfn, quadrature_points: int = 4096) -> DilationCheck:
    """``int F(x) dx`` and ``int F(g x) dx`` by the same periodic trapezoid rule.

    ``testfn`` is a ``TrigPolynomial`` or a mapping frequency -> coefficient.
    Both values are exact up to rounding once ``quadrature_points`` exceeds
    ``|g m|`` for every frequency ``m``.
    """
    if int(g) != g or g == 0:
        raise ValueError("g must be a nonzero integer")
    F = testfn if isinstance(testfn, TrigPolynomial) else TrigPolynomial.from_terms(testfn)
    M = int(quadrature_points)
    if M < 1:
        raise ValueError("quadrature_points must be positive")
    return DilationCheck(F.grid_mean(M, 1), F.grid_mean(M, int(g)))
