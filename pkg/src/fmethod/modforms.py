"""Truncated q-series, Eisenstein series and the Rankin-Cohen bracket.

Derivatives use D = q d/dq rather than d/dz = 2 pi i q d/dq, so a bracket of
degree a differs from the classical one by (2 pi i)^a.  All comparisons that
matter here are projective, and the coefficients stay rational.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .coeff import context
from .weyl import Poly

__all__ = [
    "QSeries",
    "bernoulli",
    "delta",
    "derive",
    "eisenstein",
    "is_proportional",
    "rc_bracket",
    "rc_symbol",
    "RC_VARS",
]

RC_VARS = ("xip", "xipp")


@dataclass(frozen=True)
class QSeries:
    coeffs: tuple          # Fractions, index i = coefficient of q^i
    weight: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, c, N, weight=0):
        return cls((Fraction(c),) + (Fraction(0),) * N, weight)

    def _check(self, other):
        if self.N != other.N:
            raise ValueError(f"truncation mismatch: {self.N} vs {other.N}")

    def truncate(self, N: int) -> "QSeries":
        if N > self.N:
            raise ValueError("cannot extend a truncated series")
        return QSeries(self.coeffs[: N + 1], self.weight)

    def __add__(self, other):
        self._check(other)
        return QSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.weight)

    def __sub__(self, other):
        self._check(other)
        return QSeries(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.weight)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "QSeries":
        c = Fraction(c)
        return QSeries(tuple(c * x for x in self.coeffs), self.weight)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        self._check(other)
        N = self.N
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * (N + 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j in range(N + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
        return QSeries(tuple(out), self.weight + other.weight)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def with_weight(self, k: int) -> "QSeries":
        return QSeries(self.coeffs, k)

    def __str__(self):
        return ", ".join(str(c) for c in self.coeffs)

    def to_json(self):
        return {"weight": self.weight, "N": self.N, "coeffs": [str(c) for c in self.coeffs]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        coeffs = tuple(Fraction(c) for c in data["coeffs"])
        if len(coeffs) != data["N"] + 1:
            raise ValueError("coefficient count does not match N")
        return cls(coeffs, int(data["weight"]))


@lru_cache(maxsize=None)
def bernoulli(m: int) -> Fraction:
    """B_m from sum_{j<=m} C(m+1, j) B_j = 0 (so B_1 = -1/2)."""
    if m < 0:
        raise ValueError("index must be nonnegative")
    if m == 0:
        return Fraction(1)
    s = sum(comb(m + 1, j) * bernoulli(j) for j in range(m))
    return -s / (m + 1)


def _sigma(k: int, n: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def eisenstein(k: int, N: int) -> QSeries:
    """E_k = 1 - (2k / B_k) sum sigma_{k-1}(n) q^n, through q^N."""
    if k % 2 or k < 4:
        raise ValueError("weight must be even and at least 4")
    if N < 0:
        raise ValueError("truncation must be nonnegative")
    c = Fraction(-2 * k) / bernoulli(k)
    coeffs = [Fraction(1)] + [c * _sigma(k - 1, n) for n in range(1, N + 1)]
    return QSeries(tuple(coeffs), k)


def delta(N: int) -> QSeries:
    """Delta = q prod_{n>=1} (1 - q^n)^24, exact through q^N."""
    # work with integer lists; prod is needed to order N-1
    M = max(N - 1, 0)
    p = [0] * (M + 1)
    p[0] = 1
    for n in range(1, M + 1):
        for _ in range(24):
            for i in range(M, n - 1, -1):
                p[i] -= p[i - n]
    coeffs = [Fraction(0)] * (N + 1)
    for i in range(M + 1):
        if i + 1 <= N:
            coeffs[i + 1] = Fraction(p[i])
    return QSeries(tuple(coeffs), 12)


def derive(f: QSeries, times: int = 1) -> QSeries:
    """D = q d/dq applied ``times`` times; raises the declared weight by 2 each time."""
    coeffs = tuple(c * (i ** times) for i, c in enumerate(f.coeffs))
    return QSeries(coeffs, f.weight + 2 * times)


def _rc_coeff(k1, k2, a, l):
    return (-1) ** l * comb(k1 + a - 1, l) * comb(k2 + a - 1, a - l)


def rc_bracket(f1: QSeries, k1: int, f2: QSeries, k2: int, a: int) -> QSeries:
    """sum_l (-1)^l C(k1+a-1, l) C(k2+a-1, a-l) D^{a-l} f1 D^l f2."""
    if a < 0:
        raise ValueError("degree must be nonnegative")
    f1._check(f2)
    out = QSeries.constant(0, f1.N)
    for l in range(a + 1):
        c = _rc_coeff(k1, k2, a, l)
        if c:
            out = out + (derive(f1, a - l).with_weight(0) * derive(f2, l).with_weight(0)).scale(c)
    return out.with_weight(k1 + k2 + 2 * a)


def rc_symbol(k1: int, k2: int, a: int) -> Poly:
    """Symbol of the bracket: sum_l (-1)^l C(k1+a-1, l) C(k2+a-1, a-l) xi'^{a-l} xi''^l."""
    ctx = context(())
    terms = {}
    for l in range(a + 1):
        c = _rc_coeff(k1, k2, a, l)
        if c:
            terms[(a - l, l)] = c
    return Poly(RC_VARS, ctx, terms)


def is_proportional(f: QSeries, g: QSeries):
    """Return c with f = c g on every stored coefficient, or None."""
    f._check(g)
    c = None
    for x, y in zip(f.coeffs, g.coeffs):
        if y:
            r = x / y
            if c is None:
                c = r
            elif r != c:
                return None
        elif x:
            return None
    if c is None:
        # g is zero: only the zero series is proportional to it
        return Fraction(0) if f.is_zero() else None
    return c
