"""Basis monomials (1 - P1)^b * P2^c and the Q_c polynomials."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence


@dataclass(frozen=True, order=True)
class BasisTerm:
    """Exponent pair of the monomial (1 - P1)^b * P2^c."""

    b: int
    c: int

    def __post_init__(self):
        if self.b < 0 or self.c < 0:
            raise ValueError(f"exponents must be nonnegative, got ({self.b}, {self.c})")

    @property
    def degree(self) -> int:
        return self.b + 2 * self.c


@dataclass(frozen=True)
class SymmetricPolynomialSpec:
    """P = sum_i a_i (1 - P1)^{b_i} P2^{c_i}."""

    terms: tuple[BasisTerm, ...]
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(BasisTerm(*t) if not isinstance(t, BasisTerm) else t
                                                for t in self.terms))
        object.__setattr__(self, "coeffs", tuple(Fraction(a) for a in self.coeffs))
        if len(self.terms) != len(self.coeffs):
            raise ValueError("terms and coeffs differ in length")
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("basis terms must be pairwise distinct")

    @classmethod
    def single(cls, b: int, c: int, a=1) -> "SymmetricPolynomialSpec":
        return cls((BasisTerm(b, c),), (Fraction(a),))

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class QPolynomial:
    c: int
    coefficients: tuple[int, ...]  # coefficient of x^r, r = 0..c

    def __call__(self, x):
        acc = 0
        for a in reversed(self.coefficients):
            acc = acc * x + a
        return acc


@lru_cache(maxsize=None)
def _composition_weight(c: int, r: int) -> int:
    """Sum over compositions c = c_1 + ... + c_r (c_i >= 1) of prod (2 c_i)! / c_i!."""
    if r == 0:
        return 1 if c == 0 else 0
    total = 0
    for first in range(1, c - r + 2):
        total += factorial(2 * first) // factorial(first) * _composition_weight(c - first, r - 1)
    return total


def _falling_factorial_coeffs(r: int) -> list[int]:
    # x (x - 1) ... (x - r + 1) in the monomial basis
    poly = [1]
    for j in range(r):
        nxt = [0] * (len(poly) + 1)
        for i, a in enumerate(poly):
            nxt[i + 1] += a
            nxt[i] -= j * a
        poly = nxt
    return poly


_Q_CACHE: dict[int, QPolynomial] = {}
_Q_LOCK = threading.Lock()


def q_polynomial(c: int) -> QPolynomial:
    """Q_c(x) = c! sum_r binom(x, r) W(c, r) with exact integer coefficients."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    cached = _Q_CACHE.get(c)
    if cached is not None:
        return cached
    if c == 0:
        q = QPolynomial(0, (1,))
    else:
        coeffs = [Fraction(0)] * (c + 1)
        for r in range(1, c + 1):
            scale = Fraction(factorial(c) * _composition_weight(c, r), factorial(r))
            for i, a in enumerate(_falling_factorial_coeffs(r)):
                coeffs[i] += scale * a
        assert all(a.denominator == 1 for a in coeffs)
        q = QPolynomial(c, tuple(int(a) for a in coeffs))
    with _Q_LOCK:
        _Q_CACHE.setdefault(c, q)
    return _Q_CACHE[c]


def q_eval(c: int, k: int) -> int:
    if k < 0:
        raise ValueError("k must be nonnegative")
    return q_polynomial(c)(k)


def basis_sequence(m: int) -> list[BasisTerm]:
    """First ``m`` exponent pairs ordered by degree b + 2c, then by b descending."""
    if m < 1:
        raise ValueError("m must be positive")
    out: list[BasisTerm] = []
    d = 0
    while len(out) < m:
        for c in range(d // 2 + 1):
            out.append(BasisTerm(d - 2 * c, c))
        d += 1
    return out[:m]


def as_terms(terms: Sequence) -> tuple[BasisTerm, ...]:
    return tuple(t if isinstance(t, BasisTerm) else BasisTerm(*t) for t in terms)

