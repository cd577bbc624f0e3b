"""Quadratic forms A_I, A_J, A_L~, A_M~ and A_J~ for a polynomial basis.

Entries are exact ``LogLinear`` scalars.  The tilde forms are assembled from
cached inner sums over the x0-integrals mu and lambda, so the cost of an entry
does not grow with the length of the alternating binomial sums.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Sequence

from .basis import BasisTerm, as_terms, q_eval
from .scalars import (
    DEFAULT_PRECISION,
    Interval,
    LogLinear,
    XIntegralTable,
    check_theta,
    enclose,
    format_rational,
    parse_rational,
)


@dataclass(frozen=True)
class SieveConfig:
    k: int
    theta: Fraction
    nu: int = 1
    nterms: int = 1

    def __post_init__(self):
        object.__setattr__(self, "theta", check_theta(self.theta))
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.nu < 1:
            raise ValueError("nu must be positive")
        if self.nterms < 1:
            raise ValueError("nterms must be positive")


@dataclass(frozen=True)
class QuadraticForm:
    entries: tuple[tuple[LogLinear, ...], ...]
    kind: str = ""
    k: int | None = None
    theta: Fraction | None = None
    terms: tuple[BasisTerm, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij) -> LogLinear:
        i, j = ij
        return self.entries[i][j]

    def is_symmetric(self) -> bool:
        n = self.dim
        return all(self.entries[i][j] == self.entries[j][i] for i in range(n) for j in range(i))

    def is_rational(self) -> bool:
        return all(e.is_rational for row in self.entries for e in row)

    def rational_matrix(self) -> list[list[Fraction]]:
        if not self.is_rational():
            raise ValueError(f"form {self.kind} has logarithmic entries")
        return [[e.q0 for e in row] for row in self.entries]

    def value(self, a: Sequence) -> LogLinear:
        """a^T A a, exactly."""
        a = [Fraction(x) for x in a]
        if len(a) != self.dim:
            raise ValueError(f"vector length {len(a)} does not match form dimension {self.dim}")
        s0 = s1 = s2 = Fraction(0)
        for i, ai in enumerate(a):
            if not ai:
                continue
            r0 = r1 = r2 = Fraction(0)
            for aj, e in zip(a, self.entries[i]):
                if aj:
                    r0 += aj * e.q0
                    r1 += aj * e.q1
                    r2 += aj * e.q2
            s0 += ai * r0
            s1 += ai * r1
            s2 += ai * r2
        return LogLinear(s0, s1, s2)

    def __add__(self, other: "QuadraticForm") -> "QuadraticForm":
        return self._combine(other, lambda x, y: x + y)

    def scale(self, r) -> "QuadraticForm":
        return QuadraticForm(tuple(tuple(e * r for e in row) for row in self.entries),
                             self.kind, self.k, self.theta, self.terms)

    def scale_log2(self, r) -> "QuadraticForm":
        """Multiply a rational form by r * log(2/theta - 1)."""
        r = Fraction(r)
        rows = tuple(tuple(LogLinear(Fraction(0), Fraction(0), x * r) for x in row)
                     for row in self.rational_matrix())
        return QuadraticForm(rows, self.kind, self.k, self.theta, self.terms)

    def _combine(self, other, op) -> "QuadraticForm":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        rows = tuple(tuple(op(x, y) for x, y in zip(r1, r2))
                     for r1, r2 in zip(self.entries, other.entries))
        return QuadraticForm(rows, self.kind, self.k, self.theta, self.terms)

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "theta": None if self.theta is None else format_rational(self.theta),
            "terms": [[t.b, t.c] for t in self.terms],
            "entries": [[e.to_strings() for e in row] for row in self.entries],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "QuadraticForm":
        theta = rec.get("theta")
        return cls(
            tuple(tuple(LogLinear.from_strings(e) for e in row) for row in rec["entries"]),
            rec.get("kind", ""),
            rec.get("k"),
            None if theta is None else parse_rational(theta),
            as_terms(rec.get("terms", ())),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_record())


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return factorial(n)


def _rational_form(rows, kind, k, theta, terms) -> QuadraticForm:
    return QuadraticForm(tuple(tuple(LogLinear.rational(x) for x in row) for row in rows),
                         kind, k, theta, terms)


def i_entry(k: int, ti: BasisTerm, tj: BasisTerm) -> Fraction:
    b = ti.b + tj.b
    c = ti.c + tj.c
    return Fraction(_fact(b) * q_eval(c, k), _fact(k + b + 2 * c))


def j_entry(k: int, ti: BasisTerm, tj: BasisTerm) -> Fraction:
    bi, ci, bj, cj = ti.b, ti.c, tj.b, tj.c
    denom = _fact(k + bi + bj + 2 * ci + 2 * cj + 1)
    total = Fraction(0)
    for c1 in range(ci + 1):
        for c2 in range(cj + 1):
            si, sj = 2 * ci - 2 * c1, 2 * cj - 2 * c2
            gamma = Fraction(
                _fact(bi) * _fact(bj) * _fact(si) * _fact(sj) * _fact(bi + bj + si + sj + 2),
                _fact(bi + si + 1) * _fact(bj + sj + 1),
            )
            total += comb(ci, c1) * comb(cj, c2) * gamma * q_eval(c1 + c2, k - 1)
    return total / denom


def build_I(k: int, terms) -> QuadraticForm:
    if k < 2:
        raise ValueError("k must be at least 2")
    terms = as_terms(terms)
    if not terms:
        raise ValueError("empty basis")
    rows = [[i_entry(k, ti, tj) for tj in terms] for ti in terms]
    return _rational_form(rows, "I", k, None, terms)


def build_J(k: int, terms) -> QuadraticForm:
    if k < 2:
        raise ValueError("k must be at least 2")
    terms = as_terms(terms)
    if not terms:
        raise ValueError("empty basis")
    rows = [[j_entry(k, ti, tj) for tj in terms] for ti in terms]
    return _rational_form(rows, "J", k, None, terms)


class _TildeSums:
    """Inner alternating sums shared by every entry at fixed (k, theta).

    lam_sum(D, C) = sum_d (-1)^d binom(D, d) lambda_{N+d} / (N+d)
    mu_sum(m, E, C) = sum_e (-1)^e binom(E, e) mu_{m, N+e} / (N+e)
    with N = k - 1 + 2C.
    """

    def __init__(self, k: int, theta: Fraction):
        self.k = k
        self.table = XIntegralTable(theta)
        self._lam: dict = {}
        self._mu: dict = {}

    def lam_sum(self, D: int, C: int) -> tuple[Fraction, Fraction]:
        key = (D, C)
        hit = self._lam.get(key)
        if hit is None:
            N = self.k - 1 + 2 * C
            s0 = s1 = Fraction(0)
            for d in range(D + 1):
                w = Fraction((-1) ** d * comb(D, d), N + d)
                l0, l1 = self.table.lam_pair(N + d)
                s0 += w * l0
                s1 += w * l1
            hit = self._lam[key] = (s0, s1)
        return hit

    def mu_sum(self, m: int, E: int, C: int) -> tuple[Fraction, Fraction]:
        key = (m, E, C)
        hit = self._mu.get(key)
        if hit is None:
            N = self.k - 1 + 2 * C
            s0 = s1 = Fraction(0)
            for e in range(E + 1):
                w = Fraction((-1) ** e * comb(E, e), N + e)
                u0, u1 = self.table.mu_pair(m, N + e)
                s0 += w * u0
                s1 += w * u1
            hit = self._mu[key] = (s0, s1)
        return hit


def _tilde_raw(sums: _TildeSums, ti: BasisTerm, tj: BasisTerm):
    """Unsymmetrized coefficients of a_i a_j in L~ and in M~ / (theta/2)."""
    k = sums.k
    bi, ci, bj, cj = ti.b, ti.c, tj.b, tj.c
    L0 = L1 = M0 = M1 = Fraction(0)
    for c1 in range(ci + 1):
        for c2 in range(cj + 1):
            C = c1 + c2
            si, sj = 2 * ci - 2 * c1, 2 * cj - 2 * c2
            w = Fraction(comb(ci, c1) * comb(cj, c2) * q_eval(C, k - 1), _fact(k + 2 * C - 2))
            delta = Fraction(_fact(bi) * _fact(bj) * _fact(si) * _fact(sj),
                             _fact(bi + si + 1) * _fact(bj + sj + 1))
            g0, g1 = sums.lam_sum(bi + bj + si + sj + 2, C)
            lam0, lam1 = delta * g0, delta * g1

            eps_base = Fraction(_fact(bj) * _fact(sj), _fact(bj + sj + 1))
            e0 = e1 = Fraction(0)
            for b1 in range(bi + 1):
                coef = (-1) ** b1 * comb(bi, b1) * eps_base / (b1 + si + 1)
                u0, u1 = sums.mu_sum(b1 + si + 1, bi - b1 + bj + sj + 1, C)
                e0 += coef * u0
                e1 += coef * u1

            f0 = f1 = Fraction(0)
            for b1 in range(bi + 1):
                for b2 in range(bj + 1):
                    coef = Fraction((-1) ** (b1 + b2) * comb(bi, b1) * comb(bj, b2),
                                    (b1 + si + 1) * (b2 + sj + 1))
                    u0, u1 = sums.mu_sum(si + sj + b1 + b2 + 2, bi + bj - b1 - b2, C)
                    f0 += coef * u0
                    f1 += coef * u1

            L0 += w * (lam0 - e0)
            L1 += w * (lam1 - e1)
            M0 += w * (lam0 - 2 * e0 + f0)
            M1 += w * (lam1 - 2 * e1 + f1)
    return (L0, L1), (M0, M1)


_TILDE_CACHE: dict = {}


def tilde_raw_matrices(k: int, theta, terms):
    """Raw (asymmetric) coefficient arrays f_L(i, j) and f_M(i, j) as LogLinear."""
    theta = check_theta(theta)
    terms = as_terms(terms)
    key = (k, theta, terms)
    hit = _TILDE_CACHE.get(key)
    if hit is not None:
        return hit
    if k < 2:
        raise ValueError("k must be at least 2")
    if not terms:
        raise ValueError("empty basis")
    sums = _TildeSums(k, theta)
    half = theta / 2
    n = len(terms)
    fL = [[None] * n for _ in range(n)]
    fM = [[None] * n for _ in range(n)]
    for i, ti in enumerate(terms):
        for j, tj in enumerate(terms):
            (l0, l1), (m0, m1) = _tilde_raw(sums, ti, tj)
            fL[i][j] = LogLinear(l0, l1, Fraction(0))
            fM[i][j] = LogLinear(half * m0, half * m1, Fraction(0))
    _TILDE_CACHE[key] = (fL, fM)
    return fL, fM


def symmetrize(raw) -> tuple[tuple[LogLinear, ...], ...]:
    n = len(raw)
    half = Fraction(1, 2)
    return tuple(tuple((raw[i][j] + raw[j][i]) * half for j in range(n)) for i in range(n))


def build_Ltilde(k: int, theta, terms) -> QuadraticForm:
    theta = check_theta(theta)
    terms = as_terms(terms)
    fL, _ = tilde_raw_matrices(k, theta, terms)
    return QuadraticForm(symmetrize(fL), "Ltilde", k, theta, terms)


def build_Mtilde(k: int, theta, terms) -> QuadraticForm:
    theta = check_theta(theta)
    terms = as_terms(terms)
    _, fM = tilde_raw_matrices(k, theta, terms)
    return QuadraticForm(symmetrize(fM), "Mtilde", k, theta, terms)


def build_Jtilde(k: int, theta, terms, *, J: QuadraticForm | None = None) -> QuadraticForm:
    """A_J~ = -theta k A_L~ + (theta^2/4) log(2/theta - 1) k A_J + k A_M~."""
    theta = check_theta(theta)
    terms = as_terms(terms)
    L = build_Ltilde(k, theta, terms)
    M = build_Mtilde(k, theta, terms)
    if J is None:
        J = build_J(k, terms)
    out = L.scale(-theta * k) + M.scale(k)
    if theta != 1:  # log(2/theta - 1) vanishes at theta = 1
        out = out + J.scale_log2(theta * theta / 4 * k)
    return QuadraticForm(out.entries, "Jtilde", k, theta, terms)


@dataclass
class SieveForms:
    """All quadratic forms for one (k, theta, basis)."""

    k: int
    theta: Fraction
    terms: tuple[BasisTerm, ...]
    I: QuadraticForm
    J: QuadraticForm
    Ltilde: QuadraticForm
    Mtilde: QuadraticForm
    Jtilde: QuadraticForm
    extra: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.terms)


def build_forms(k: int, theta, terms) -> SieveForms:
    theta = check_theta(theta)
    terms = as_terms(terms)
    I = build_I(k, terms)
    J = build_J(k, terms)
    L = build_Ltilde(k, theta, terms)
    M = build_Mtilde(k, theta, terms)
    Jt = build_Jtilde(k, theta, terms, J=J)
    return SieveForms(k, theta, terms, I, J, L, M, Jt)


def floor_excess(a: Sequence, forms: SieveForms) -> LogLinear:
    """a^T A_J~ a - k (theta^2/4) log(2/theta - 1) a^T A_J a, which is >= 0 for every a."""
    a = [Fraction(x) for x in a]
    shift = forms.theta * forms.theta / 4 * forms.k * forms.J.value(a).q0
    return forms.Jtilde.value(a) - LogLinear(Fraction(0), Fraction(0), shift)


@dataclass(frozen=True)
class RatioResult:
    numerator: LogLinear  # a^T A_J~ a
    denominator: Fraction  # (theta/2) a^T A_I a
    R: Interval


def evaluate_ratio(a: Sequence, forms: SieveForms, precision: int = DEFAULT_PRECISION) -> RatioResult:
    """R_k(F) = J~_k(F) / ((theta/2) I_k(F)) for the coefficient vector ``a``."""
    a = [Fraction(x) for x in a]
    if len(a) != forms.dim:
        raise ValueError(f"expected {forms.dim} coefficients, got {len(a)}")
    if not any(a):
        raise ValueError("coefficient vector is zero")
    num = forms.Jtilde.value(a)
    den_ll = forms.I.value(a)
    den = forms.theta / 2 * den_ll.q0
    if den <= 0:
        raise ArithmeticError("(theta/2) a^T A_I a is not positive; A_I is malformed")
    lo, hi = enclose(num, forms.theta, precision)
    return RatioResult(num, den, Interval.from_bounds(lo / den, hi / den, precision))


def leading_minors(matrix: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Exact leading principal minors by fraction-valued Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in matrix]
    n = len(a)
    minors = []
    det = Fraction(1)
    for p in range(n):
        if a[p][p] == 0:
            # a zero pivot with no row exchange means this leading minor vanishes
            minors.append(Fraction(0))
            minors.extend(_minors_bruteforce(matrix, p + 1))
            return minors
        det *= a[p][p]
        minors.append(det)
        for r in range(p + 1, n):
            f = a[r][p] / a[p][p]
            if f:
                for c in range(p, n):
                    a[r][c] -= f * a[p][c]
    return minors


def _minors_bruteforce(matrix, start: int) -> list[Fraction]:
    return [_det([row[:m] for row in matrix[:m]]) for m in range(start + 1, len(matrix) + 1)]


def _det(matrix) -> Fraction:
    a = [[Fraction(x) for x in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for p in range(n):
        pivot = next((r for r in range(p, n) if a[r][p] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != p:
            a[p], a[pivot] = a[pivot], a[p]
            det = -det
        det *= a[p][p]
        for r in range(p + 1, n):
            f = a[r][p] / a[p][p]
            if f:
                for c in range(p, n):
                    a[r][c] -= f * a[p][c]
    return det
