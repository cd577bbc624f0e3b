"""Exact scalars over the span {1, log(1 - theta/2), log(2/theta - 1)}.

Every entry of the tilde quadratic forms is a rational combination of 1 and
two logarithms that depend only on theta.  ``LogLinear`` keeps the three
rational coordinates exactly; transcendental numbers enter only through
``eval_interval``, which bounds the logarithms from below and above and does
the rest of the arithmetic in exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import mpmath
from mpmath import libmp

DEFAULT_PRECISION = 256

# ---------------------------------------------------------------------------
# rationals


def parse_rational(s) -> Fraction:
    """Accept "p/q", "p", ints and Fractions."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s.strip())
    raise TypeError(f"cannot read a rational from {s!r}")


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def check_theta(theta) -> Fraction:
    theta = parse_rational(theta)
    if not 0 < theta <= 1:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    return theta


@lru_cache(maxsize=None)
def harmonic(n: int) -> Fraction:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return Fraction(0)
    return harmonic(n - 1) + Fraction(1, n)


# ---------------------------------------------------------------------------
# log-linear scalars


@dataclass(frozen=True, slots=True)
class LogLinear:
    """q0 + q1 * log(1 - theta/2) + q2 * log(2/theta - 1)."""

    q0: Fraction = Fraction(0)
    q1: Fraction = Fraction(0)
    q2: Fraction = Fraction(0)

    @classmethod
    def rational(cls, x) -> "LogLinear":
        return cls(Fraction(x), Fraction(0), Fraction(0))

    @property
    def is_rational(self) -> bool:
        return self.q1 == 0 and self.q2 == 0

    def __add__(self, other: "LogLinear") -> "LogLinear":
        if not isinstance(other, LogLinear):
            return NotImplemented
        return LogLinear(self.q0 + other.q0, self.q1 + other.q1, self.q2 + other.q2)

    def __sub__(self, other: "LogLinear") -> "LogLinear":
        if not isinstance(other, LogLinear):
            return NotImplemented
        return LogLinear(self.q0 - other.q0, self.q1 - other.q1, self.q2 - other.q2)

    def __neg__(self) -> "LogLinear":
        return LogLinear(-self.q0, -self.q1, -self.q2)

    def __mul__(self, r) -> "LogLinear":
        if isinstance(r, LogLinear):
            raise TypeError("products of log-bearing scalars are not representable")
        r = Fraction(r)
        return LogLinear(self.q0 * r, self.q1 * r, self.q2 * r)

    __rmul__ = __mul__

    def to_strings(self) -> list[str]:
        return [format_rational(self.q0), format_rational(self.q1), format_rational(self.q2)]

    @classmethod
    def from_strings(cls, triple) -> "LogLinear":
        q0, q1, q2 = (parse_rational(s) for s in triple)
        return cls(q0, q1, q2)


ZERO = LogLinear()


# ---------------------------------------------------------------------------
# x0-integrals: mu_{m,n} and lambda_n


def _check_mu_args(m: int, n: int):
    if m < 1:
        raise ValueError(f"mu needs m >= 1, got {m}")
    if n < 0:
        raise ValueError(f"mu needs n >= 0, got {n}")


def mu(m: int, n: int, theta) -> LogLinear:
    """int_0^1 x^(m-1) (1-x)^n / (2/theta - x) dx by polynomial division.

    With c = 2/theta and p(x) = x^(m-1) (1-x)^n, write p(x) = (x - c) q(x) + p(c);
    the integral is -int_0^1 q - p(c) log(1 - 1/c).
    """
    _check_mu_args(m, n)
    theta = check_theta(theta)
    c = 2 / theta
    p = [0] * (m - 1) + [(-1) ** j * comb(n, j) for j in range(n + 1)]
    # synthetic division by (x - c), highest degree first
    acc = Fraction(0)
    quotient = []
    for a in reversed(p):
        acc = acc * c + a
        quotient.append(acc)
    remainder = quotient.pop()  # p(c)
    quotient.reverse()  # quotient[j] is the coefficient of x^j
    integral_q = sum((a / (j + 1) for j, a in enumerate(quotient)), Fraction(0))
    return LogLinear(-integral_q, -remainder, Fraction(0))


def lambda_n(n: int, theta) -> LogLinear:
    """int_0^1 ((1-x)^n - 1) / (x (2/theta - x)) dx = (theta/2)(mu(1, n) - H_n + log(1 - theta/2))."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    theta = check_theta(theta)
    m1 = mu(1, n, theta)
    return (theta / 2) * LogLinear(m1.q0 - harmonic(n), m1.q1 + 1, Fraction(0))


class XIntegralTable:
    """Memoized mu_{m,n} and lambda_n at a fixed theta, built by recurrences.

    mu(1, 0) = log(c/(c-1)), mu(1, n) = 1/n - (c-1) mu(1, n-1) and
    mu(m+1, n) = c mu(m, n) - (m-1)! n! / (m+n)!  with c = 2/theta.
    """

    def __init__(self, theta):
        self.theta = check_theta(theta)
        self.c = 2 / self.theta
        self._mu: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
        self._base: list[tuple[Fraction, Fraction]] = [(Fraction(0), Fraction(-1))]
        self._lam: dict[int, tuple[Fraction, Fraction]] = {}

    def _mu_first(self, n: int) -> tuple[Fraction, Fraction]:
        base = self._base
        cm1 = self.c - 1
        while len(base) <= n:
            j = len(base)
            a0, a1 = base[-1]
            base.append((Fraction(1, j) - cm1 * a0, -cm1 * a1))
        return base[n]

    def mu_pair(self, m: int, n: int) -> tuple[Fraction, Fraction]:
        """(q0, q1) of mu_{m,n}."""
        key = (m, n)
        hit = self._mu.get(key)
        if hit is not None:
            return hit
        _check_mu_args(m, n)
        if m == 1:
            val = self._mu_first(n)
        else:
            a0, a1 = self.mu_pair(m - 1, n)
            beta = Fraction(factorial(m - 2) * factorial(n), factorial(m - 1 + n))
            val = (self.c * a0 - beta, self.c * a1)
        self._mu[key] = val
        return val

    def lam_pair(self, n: int) -> tuple[Fraction, Fraction]:
        hit = self._lam.get(n)
        if hit is not None:
            return hit
        a0, a1 = self._mu_first(n)
        half = self.theta / 2
        val = (half * (a0 - harmonic(n)), half * (a1 + 1))
        self._lam[n] = val
        return val

    def mu(self, m: int, n: int) -> LogLinear:
        a0, a1 = self.mu_pair(m, n)
        return LogLinear(a0, a1, Fraction(0))

    def lam(self, n: int) -> LogLinear:
        a0, a1 = self.lam_pair(n)
        return LogLinear(a0, a1, Fraction(0))


# ---------------------------------------------------------------------------
# rigorous enclosures


def _raw_to_fraction(raw) -> Fraction:
    p, q = libmp.to_rational(raw)
    return Fraction(p, q)


def _round_fraction(x: Fraction, prec: int, rnd: str):
    return libmp.from_rational(x.numerator, x.denominator, prec, rnd)


@lru_cache(maxsize=256)
def log_bounds(x: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds on log(x), x > 0 rational, about ``prec`` bits tight.

    The argument is rounded outward, mpmath's directed-rounding log is applied,
    and the result is widened by a further 4 ulps as a safety margin.
    """
    if x <= 0:
        raise ValueError("log of a nonpositive number")
    if x == 1:
        return Fraction(0), Fraction(0)
    lo = libmp.mpf_log(_round_fraction(x, prec + 8, libmp.round_floor), prec, libmp.round_floor)
    hi = libmp.mpf_log(_round_fraction(x, prec + 8, libmp.round_ceiling), prec, libmp.round_ceiling)
    lo_f, hi_f = _raw_to_fraction(lo), _raw_to_fraction(hi)
    mag = max(abs(lo_f), abs(hi_f))
    slack = mag * Fraction(4, 2 ** prec)
    return lo_f - slack, hi_f + slack


def log_constants(theta, prec: int):
    """Bounds on (log(1 - theta/2), log(2/theta - 1))."""
    theta = check_theta(theta)
    return log_bounds(1 - theta / 2, prec), log_bounds(2 / theta - 1, prec)


def _mul_bounds(q: Fraction, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    return (q * lo, q * hi) if q >= 0 else (q * hi, q * lo)


def enclose(s: LogLinear, theta, prec: int = DEFAULT_PRECISION) -> tuple[Fraction, Fraction]:
    """Exact rational bounds [lo, hi] containing the value of ``s``."""
    (l1lo, l1hi), (l2lo, l2hi) = log_constants(theta, prec)
    a_lo, a_hi = _mul_bounds(s.q1, l1lo, l1hi)
    b_lo, b_hi = _mul_bounds(s.q2, l2lo, l2hi)
    return s.q0 + a_lo + b_lo, s.q0 + a_hi + b_hi


def _decimal_floor(x: Fraction, digits: int) -> str:
    scaled = math.floor(x * 10 ** digits)
    return _fixed(scaled, digits)


def _decimal_ceil(x: Fraction, digits: int) -> str:
    scaled = math.ceil(x * 10 ** digits)
    return _fixed(scaled, digits)


def _fixed(scaled: int, digits: int) -> str:
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}" if digits else f"{sign}{s}"


@dataclass(frozen=True)
class Interval:
    """Closed interval [lower, upper] with exact rational endpoints.

    ``precision`` records the bit precision of the computation that produced it.
    """

    lo: Fraction
    hi: Fraction
    precision: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @classmethod
    def from_bounds(cls, lo, hi, precision: int) -> "Interval":
        # outward rounding to `precision` bits keeps endpoint sizes bounded
        lo = _raw_to_fraction(_round_fraction(Fraction(lo), precision, libmp.round_floor))
        hi = _raw_to_fraction(_round_fraction(Fraction(hi), precision, libmp.round_ceiling))
        return cls(lo, hi, precision)

    @property
    def lower(self) -> mpmath.mpf:
        return mpmath.mp.make_mpf(_round_fraction(self.lo, self.precision, libmp.round_floor))

    @property
    def upper(self) -> mpmath.mpf:
        return mpmath.mp.make_mpf(_round_fraction(self.hi, self.precision, libmp.round_ceiling))

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        x = _as_fraction(x)
        return self.lo <= x <= self.hi

    def overlaps(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def positive(self) -> bool:
        return self.lo > 0

    def negative(self) -> bool:
        return self.hi < 0

    def __float__(self) -> float:
        return float(self.mid)

    def decimal(self, digits: int | None = None) -> tuple[str, str]:
        """Outward-rounded decimal strings for the endpoints."""
        if digits is None:
            digits = max(1, int(self.precision * 0.30103))
        return _decimal_floor(self.lo, digits), _decimal_ceil(self.hi, digits)

    def __str__(self) -> str:
        lo, hi = self.decimal(min(30, max(1, int(self.precision * 0.30103))))
        return f"[{lo}, {hi}]"


def _as_fraction(x) -> Fraction:
    if isinstance(x, mpmath.mpf):
        return _raw_to_fraction(x._mpf_)
    return Fraction(x)


def eval_interval(s: LogLinear, theta, precision: int = DEFAULT_PRECISION) -> Interval:
    lo, hi = enclose(s, theta, precision)
    return Interval.from_bounds(lo, hi, precision)


def approximate(s: LogLinear, theta, bits: int = 64, start: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Midpoint of ``s`` with at least ``bits`` correct relative bits.

    The precision doubles until the enclosure is relatively tight; exact
    cancellation between the coordinates can demand far more than ``bits``.
    """
    prec = start
    while True:
        lo, hi = enclose(s, theta, prec)
        mid = (lo + hi) / 2
        if lo == hi or (mid != 0 and (hi - lo) <= abs(mid) * Fraction(1, 2 ** bits)):
            return mpmath.mp.make_mpf(_round_fraction(mid, bits + 16, libmp.round_nearest))
        if prec > 1 << 16:
            raise ArithmeticError("value indistinguishable from zero")
        prec *= 2


# ---------------------------------------------------------------------------
# Gauss hypergeometric series (independent route)


def hyp2f1_series(a: int, b: int, c: int, z, precision: int = DEFAULT_PRECISION) -> Interval:
    """Enclosure of 2F1(a, b; c; z) for positive integers with c > b and 0 < z <= 1/2.

    Partial sums are exact; the tail after N terms is bounded by a geometric
    majorant with ratio z (a + N)/(N + 1), valid because (b+n)/(c+n) < 1.
    """
    z = parse_rational(z)
    if not (a >= 1 and b >= 1 and c > b):
        raise ValueError("need positive integers a, b and c > b")
    if not 0 < z <= Fraction(1, 2):
        raise ValueError("z must lie in (0, 1/2]")
    eps = Fraction(1, 2 ** (precision + 4))
    term = Fraction(1)
    total = Fraction(0)
    n = 0
    while True:
        total += term
        term = term * (a + n) * (b + n) * z / ((c + n) * (n + 1))
        n += 1
        ratio = z * Fraction(a + n, n + 1)
        if ratio < 1:
            tail = term / (1 - ratio)
            if tail <= eps * total:
                break
    return Interval.from_bounds(total, total + tail, precision)
