"""Maximize R_k(F), rationalize the maximizer, and certify R_k(F) > nu."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from mpmath import libmp

from .basis import BasisTerm, as_terms, basis_sequence
from .forms import QuadraticForm, SieveConfig, SieveForms, build_forms, evaluate_ratio
from .scalars import (
    DEFAULT_PRECISION,
    Interval,
    LogLinear,
    approximate,
    enclose,
    format_rational,
    parse_rational,
)

log = logging.getLogger(__name__)

DEFAULT_DENOMINATOR_BOUND = 10 ** 21
MAX_PRECISION_BITS = 1024

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


class NotPositiveDefinite(ArithmeticError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass
class RayleighResult:
    vector: np.ndarray  # float64 copy of the maximizer
    vector_mp: list  # the same vector at working precision
    R_estimate: float
    R_mp: mpmath.mpf
    iterations: int


def _mp_matrix(form: QuadraticForm, theta, bits: int):
    n = form.dim
    out = mpmath.matrix(n, n)
    for i in range(n):
        for j in range(i, n):
            v = approximate(form[i, j], theta, bits)
            out[i, j] = out[j, i] = v
    return out


def _float_start(N, Jt):
    """Top generalized eigenvector through float Cholesky whitening, or None."""
    n = N.rows
    Nf = np.array([[float(N[i, j]) for j in range(n)] for i in range(n)])
    Jf = np.array([[float(Jt[i, j]) for j in range(n)] for i in range(n)])
    try:
        C = np.linalg.cholesky(Nf).T  # N = C^T C
    except np.linalg.LinAlgError:
        return None
    Cinv = np.linalg.inv(C)
    W = Cinv.T @ Jf @ Cinv
    W = (W + W.T) / 2
    _, vecs = np.linalg.eigh(W)
    a = Cinv @ vecs[:, -1]
    if not np.all(np.isfinite(a)):
        return None
    return a


def _mp_start(N, Jt):
    try:
        C = mpmath.cholesky(N)  # N = C C^T, lower
    except (ValueError, ZeroDivisionError) as exc:
        raise NotPositiveDefinite("(theta/2) A_I failed Cholesky factorization") from exc
    Cinv = mpmath.inverse(C)
    W = Cinv * Jt * Cinv.T
    W = (W + W.T) / 2
    vals, vecs = mpmath.eigsy(W)
    top = max(range(len(vals)), key=lambda i: vals[i])
    y = vecs[:, top]
    return Cinv.T * y


def max_rayleigh(I: QuadraticForm, Jtilde: QuadraticForm, theta, precision_digits: int = 30,
                 max_iterations: int = 60) -> RayleighResult:
    """Approximate maximizer of (2/theta) a^T A_J~ a / a^T A_I a.

    Float midpoints give a starting vector via Cholesky whitening and a
    symmetric eigensolve; Rayleigh quotient iteration at higher precision then
    refines it until the quotient is stationary to ``precision_digits``.
    """
    theta = parse_rational(theta)
    bits = int(precision_digits * 3.33) + 64
    prev_prec = mpmath.mp.prec
    mpmath.mp.prec = bits
    try:
        A = _mp_matrix(I, theta, bits)
        scale = 1 / max(abs(A[i, j]) for i in range(A.rows) for j in range(A.cols))
        N = A * (scale * mpmath.mpf(theta.numerator) / (2 * theta.denominator))
        Jt = _mp_matrix(Jtilde, theta, bits) * scale
        n = N.rows

        start = _float_start(N, Jt)
        if start is None:
            log.info("float Cholesky failed; whitening at %d bits", bits)
            a = _mp_start(N, Jt)
        else:
            a = mpmath.matrix([mpmath.mpf(float(x)) for x in start])

        def rq(v):
            return (v.T * Jt * v)[0] / (v.T * N * v)[0]

        rho = rq(a)
        tol = mpmath.mpf(10) ** (-precision_digits)
        it = 0
        for it in range(1, max_iterations + 1):
            try:
                z = mpmath.lu_solve(Jt - rho * N, N * a)
            except ZeroDivisionError:
                break  # shift hit the eigenvalue exactly
            z = z / mpmath.norm(z, mpmath.inf)
            new = rq(z)
            a = z
            if abs(new - rho) <= abs(new) * tol:
                rho = new
                break
            rho = new
        else:
            raise ConvergenceError(f"Rayleigh quotient not stationary after {max_iterations} steps")

        # sign convention: the largest coordinate is positive
        big = max(range(n), key=lambda i: abs(a[i]))
        if a[big] < 0:
            a = -a
        vec_mp = [a[i] / a[big] for i in range(n)]
        return RayleighResult(np.array([float(x) for x in vec_mp]), vec_mp, float(rho), rho, it)
    finally:
        mpmath.mp.prec = prev_prec


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, mpmath.mpf):
        p, q = libmp.to_rational(x._mpf_)
        return Fraction(p, q)
    if isinstance(x, (np.floating, float)):
        return Fraction(float(x))
    return Fraction(x)


def rationalize(v: Sequence, denominator_bound: int = DEFAULT_DENOMINATOR_BOUND) -> list[Fraction]:
    """Scale so the largest coordinate is +-1, then take best rational approximations."""
    exact = [_exact(x) for x in v]
    top = max(exact, key=abs, default=Fraction(0))
    if top == 0:
        raise ValueError("cannot rationalize the zero vector")
    top = abs(top)
    return [(x / top).limit_denominator(denominator_bound) for x in exact]


@dataclass
class Certificate:
    config: SieveConfig
    terms: tuple[BasisTerm, ...]
    a: list[Fraction]
    R: Interval
    D: LogLinear  # a^T A_J~ a - nu (theta/2) a^T A_I a
    D_lower: Fraction
    D_upper: Fraction
    verdict: str
    precision_bits: int

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_record(self) -> dict:
        lo, hi = self.R.decimal(40)
        return {
            "k": self.config.k,
            "theta": format_rational(self.config.theta),
            "nu": self.config.nu,
            "terms": [[t.b, t.c] for t in self.terms],
            "coeffs": [format_rational(x) for x in self.a],
            "D": self.D.to_strings(),
            "D_lower": _sci(self.D_lower, floor=True),
            "D_upper": _sci(self.D_upper, floor=False),
            "R": {"lower": lo, "upper": hi, "precision_bits": self.R.precision},
            "verdict": self.verdict,
            "precision_bits": self.precision_bits,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Certificate":
        """Rebuild a certificate by re-verifying the recorded vector."""
        config = SieveConfig(rec["k"], parse_rational(rec["theta"]), rec["nu"], len(rec["coeffs"]))
        cert = certify(config, rec["terms"], [parse_rational(x) for x in rec["coeffs"]],
                       precision_bits=rec["precision_bits"], max_precision_bits=rec["precision_bits"])
        if cert.D.to_strings() != list(rec["D"]):
            raise ValueError("recorded D does not match the recomputed value")
        return cert


def _sci(x: Fraction, floor: bool, digits: int = 30) -> str:
    """Directed decimal rendering m.mmm...e+XX of a rational."""
    if x == 0:
        return "0"
    sign = -1 if x < 0 else 1
    ax = abs(x)
    e = ax.numerator.bit_length() - ax.denominator.bit_length()
    e10 = int(e * 0.30102999566398) - 1
    while ax >= Fraction(10) ** (e10 + 1):
        e10 += 1
    while ax < Fraction(10) ** e10:
        e10 -= 1
    scaled = x / Fraction(10) ** (e10 - digits + 1)
    # toward -inf for a lower bound, +inf for an upper bound
    m = math.floor(scaled) if floor else math.ceil(scaled)
    if abs(m) >= 10 ** digits:  # rounding carried into a new digit
        m = m // 10 if floor else -((-m) // 10)
        e10 += 1
    s = str(abs(m)).rjust(digits, "0")
    return f"{'-' if sign < 0 else ''}{s[0]}.{s[1:]}e{e10:+d}"


def certify(config: SieveConfig, terms, a: Sequence, forms: SieveForms | None = None,
            precision_bits: int = DEFAULT_PRECISION,
            max_precision_bits: int = MAX_PRECISION_BITS) -> Certificate:
    """Exact D = a^T A_J~ a - nu (theta/2) a^T A_I a, enclosed at escalating precision.

    pass iff the enclosure of D is strictly positive; fail iff it is <= 0
    entirely; otherwise inconclusive at the precision cap.
    """
    terms = as_terms(terms)
    a = [parse_rational(x) if isinstance(x, str) else Fraction(x) for x in a]
    if len(a) != len(terms):
        raise ValueError("coefficient vector and basis differ in length")
    if not any(a):
        raise ValueError("coefficient vector is zero")
    if forms is None:
        forms = build_forms(config.k, config.theta, terms)
    elif forms.terms != terms or forms.k != config.k or forms.theta != config.theta:
        raise ValueError("forms were built for a different configuration")
    num = forms.Jtilde.value(a)
    den = config.theta / 2 * forms.I.value(a).q0
    D = num - LogLinear.rational(config.nu * den)

    prec = precision_bits
    while True:
        lo, hi = enclose(D, config.theta, prec)
        if lo > 0:
            verdict = PASS
        elif hi <= 0:
            verdict = FAIL
        else:
            verdict = INCONCLUSIVE
        if verdict != INCONCLUSIVE or prec >= max_precision_bits:
            break
        log.debug("D enclosure straddles 0 at %d bits; escalating", prec)
        prec = min(2 * prec, max_precision_bits)
    R = evaluate_ratio(a, forms, prec).R
    return Certificate(SieveConfig(config.k, config.theta, config.nu, len(terms)), terms, a, R, D,
                       lo, hi, verdict, prec)


def optimize_and_certify(config: SieveConfig, denominator_bound: int = DEFAULT_DENOMINATOR_BOUND,
                         precision_bits: int = DEFAULT_PRECISION,
                         max_precision_bits: int = MAX_PRECISION_BITS,
                         escalations: int = 3, precision_digits: int = 40) -> Certificate:
    """Eigen-maximize over the canonical basis prefix, rationalize, certify."""
    terms = tuple(basis_sequence(config.nterms))
    forms = build_forms(config.k, config.theta, terms)
    best = max_rayleigh(forms.I, forms.Jtilde, config.theta, precision_digits)
    log.info("k=%d theta=%s: R_max ~ %.12f", config.k, config.theta, best.R_estimate)
    bound = denominator_bound
    cert = None
    for _ in range(escalations + 1):
        a = rationalize(best.vector_mp, bound)
        cert = certify(config, terms, a, forms, precision_bits, max_precision_bits)
        if cert.passed:
            break
        bound *= 10 ** 10
    return cert
