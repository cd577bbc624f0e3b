"""Direct numerical evaluation of the sieve integrals.

Nothing here uses the closed forms: integrals over the simplex are done with a
collapsed-coordinate Gauss-Legendre product rule or Monte Carlo, and the
x0-integrals with adaptive mpmath quadrature.  Tests compare these numbers
against the exact formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Literal

import mpmath
import numpy as np

from .basis import SymmetricPolynomialSpec, q_eval
from .scalars import check_theta, eval_interval, lambda_n, mu

MAX_DET_K = 4
MAX_MC_K = 10


class OracleRangeError(ValueError):
    """Requested dimension or degree is beyond what the oracle is sized for."""


@dataclass
class QuadratureResult:
    estimate: float
    error_bound: float  # refinement difference (deterministic) or standard error (Monte Carlo)
    samples_or_depth: int
    seed: int | None = None
    exact: Fraction | None = None

    def agrees(self, target, rel: float = 0.0, sigmas: float = 0.0) -> bool:
        target = float(target)
        slack = max(rel * abs(target), sigmas * self.error_bound)
        return abs(self.estimate - target) <= slack

    def to_record(self) -> dict:
        rec = {"estimate": self.estimate, "error": self.error_bound, "samples_or_depth": self.samples_or_depth}
        if self.seed is not None:
            rec["seed"] = self.seed
        if self.exact is not None:
            rec["exact"] = f"{self.exact.numerator}/{self.exact.denominator}"
        return rec


# ---------------------------------------------------------------------------
# exact targets from the closed forms (kept here for reporting)


def moment_complement_exact(b: int, c: int, k: int) -> Fraction:
    """int over R_k of (1 - P1)^b P2^c = b! Q_c(k) / (k + 2c + b)!."""
    return Fraction(math.factorial(b) * q_eval(c, k), math.factorial(k + 2 * c + b))


def moment_power_exact(b: int, c: int, k: int) -> Fraction:
    """int over R_k of P1^b P2^c = Q_c(k) / ((k + 2c - 1)! (k + 2c + b))."""
    return Fraction(q_eval(c, k), math.factorial(k + 2 * c - 1) * (k + 2 * c + b))


# ---------------------------------------------------------------------------
# quadrature rules


@lru_cache(maxsize=64)
def _gauss_01(order: int, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, 1]; order 1 is the midpoint rule."""
    x, w = np.polynomial.legendre.leggauss(order)
    h = 1.0 / panels
    left = np.arange(panels) * h
    nodes = (left[:, None] + (x[None, :] + 1) * h / 2).ravel()
    weights = np.tile(w * h / 2, panels)
    return nodes, weights


@lru_cache(maxsize=64)
def simplex_rule(dim: int, order: int = 10, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on R_dim = {x >= 0, sum x <= 1} through collapsed coordinates.

    x_1 = u_1, x_2 = (1 - u_1) u_2, ... with Jacobian prod_i (1 - u_i)^(dim - i).
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    t, w = _gauss_01(order, panels)
    grids = np.meshgrid(*([t] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    weight = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    x = np.empty_like(u)
    remaining = np.ones(u.shape[0])
    for i in range(dim):
        x[:, i] = remaining * u[:, i]
        if i < dim - 1:
            weight = weight * (1 - u[:, i]) ** (dim - 1 - i)
        remaining = remaining * (1 - u[:, i])
    return x, weight


def _eval_P(spec: SymmetricPolynomialSpec, P1, P2):
    out = np.zeros(np.broadcast(P1, P2).shape)
    for t, a in zip(spec.terms, spec.coeffs):
        out = out + float(a) * (1 - P1) ** t.b * P2 ** t.c
    return out


def _check_det(k: int):
    if not 1 <= k <= MAX_DET_K:
        raise OracleRangeError(f"deterministic quadrature supports 1 <= k <= {MAX_DET_K}, got k={k}")


# ---------------------------------------------------------------------------
# simplex moments


def simplex_integral(b: int, c: int, k: int, mode: Literal["P1_complement", "P1_power"] = "P1_complement",
                     order: int = 10, panels: int = 1) -> QuadratureResult:
    """int over R_k of (1 - P1)^b P2^c (complement) or P1^b P2^c (power)."""
    _check_det(k)
    if b > 3 or c > 2 or b < 0 or c < 0:
        raise OracleRangeError("simplex_integral supports 0 <= b <= 3, 0 <= c <= 2")
    if mode not in ("P1_complement", "P1_power"):
        raise ValueError(f"unknown mode {mode!r}")

    def run(o, p):
        x, w = simplex_rule(k, o, p)
        P1 = x.sum(axis=1)
        P2 = (x * x).sum(axis=1)
        base = 1 - P1 if mode == "P1_complement" else P1
        return float(np.dot(w, base ** b * P2 ** c))

    est = run(order, panels)
    ref = run(order, 2 * panels)
    exact = moment_complement_exact(b, c, k) if mode == "P1_complement" else moment_power_exact(b, c, k)
    return QuadratureResult(ref, abs(ref - est) + 1e-15, (order * 2 * panels) ** k, exact=exact)


# ---------------------------------------------------------------------------
# I_k(F), J_k(F)


def _inner_x1(spec, xprime, upper, order):
    """int_0^upper P(x1, x') dx1 for each row of ``xprime`` (upper may vary per row)."""
    t, w = _gauss_01(order, 1)
    P1p = xprime.sum(axis=1)
    P2p = (xprime * xprime).sum(axis=1)
    x1 = upper[:, None] * t[None, :]
    vals = _eval_P(spec, x1 + P1p[:, None], x1 * x1 + P2p[:, None])
    return (vals * w[None, :]).sum(axis=1) * upper


def _max_degree(spec) -> int:
    return max(t.b + 2 * t.c for t in spec.terms)


def _det_IJ(spec, k, which, order):
    if which == "I":
        x, w = simplex_rule(k, order)
        P = _eval_P(spec, x.sum(axis=1), (x * x).sum(axis=1))
        return float(np.dot(w, P * P))
    if k == 1:
        xp, w = np.zeros((1, 0)), np.ones(1)
    else:
        xp, w = simplex_rule(k - 1, order)
    inner = _inner_x1(spec, xp, 1 - xp.sum(axis=1), order)
    return float(np.dot(w, inner * inner))


def _dirichlet_points(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Uniform points in R_dim: dim + 1 exponentials normalized by their sum, last one dropped."""
    e = rng.exponential(size=(n, dim + 1))
    return e[:, :dim] / e.sum(axis=1, keepdims=True)


def integral_IJ_direct(spec: SymmetricPolynomialSpec, k: int, which: Literal["I", "J"] = "I",
                       samples: int | None = None, seed: int = 1, order: int | None = None,
                       batch: int = 1 << 16) -> QuadratureResult:
    """I_k(F) or J_k(F) for F = P truncated to R_k.

    Without ``samples`` a deterministic product rule is used (k <= 4);
    with ``samples`` a seeded Monte Carlo estimate (k <= 10).
    """
    if which not in ("I", "J"):
        raise ValueError(f"unknown functional {which!r}")
    if order is None:
        order = _max_degree(spec) + k // 2 + 3
    if samples is None:
        _check_det(k)
        est = _det_IJ(spec, k, which, order)
        ref = _det_IJ(spec, k, which, order + 4)
        return QuadratureResult(ref, abs(ref - est) + 1e-15, order + 4)

    if not 1 <= k <= MAX_MC_K:
        raise OracleRangeError(f"Monte Carlo supports 1 <= k <= {MAX_MC_K}, got k={k}")
    dim = k if which == "I" else k - 1
    vol = 1 / math.factorial(dim)
    # Philox is counter based: batch i always draws the same stream
    streams = np.random.SeedSequence(seed).spawn((samples + batch - 1) // batch)
    s1 = s2 = 0.0
    done = 0
    for ss in streams:
        n = min(batch, samples - done)
        rng = np.random.Generator(np.random.Philox(ss))
        if which == "I":
            x = _dirichlet_points(rng, n, k)
            P = _eval_P(spec, x.sum(axis=1), (x * x).sum(axis=1))
            vals = P * P
        else:
            xp = _dirichlet_points(rng, n, dim) if dim else np.zeros((n, 0))
            inner = _inner_x1(spec, xp, 1 - xp.sum(axis=1), order)
            vals = inner * inner
        s1 += float(vals.sum())
        s2 += float((vals * vals).sum())
        done += n
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return QuadratureResult(vol * mean, vol * math.sqrt(var / samples), samples, seed)


# ---------------------------------------------------------------------------
# L_k(F), M_k(F) at finite eta


def _lm_value(spec, k, theta, eta, which, order, t_panels):
    th = float(theta)
    T = math.log(th / (2 * eta))
    t, wt = _gauss_01(order, t_panels)
    xi = eta * np.exp(t * T)
    dxi = xi * T * wt  # xi = eta e^(tT), t in [0, 1]
    if which == "L":
        weight = (th / 2 - xi) / (xi * (1 - xi))
    else:
        weight = (th / 2 - xi) ** 2 / (xi * (1 - xi))
    x0 = 2 * xi / th

    if k == 1:
        y, wy = np.zeros((1, 0)), np.ones(1)
    else:
        y, wy = simplex_rule(k - 1, order)
    tx, wx = _gauss_01(order, 1)
    total = 0.0
    for x0_i, wt_i in zip(x0, weight * dxi):
        s = 1 - x0_i
        xp = s * y  # support of the F_xi factor: P1' <= 1 - x0
        jac = s ** (k - 1)
        P1p = xp.sum(axis=1)
        P2p = (xp * xp).sum(axis=1)
        # int_0^1 F_xi dx1, first argument x0 + (1 - x0) x1 kept inside the support
        umax = (1 - x0_i - P1p) / s
        x1 = x0_i + s * umax[:, None] * tx[None, :]
        A = (_eval_P(spec, x1 + P1p[:, None], x1 * x1 + P2p[:, None]) * wx).sum(axis=1) * umax
        if which == "L":
            B = _inner_x1(spec, xp, 1 - P1p, order)
            inner = A * B
        else:
            inner = A * A
        total += wt_i * jac * float(np.dot(wy, inner))
    return total


def integral_LM_eta(spec: SymmetricPolynomialSpec, k: int, theta, eta: float,
                    which: Literal["L", "M"] = "L", order: int | None = None,
                    t_panels: int = 12) -> QuadratureResult:
    """L_k(F) or M_k(F) at a finite eta in (0, theta/2), by nested quadrature.

    The xi-integral runs over log(xi) so the 1/xi weight near the lower end
    is resolved at every eta.
    """
    theta = check_theta(theta)
    _check_det(k)
    if which not in ("L", "M"):
        raise ValueError(f"unknown functional {which!r}")
    if not 0 < eta <= float(theta) / 2:
        raise OracleRangeError(f"eta must lie in (0, theta/2], got {eta}")
    if eta == float(theta) / 2:
        return QuadratureResult(0.0, 0.0, 0)
    if order is None:
        order = 2 * _max_degree(spec) + k + 4
    est = _lm_value(spec, k, theta, eta, which, order, t_panels)
    ref = _lm_value(spec, k, theta, eta, which, order, 2 * t_panels)
    return QuadratureResult(ref, abs(ref - est) + 1e-14 * abs(ref), 2 * t_panels * order)


def log_divergence(theta, eta: float) -> float:
    """(theta/2) log((1 - eta) / (eta (2/theta - 1)))."""
    th = float(theta)
    return th / 2 * math.log((1 - eta) / (eta * (2 / th - 1)))


def regularized_LM(spec, k, theta, eta, which="L", J: float | None = None, **kw) -> float:
    """L(eta) - (theta/2) log(...) J  or  M(eta) - (theta^2/4) log(...) J."""
    if J is None:
        J = integral_IJ_direct(spec, k, "J").estimate
    val = integral_LM_eta(spec, k, theta, eta, which, **kw).estimate
    pref = log_divergence(theta, eta)
    if which == "M":
        pref *= float(theta) / 2
    return val - pref * J


@dataclass
class Extrapolation:
    estimate: float
    error: float
    etas: tuple[float, ...]
    values: tuple[float, ...]


def extrapolate_tilde(spec, k, theta, which="L", eta: float = 1e-3, levels: int = 3, **kw) -> Extrapolation:
    """Richardson extrapolation of the regularized L or M to eta -> 0 on eta, eta/2, eta/4, ..."""
    J = integral_IJ_direct(spec, k, "J").estimate
    etas = tuple(eta / 2 ** i for i in range(levels))
    vals = [regularized_LM(spec, k, theta, e, which, J=J, **kw) for e in etas]
    table = [list(vals)]
    for lvl in range(1, levels):
        prev = table[-1]
        f = 2 ** lvl
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    best = table[-1][0]
    err = abs(best - table[-2][-1]) if levels > 1 else abs(vals[0])
    return Extrapolation(best, err, etas, tuple(vals))


# ---------------------------------------------------------------------------
# x0-integrals


@dataclass
class X0Check:
    name: str
    quadrature: float
    target: float
    tolerance: float
    passed: bool


@dataclass
class X0Report:
    m: int
    n: int
    theta: Fraction
    eta: float
    checks: list[X0Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_record(self) -> dict:
        return {
            "m": self.m, "n": self.n, "theta": f"{self.theta.numerator}/{self.theta.denominator}",
            "eta": self.eta, "verdict": "pass" if self.passed else "fail",
            "checks": [c.__dict__ for c in self.checks],
        }


def verify_x0_integrals(m: int, n: int, theta, eta: float, precision: int = 128) -> X0Report:
    """Check the three x0-integral evaluations at a finite eta.

    (a) int x^m (1-x)^n / (x (2/theta - x)) over [2 eta/theta, 1] against mu_{m,n};
    (b) int 1 / (x (2/theta - x)) against the closed logarithm;
    (c) int ((1-x)^n - 1) / (x (2/theta - x)) against lambda_n.
    For (a) and (c) the tolerance is the size of the omitted piece [0, 2 eta/theta].
    """
    theta = check_theta(theta)
    if m < 1 or n < 0:
        raise OracleRangeError("need m >= 1 and n >= 0")
    if not 0 < eta < float(theta) / 2:
        raise OracleRangeError("need 0 < eta < theta/2")
    report = X0Report(m, n, theta, eta)
    prev = mpmath.mp.prec
    mpmath.mp.prec = precision
    try:
        c = 2 / mpmath.mpf(theta.numerator) * theta.denominator
        lo = 2 * mpmath.mpf(eta) / (mpmath.mpf(theta.numerator) / theta.denominator)
        quad_eps = mpmath.mpf(2) ** (-precision // 2)

        qa = mpmath.quad(lambda x: x ** (m - 1) * (1 - x) ** n / (c - x), [lo, 1])
        mu_val = eval_interval(mu(m, n, theta), theta, precision).mid
        tail_a = lo ** m / (m * (c - 1))
        report.checks.append(X0Check("mu", float(qa), float(mu_val), float(tail_a + quad_eps),
                                     abs(qa - mpmath.mpf(mu_val.numerator) / mu_val.denominator)
                                     <= tail_a + quad_eps))

        qb = mpmath.quad(lambda x: 1 / (x * (c - x)), [lo, 1])
        th = mpmath.mpf(theta.numerator) / theta.denominator
        closed = th / 2 * mpmath.log((1 - mpmath.mpf(eta)) / (mpmath.mpf(eta) * (2 / th - 1)))
        tol_b = quad_eps * max(1, abs(closed))
        report.checks.append(X0Check("log", float(qb), float(closed), float(tol_b), abs(qb - closed) <= tol_b))

        qc = mpmath.quad(lambda x: ((1 - x) ** n - 1) / (x * (c - x)), [lo, 1])
        lam_val = eval_interval(lambda_n(n, theta), theta, precision).mid
        tail_c = n * lo / (c - 1)
        report.checks.append(X0Check("lambda", float(qc), float(lam_val), float(tail_c + quad_eps),
                                     abs(qc - mpmath.mpf(lam_val.numerator) / lam_val.denominator)
                                     <= tail_c + quad_eps))
    finally:
        mpmath.mp.prec = prev
    return report


def mu_quadrature(m: int, n: int, theta, precision: int = 128) -> mpmath.mpf:
    """int_0^1 x^(m-1) (1-x)^n / (2/theta - x) dx by tanh-sinh quadrature."""
    theta = check_theta(theta)
    prev = mpmath.mp.prec
    mpmath.mp.prec = precision
    try:
        c = 2 / (mpmath.mpf(theta.numerator) / theta.denominator)
        return mpmath.quad(lambda x: x ** (m - 1) * (1 - x) ** n / (c - x), [0, 1])
    finally:
        mpmath.mp.prec = prev


def lambda_quadrature(n: int, theta, precision: int = 128) -> mpmath.mpf:
    theta = check_theta(theta)
    prev = mpmath.mp.prec
    mpmath.mp.prec = precision
    try:
        c = 2 / (mpmath.mpf(theta.numerator) / theta.denominator)
        # the integrand has a removable singularity at 0; tanh-sinh never samples it
        return mpmath.quad(lambda x: ((1 - x) ** n - 1) / (x * (c - x)), [0, 1])
    finally:
        mpmath.mp.prec = prev


def mu_hypergeometric(m: int, n: int, theta, precision: int = 128):
    """(theta/2) 2F1(1, m; m+n+1; theta/2) / (m binom(m+n, n)) as an exact-endpoint interval."""
    from .scalars import Interval, hyp2f1_series

    theta = check_theta(theta)
    z = theta / 2
    f = hyp2f1_series(1, m, m + n + 1, z, precision)
    scale = z / (m * comb(m + n, n))
    return Interval.from_bounds(f.lo * scale, f.hi * scale, precision)


def lambda_hypergeometric(n: int, theta, precision: int = 128):
    """(theta/2)((theta/2) 2F1(1, 1; n+2; theta/2)/(n+1) - H_n + log(1 - theta/2))."""
    from .scalars import Interval, harmonic, hyp2f1_series, log_bounds

    theta = check_theta(theta)
    z = theta / 2
    f = hyp2f1_series(1, 1, n + 2, z, precision)
    llo, lhi = log_bounds(1 - z, precision)
    lo = z * (z * f.lo / (n + 1) - harmonic(n) + llo)
    hi = z * (z * f.hi / (n + 1) - harmonic(n) + lhi)
    return Interval.from_bounds(lo, hi, precision)


def verify_binomial_identity(n: int, m: int) -> bool:
    """sum_{j=m}^{n} (-1)^j binom(n, j) == (-1)^m binom(n-1, n-m), for 0 < m <= n."""
    if not 0 < m <= n:
        raise OracleRangeError("need 0 < m <= n")
    lhs = sum((-1) ** j * comb(n, j) for j in range(m, n + 1))
    return lhs == (-1) ** m * comb(n - 1, n - m)
