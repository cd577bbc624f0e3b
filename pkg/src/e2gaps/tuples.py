"""Admissible tuples: checking, bundled witnesses, and narrow-tuple search.

Two search strategies are offered.  ``shifted_primes`` scans symmetric
windows of primes around zero (Hensley-Richards style) and always succeeds
quickly.  ``greedy_residue_sieve`` fixes a diameter d, removes one residue
class modulo each prime p <= k from [0, d], and moves classes one at a time
towards the choice with the most survivors.  The inner loop of the latter is
compiled with numba when available; set E2GAPS_DISABLE_NUMBA=1 to force the
numpy implementation.  Both use the same pre-drawn random numbers and give
identical results.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Literal

import numpy as np

log = logging.getLogger(__name__)

BUNDLED_DIAMETERS = {
    3: 6, 4: 8, 5: 12, 6: 16, 7: 20, 10: 32, 16: 60, 23: 94,
    25: 110, 37: 168, 49: 240, 102: 576, 225: 1440,
}
DEFAULT_BUDGET = 2_000_000
_CHUNK = 1 << 16
_PIN = 1 << 40  # added to the endpoint classes so they are never removed


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class Tuple:
    elements: tuple[int, ...]

    def __post_init__(self):
        el = tuple(int(x) for x in self.elements)
        if not el:
            raise ValueError("empty tuple")
        if any(b <= a for a, b in zip(el, el[1:])):
            raise ValueError("elements must be strictly increasing")
        if el[0] != 0:
            raise ValueError("tuple is not normalized; use normalize()")
        object.__setattr__(self, "elements", el)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def diameter(self) -> int:
        return self.elements[-1]

    def dumps(self) -> str:
        return " ".join(map(str, self.elements)) + "\n"


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    witness: int | None = None  # smallest prime whose classes are all hit

    def __bool__(self):
        return self.admissible


def normalize(values: Iterable[int]) -> Tuple:
    vals = sorted({int(v) for v in values})
    if not vals:
        raise ValueError("empty tuple")
    return Tuple(tuple(v - vals[0] for v in vals))


def diameter(t) -> int:
    vals = list(t)
    if not vals:
        raise ValueError("empty tuple")
    return max(vals) - min(vals)


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve).tolist()


def is_admissible(t, max_prime: int | None = None) -> Admissibility:
    """Check every prime p <= len(t) (or <= max_prime) for a missed residue class."""
    vals = np.asarray(sorted(set(int(v) for v in t)), dtype=np.int64)
    if vals.size == 0:
        raise ValueError("empty tuple")
    bound = vals.size if max_prime is None else max_prime
    for p in primes_upto(bound):
        if np.unique(vals % p).size == p:
            return Admissibility(False, p)
    return Admissibility(True)


# ---------------------------------------------------------------------------
# bundled witnesses


def parse_tuple(text: str) -> Tuple:
    try:
        vals = [int(x) for x in text.split()]
    except ValueError as exc:
        raise ValueError(f"tuple file holds a non-integer: {exc}") from None
    if any(v < 0 for v in vals):
        raise ValueError("tuple entries must be nonnegative")
    return normalize(vals)


def load_tuple(path) -> Tuple:
    with open(path) as fh:
        return parse_tuple(fh.read())


def load_bundled(k: int) -> Tuple:
    if k not in BUNDLED_DIAMETERS:
        raise KeyError(f"no bundled tuple for k={k}; available: {sorted(BUNDLED_DIAMETERS)}")
    text = resources.files("e2gaps.data.tuples").joinpath(f"k{k}.txt").read_text()
    return parse_tuple(text)


# ---------------------------------------------------------------------------
# residue-sieve descent kernels


def _use_numba() -> bool:
    if os.environ.get("E2GAPS_DISABLE_NUMBA", "") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _class_counts_py(cover, ps, j, r, d, pin):
    p = ps[j]
    n = np.arange(d + 1)
    free = (cover == 0) | ((cover == 1) & (n % p == r[j]))
    cnt = np.bincount(n[free] % p, minlength=p).astype(np.int64)
    if pin:
        cnt[0] += _PIN
        cnt[d % p] += _PIN
    return cnt, int(free.sum())


def _descend_py(ps, d, k, r, cover, js, us, vs, prand, pin, best, best_r):
    """One chunk of coordinate moves.  Returns (best, steps_used)."""
    for it in range(js.shape[0]):
        j = js[it]
        p = ps[j]
        cnt, free = _class_counts_py(cover, ps, j, r, d, pin)
        if us[it] < prand:
            c = int(vs[it] * p)
            if cnt[c] >= _PIN:
                continue
        else:
            ties = np.flatnonzero(cnt == cnt.min())
            c = int(ties[int(vs[it] * ties.size)])
        if c != r[j]:
            cover[r[j]::p] -= 1
            cover[c::p] += 1
            r[j] = c
        cur = free - cnt[c]
        if cur > best:
            best = cur
            best_r[:] = r
            if best >= k:
                return best, it + 1
    return best, js.shape[0]


def _init_py(ps, d, pin):
    cover = np.zeros(d + 1, np.int32)
    r = np.zeros(ps.shape[0], np.int64)
    n = np.arange(d + 1)
    for j, p in enumerate(ps):
        cnt = np.bincount(n[cover == 0] % p, minlength=p).astype(np.int64)
        if pin:
            cnt[0] += _PIN
            cnt[d % p] += _PIN
        r[j] = int(np.argmin(cnt))
        cover[r[j]::p] += 1
    return r, cover


_NB = None


def _numba_kernels():
    global _NB
    if _NB is not None:
        return _NB
    from numba import njit

    @njit(cache=True)
    def init(ps, d, pin):
        cover = np.zeros(d + 1, np.int32)
        r = np.zeros(ps.shape[0], np.int64)
        cnt = np.zeros(ps.max() + 1, np.int64)
        for j in range(ps.shape[0]):
            p = ps[j]
            cnt[:p] = 0
            for n in range(d + 1):
                if cover[n] == 0:
                    cnt[n % p] += 1
            if pin:
                cnt[0] += _PIN
                cnt[d % p] += _PIN
            b = 0
            for c in range(p):
                if cnt[c] < cnt[b]:
                    b = c
            r[j] = b
            for n in range(b, d + 1, p):
                cover[n] += 1
        return r, cover

    @njit(cache=True)
    def descend(ps, d, k, r, cover, js, us, vs, prand, pin, best, best_r):
        cnt = np.zeros(ps.max() + 1, np.int64)
        for it in range(js.shape[0]):
            j = js[it]
            p = ps[j]
            rj = r[j]
            cnt[:p] = 0
            free = 0
            for n in range(d + 1):
                c0 = cover[n]
                if c0 == 0 or (c0 == 1 and n % p == rj):
                    cnt[n % p] += 1
                    free += 1
            if pin:
                cnt[0] += _PIN
                cnt[d % p] += _PIN
            if us[it] < prand:
                c = int(vs[it] * p)
                if cnt[c] >= _PIN:
                    continue
            else:
                m = cnt[0]
                for cc in range(p):
                    if cnt[cc] < m:
                        m = cnt[cc]
                nt = 0
                for cc in range(p):
                    if cnt[cc] == m:
                        nt += 1
                pick = int(vs[it] * nt)
                c = 0
                for cc in range(p):
                    if cnt[cc] == m:
                        if pick == 0:
                            c = cc
                            break
                        pick -= 1
            if c != rj:
                for n in range(rj, d + 1, p):
                    cover[n] -= 1
                for n in range(c, d + 1, p):
                    cover[n] += 1
                r[j] = c
            cur = free - cnt[c]
            if cur > best:
                best = cur
                best_r[:] = r
                if best >= k:
                    return best, it + 1
        return best, js.shape[0]

    _NB = (init, descend)
    return _NB


@dataclass
class SieveRun:
    d: int
    survivors: int
    classes: np.ndarray
    steps: int


def residue_descent(k: int, d: int, steps: int, seed: int = 1, prand: float = 0.02,
                    pin: bool = True, use_numba: bool | None = None) -> SieveRun:
    """Choose one class mod each prime p <= k to maximize survivors in [0, d].

    With ``pin`` the classes of 0 and d are never removed, so any success has
    diameter exactly d.
    """
    ps = np.array(primes_upto(k), dtype=np.int64)
    if ps.size == 0:
        return SieveRun(d, d + 1, np.zeros(0, np.int64), 0)
    if use_numba is None:
        use_numba = _use_numba()
    if use_numba:
        init, descend = _numba_kernels()
    else:
        init, descend = _init_py, _descend_py
    r, cover = init(ps, d, pin)
    best = int((cover == 0).sum())
    best_r = r.copy()
    rng = np.random.Generator(np.random.Philox(seed))
    used = 0
    while best < k and used < steps:
        n = min(_CHUNK, steps - used)
        js = rng.integers(0, ps.size, n)
        us = rng.random(n)
        vs = rng.random(n)
        best, done = descend(ps, d, k, r, cover, js, us, vs, prand, pin, best, best_r)
        used += done
    return SieveRun(d, int(best), best_r, used)


def survivors(k: int, d: int, classes) -> list[int]:
    """Points of [0, d] outside the chosen class modulo each prime p <= k."""
    keep = np.ones(d + 1, dtype=bool)
    for p, c in zip(primes_upto(k), classes):
        keep[int(c)::p] = False
    return np.flatnonzero(keep).tolist()


def tuple_from_classes(k: int, d: int, classes) -> Tuple:
    """The k-tuple with endpoints 0 and d taken from the survivors (smallest interior first)."""
    pts = survivors(k, d, classes)
    if len(pts) < k or pts[0] != 0 or pts[-1] != d:
        raise ValueError("class choice does not leave a k-tuple spanning [0, d]")
    chosen = pts[: k - 1] + [d] if k > 1 else [0]
    return normalize(chosen)


# ---------------------------------------------------------------------------
# shifted prime windows


def _prime_list(count: int) -> list[int]:
    n = max(16, count * 2)
    while True:
        ps = primes_upto(n)
        if len(ps) >= count:
            return ps[:count]
        n *= 2


def shifted_prime_candidates(k: int, max_shift: int | None = None):
    """Symmetric windows {-p_{m+j}, ..., -1, 1, ..., p_{m+j}} and one-sided windows {p_{m+1}, ..., p_{m+k}}."""
    if max_shift is None:
        max_shift = max(20, 2 * k)
    ps = _prime_list(max_shift + k + 2)
    for m in range(max_shift):
        yield normalize(ps[m:m + k])
        if k >= 2:
            half = (k - 2) // 2
            side = ps[m:m + half]
            sym = [-p for p in side] + [-1, 1] + side
            if len(sym) < k:  # odd k: one more prime on the right
                sym.append(ps[m + half])
            yield normalize(sym)


def _shifted_primes(k: int, budget: int) -> Tuple:
    best = None
    for i, cand in enumerate(shifted_prime_candidates(k)):
        if i >= budget:
            break
        if len(cand) != k or not is_admissible(cand):
            continue
        key = (cand.diameter, cand.elements)
        if best is None or key < (best.diameter, best.elements):
            best = cand
    if best is None:
        raise BudgetExhausted(f"no admissible shifted-prime window for k={k} within {budget} candidates")
    return best


def greedy_search(k: int, strategy: Literal["shifted_primes", "greedy_residue_sieve"] = "greedy_residue_sieve",
                  budget: int = DEFAULT_BUDGET, seed: int = 1, use_numba: bool | None = None) -> Tuple:
    """Find a narrow admissible k-tuple.  Minimality is not claimed.

    The residue sieve starts from the shifted-prime diameter and walks the
    diameter down in steps of 2 until a diameter cannot be reached with the
    remaining step budget.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return Tuple((0,))
    if strategy == "shifted_primes":
        return _shifted_primes(k, budget)
    if strategy != "greedy_residue_sieve":
        raise ValueError(f"unknown strategy {strategy!r}")

    best = _shifted_primes(k, 10 ** 6)
    left = budget
    d = best.diameter - 2
    # a single attempt may use at most a quarter of what is left, so several
    # diameters get tried before the budget runs out
    while d > 0 and left > 0:
        run = residue_descent(k, d, max(1, left // 4), seed=seed, use_numba=use_numba)
        left -= run.steps
        if run.survivors < k:
            break
        best = tuple_from_classes(k, d, run.classes)
        log.debug("k=%d: diameter %d after %d steps", k, d, run.steps)
        d -= 2
    return best
