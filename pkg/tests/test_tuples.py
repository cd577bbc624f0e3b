import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from e2gaps.tuples import (
    BUNDLED_DIAMETERS,
    Tuple,
    diameter,
    greedy_search,
    is_admissible,
    load_bundled,
    normalize,
    parse_tuple,
    primes_upto,
    residue_descent,
    shifted_prime_candidates,
)


def test_admissibility_examples():
    bad = is_admissible([0, 2, 4])
    assert not bad and bad.witness == 3
    assert is_admissible([0, 2, 6])
    assert is_admissible([0, 4, 6, 10, 12, 16])
    assert not is_admissible([0, 1]) and is_admissible([0, 1]).witness == 2


def test_diameter_examples():
    assert diameter([0]) == 0
    assert diameter([0, 2, 6, 8]) == 8
    assert normalize([5, 7, 11]).diameter == 6


def test_tuple_normalization():
    assert normalize([9, 3, 5, 3]).elements == (0, 2, 6)
    with pytest.raises(ValueError):
        Tuple((1, 2))
    with pytest.raises(ValueError):
        Tuple((0, 2, 2))
    with pytest.raises(ValueError):
        parse_tuple("0 2 x")
    with pytest.raises(ValueError):
        parse_tuple("")


@pytest.mark.parametrize("k", sorted(BUNDLED_DIAMETERS))
def test_bundled(k):
    t = load_bundled(k)
    assert len(t) == k
    assert t.diameter == BUNDLED_DIAMETERS[k]
    assert is_admissible(t)


def test_bundled_unknown():
    with pytest.raises(KeyError):
        load_bundled(11)


def test_subset_closure():
    rng = random.Random(2024)
    for k in (25, 102, 225):
        t = list(load_bundled(k))
        for _ in range(30):
            sub = rng.sample(t, rng.randint(1, k))
            assert is_admissible(sub)


def _brute(t):
    d = max(t) - min(t)
    for p in primes_upto(d + 1):
        if len({x % p for x in t}) == p:
            return False
    return True


@settings(max_examples=300)
@given(st.lists(st.integers(0, 200), min_size=1, max_size=30, unique=True))
def test_checker_matches_brute_force(t):
    assert bool(is_admissible(t)) == _brute(t)


def test_checker_matches_brute_force_on_bundled():
    for k in (3, 4, 5, 6, 7, 10, 16, 23, 25, 37):
        t = list(load_bundled(k))
        assert _brute(t)


@pytest.mark.parametrize("k,limit", [(3, 6), (5, 12), (10, 32), (16, 60), (23, 94), (25, 110), (37, 168)])
def test_greedy_search_reaches_table(k, limit):
    t = greedy_search(k)
    assert len(t) == k and is_admissible(t)
    assert t.diameter <= limit


def test_shifted_primes_strategy():
    for k in (2, 3, 10, 30):
        t = greedy_search(k, "shifted_primes")
        assert len(t) == k and is_admissible(t)
    assert greedy_search(1).elements == (0,)
    assert all(len(c) <= 6 for c in shifted_prime_candidates(6, 5))
    with pytest.raises(ValueError):
        greedy_search(5, "nope")


def test_numba_and_numpy_paths_agree():
    pytest.importorskip("numba")
    for k, d, seed in [(23, 92, 1), (37, 166, 4), (49, 238, 2)]:
        a = residue_descent(k, d, 3000, seed=seed, use_numba=True)
        b = residue_descent(k, d, 3000, seed=seed, use_numba=False)
        assert (a.survivors, a.steps) == (b.survivors, b.steps)
        assert np.array_equal(a.classes, b.classes)


def test_env_flag_selects_numpy(monkeypatch):
    from e2gaps import tuples

    monkeypatch.setenv("E2GAPS_DISABLE_NUMBA", "1")
    assert not tuples._use_numba()
    t = greedy_search(10, budget=20_000)
    assert t.diameter <= 32
