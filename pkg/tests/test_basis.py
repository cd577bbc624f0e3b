from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from e2gaps.basis import BasisTerm, SymmetricPolynomialSpec, basis_sequence, q_eval, q_polynomial

# reference exponent lists (42 entries each)
B_LIST = [0, 1, 2, 0, 3, 1, 4, 2, 0, 5, 3, 1, 6, 4, 2, 0, 7, 5, 3, 1, 8,
          6, 4, 2, 0, 9, 7, 5, 3, 1, 10, 8, 6, 4, 2, 0, 11, 9, 7, 5, 3, 1]
C_LIST = [0, 0, 0, 1, 0, 1, 0, 1, 2, 0, 1, 2, 0, 1, 2, 3, 0, 1, 2, 3, 0,
          1, 2, 3, 4, 0, 1, 2, 3, 4, 0, 1, 2, 3, 4, 5, 0, 1, 2, 3, 4, 5]


@pytest.mark.parametrize("c,coeffs", [
    (0, (1,)),
    (1, (0, 2)),
    (2, (0, 20, 4)),
    (3, (0, 592, 120, 8)),
    (4, (0, 33888, 5936, 480, 16)),
])
def test_q_polynomial_reference(c, coeffs):
    assert q_polynomial(c).coefficients == coeffs


@pytest.mark.parametrize("c,k,val", [(1, 5, 10), (0, 0, 1), (3, 2, 1728)])
def test_q_eval(c, k, val):
    assert q_eval(c, k) == val


@pytest.mark.parametrize("c", range(1, 9))
def test_q_shape(c):
    q = q_polynomial(c)
    assert len(q.coefficients) == c + 1
    assert q(0) == 0
    assert all(x > 0 for x in q.coefficients[1:])
    assert q.coefficients[-1] == 2 ** c


def test_q_moment_small_case():
    # int over R_1 of x^(2c) = 1/(2c+1), and Q_c(1)/(2c)! must give the same
    for c in range(6):
        assert Fraction(q_eval(c, 1), factorial(1 + 2 * c)) == Fraction(1, 2 * c + 1)


def test_basis_sequence_reference_lists():
    seq = basis_sequence(42)
    assert [t.b for t in seq] == B_LIST
    assert [t.c for t in seq] == C_LIST


def test_basis_sequence_examples():
    assert basis_sequence(1) == [BasisTerm(0, 0)]
    assert basis_sequence(4) == [BasisTerm(0, 0), BasisTerm(1, 0), BasisTerm(2, 0), BasisTerm(0, 1)]
    assert basis_sequence(9)[-1] == BasisTerm(0, 2)


@given(st.integers(1, 120))
def test_basis_sequence_degree_complete(m):
    seq = basis_sequence(m)
    assert len(set(seq)) == m
    degs = [t.degree for t in seq]
    assert degs == sorted(degs)
    # every degree below the last one is fully present
    top = degs[-1]
    for d in range(top):
        assert sum(1 for t in seq if t.degree == d) == d // 2 + 1


@given(st.integers(0, 4), st.integers(1, 12))
def test_moment_formulas_agree_at_b0(c, k):
    lhs = Fraction(q_eval(c, k), factorial(k + 2 * c))
    rhs = Fraction(q_eval(c, k), factorial(k + 2 * c - 1) * (k + 2 * c))
    assert lhs == rhs


def test_spec_validation():
    with pytest.raises(ValueError):
        BasisTerm(-1, 0)
    with pytest.raises(ValueError):
        SymmetricPolynomialSpec(((0, 0), (0, 0)), (1, 2))
    with pytest.raises(ValueError):
        SymmetricPolynomialSpec(((0, 0),), (1, 2))
