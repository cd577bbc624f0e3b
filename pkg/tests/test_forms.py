import random
from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, settings, strategies as st

from e2gaps import oracle
from e2gaps.basis import BasisTerm, SymmetricPolynomialSpec
from e2gaps.forms import (
    QuadraticForm,
    SieveConfig,
    build_forms,
    build_I,
    build_J,
    build_Jtilde,
    build_Ltilde,
    build_Mtilde,
    evaluate_ratio,
    floor_excess,
    leading_minors,
    symmetrize,
    tilde_raw_matrices,
)
from e2gaps.scalars import LogLinear, approximate, enclose, lambda_n, mu

ONE, HALF = Fraction(1), Fraction(1, 2)
T00 = [BasisTerm(0, 0)]


@pytest.mark.parametrize("k", [2, 3, 5, 10])
def test_I_single(k):
    assert build_I(k, T00)[0, 0] == LogLinear.rational(Fraction(1, factorial(k)))


def test_I_offdiagonal_k10():
    A = build_I(10, [(0, 0), (1, 0)])
    assert A[0, 1] == LogLinear.rational(Fraction(1, 39916800))


@pytest.mark.parametrize("k", [2, 3, 7])
def test_J_single(k):
    assert build_J(k, T00)[0, 0] == LogLinear.rational(Fraction(2, factorial(k + 1)))
    assert build_J(2, T00)[0, 0].q0 == Fraction(1, 3)


def test_J_entry_against_monte_carlo():
    val = float(build_J(3, [(1, 0)])[0, 0].q0)
    r = oracle.integral_IJ_direct(SymmetricPolynomialSpec.single(1, 0), 3, "J", samples=200_000, seed=5)
    assert abs(r.estimate - val) <= 4 * r.error_bound


def test_Ltilde_single_term_explicit():
    # sum over d of (-1)^d binom(2,d) lambda_{1+d}/(1+d) minus the e-sum of mu_{1,1+e}/(1+e)
    expect = LogLinear()
    for d in range(3):
        expect = expect + lambda_n(1 + d, 1) * Fraction((-1) ** d * comb(2, d), 1 + d)
    for e in range(2):
        expect = expect - mu(1, 1 + e, 1) * Fraction((-1) ** e * comb(1, e), 1 + e)
    assert build_Ltilde(2, 1, T00)[0, 0] == expect


def test_Mtilde_symmetric():
    M = build_Mtilde(4, HALF, [(0, 0), (2, 0)])
    assert M[0, 1] == M[1, 0]
    assert M.is_symmetric()


def test_Jtilde_assembly():
    terms = [(0, 0), (1, 0), (0, 1)]
    k = 4
    L, M, Jt = build_Ltilde(k, 1, terms), build_Mtilde(k, 1, terms), build_Jtilde(k, 1, terms)
    for i in range(3):
        for j in range(3):
            assert Jt[i, j] == L[i, j] * (-k) + M[i, j] * k
            assert Jt[i, j].q2 == 0
    Jh = build_Jtilde(2, HALF, T00)
    assert Jh[0, 0].q2 == Fraction(1, 16) * 2 * build_J(2, T00)[0, 0].q0


def test_tilde_entries_have_no_log2_part():
    for th in (ONE, HALF):
        for form in (build_Ltilde(5, th, [(0, 0), (1, 0), (0, 1)]), build_Mtilde(5, th, [(0, 0), (1, 0), (0, 1)])):
            assert all(e.q2 == 0 for row in form.entries for e in row)


@pytest.mark.parametrize("theta", [ONE, HALF])
@pytest.mark.parametrize("k", [2, 3])
def test_I_J_against_quadrature(theta, k):
    for b in range(3):
        for c in range(2):
            spec = SymmetricPolynomialSpec.single(b, c)
            I = float(build_I(k, spec.terms)[0, 0].q0)
            J = float(build_J(k, spec.terms)[0, 0].q0)
            assert abs(oracle.integral_IJ_direct(spec, k, "I").estimate - I) <= 1e-6 * I
            assert abs(oracle.integral_IJ_direct(spec, k, "J").estimate - J) <= 1e-6 * J


@pytest.mark.parametrize("theta", [ONE, HALF])
def test_tilde_against_extrapolated_quadrature(theta):
    for k in (2, 3):
        for b, c in [(0, 0), (2, 0), (1, 1)]:
            spec = SymmetricPolynomialSpec.single(b, c)
            for which, build in (("L", build_Ltilde), ("M", build_Mtilde)):
                f = float(approximate(build(k, theta, spec.terms)[0, 0], theta, 64))
                ex = oracle.extrapolate_tilde(spec, k, theta, which)
                assert abs(ex.estimate - f) <= 1e-3 * abs(f), (k, b, c, which)


def test_two_term_quadratic_form_against_quadrature():
    spec = SymmetricPolynomialSpec(((0, 0), (1, 0)), (Fraction(3, 2), Fraction(-1)))
    f = build_forms(3, HALF, spec.terms)
    I = float(f.I.value(spec.coeffs).q0)
    assert abs(oracle.integral_IJ_direct(spec, 3, "I").estimate - I) <= 1e-9 * abs(I)
    L = float(approximate(f.Ltilde.value(spec.coeffs), HALF, 64))
    assert abs(oracle.extrapolate_tilde(spec, 3, HALF, "L").estimate - L) <= 1e-3 * abs(L)


rat = st.fractions(min_value=-100, max_value=100, max_denominator=1000)


@settings(max_examples=30, deadline=None)
@given(st.lists(rat, min_size=4, max_size=4), st.sampled_from([ONE, HALF]))
def test_symmetrization_preserves_values(a, theta):
    terms = [(0, 0), (1, 0), (2, 0), (0, 1)]
    fL, fM = tilde_raw_matrices(6, theta, tuple(BasisTerm(*t) for t in terms))
    for raw in (fL, fM):
        direct = LogLinear()
        for i in range(4):
            for j in range(4):
                direct = direct + raw[i][j] * (a[i] * a[j])
        assert QuadraticForm(symmetrize(raw)).value(a) == direct


def test_raw_tilde_is_asymmetric_somewhere():
    fL, _ = tilde_raw_matrices(6, HALF, (BasisTerm(0, 0), BasisTerm(2, 0)))
    assert fL[0][1] != fL[1][0]


def test_evaluate_ratio_scale_and_errors():
    f = build_forms(10, 1, [(0, 0), (1, 0)])
    a = [Fraction(-2301604465403391652, 124720775947120337501), Fraction(-83833247885835453802, 83847526334133337873)]
    r1 = evaluate_ratio(a, f).R
    r7 = evaluate_ratio([7 * x for x in a], f).R
    assert r1.overlaps(r7)
    assert abs(float(r1) - 3.0353844819) < 1e-9
    with pytest.raises(ValueError):
        evaluate_ratio([0, 0], f)
    with pytest.raises(ValueError):
        evaluate_ratio([1], f)


def test_evaluate_ratio_one_dimensional():
    f = build_forms(5, HALF, T00)
    r = evaluate_ratio([1], f)
    lo, hi = enclose(f.Jtilde[0, 0] * (2 / HALF), HALF, 256)
    I = f.I[0, 0].q0
    assert r.R.lo <= hi / I and lo / I <= r.R.hi


def test_form_record_round_trip():
    f = build_forms(4, HALF, [(0, 0), (1, 0), (0, 1)])
    for form in (f.I, f.J, f.Ltilde, f.Mtilde, f.Jtilde):
        back = QuadraticForm.from_record(form.to_record())
        assert back.entries == form.entries and back.terms == form.terms


def test_leading_minors_small():
    assert leading_minors([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(2)]]) == [2, 3]
    assert leading_minors([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]) == [0, -1]


def test_floor_excess_small_configs():
    rng = random.Random(7)
    for k, th in [(4, HALF), (6, ONE), (8, HALF)]:
        terms = [(0, 0), (1, 0), (2, 0), (0, 1)]
        f = build_forms(k, th, terms)
        for _ in range(20):
            a = [Fraction(rng.randint(-999, 999), rng.randint(1, 999)) for _ in terms]
            if not any(a):
                continue
            lo, hi = enclose(floor_excess(a, f), th, 512)
            assert hi > 0 and lo >= -Fraction(1, 10 ** 20)


def test_sieve_config_validation():
    with pytest.raises(ValueError):
        SieveConfig(1, 1)
    with pytest.raises(ValueError):
        SieveConfig(5, Fraction(3, 2))
    with pytest.raises(ValueError):
        SieveConfig(5, 1, nu=0)
