import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from occupancy.combinatorics import (
    LogReal,
    TruncatedPoly,
    binomial_exact,
    check_log_concave,
    falling_factorial_approx,
    log_binomial,
    log_sum,
    poly_pow_coeff,
    poly_pow_exact,
    poly_pow_log,
    restricted_composition_weight,
    truncated_binomial_poly,
)


def brute_composition_weight(S, R, m, s):
    return sum(
        math.prod(math.comb(S, i) for i in tup)
        for tup in itertools.product(range(R), repeat=m)
        if sum(tup) == s
    )


# ---------------------------------------------------------------- LogReal


def test_logreal_zero_is_absorbing_and_neutral():
    x = LogReal.from_value(3.5)
    zero = LogReal.from_value(0)
    assert (x * zero).is_zero
    assert x + zero == x
    assert zero + x == x
    assert float(zero) == 0.0


@given(st.floats(1e-300, 1e300), st.floats(1e-300, 1e300))
def test_logreal_arithmetic_matches_floats(a, b):
    la, lb = LogReal.from_value(a), LogReal.from_value(b)
    assert math.isclose((la * lb).log, math.log(a) + math.log(b), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose((la + lb).log, math.log(a + b), rel_tol=1e-12, abs_tol=1e-12)


def test_logreal_holds_numbers_beyond_double_range():
    big = LogReal.from_value(10**5000)
    assert math.isclose(big.log, 5000 * math.log(10), rel_tol=1e-14)
    assert float(big) == math.inf
    assert math.isclose((big / big).log, 0.0, abs_tol=1e-9)


def test_log_sum_orders_terms():
    terms = [LogReal.from_value(x) for x in (1e-20, 1.0, 1e-10, 0)]
    assert math.isclose(float(log_sum(terms)), 1.0 + 1e-10 + 1e-20, rel_tol=1e-15)
    assert log_sum([]).is_zero


def test_logreal_rejects_negative():
    with pytest.raises(ValueError):
        LogReal.from_value(-1)


# ---------------------------------------------------------------- binomials


@pytest.mark.parametrize("A,B,expected", [(6, 3, 20), (5, 7, 0), (100, 5, 75287520), (4, -1, 0), (0, 0, 1)])
def test_binomial_exact(A, B, expected):
    assert binomial_exact(A, B) == expected


def test_binomial_exact_hand_product():
    assert binomial_exact(100, 5) == 100 * 99 * 98 * 97 * 96 // 120


def test_log_binomial_small():
    assert math.isclose(log_binomial(6, 3).log, math.log(20), abs_tol=1e-12)
    assert log_binomial(4, 5).is_zero
    assert log_binomial(4, -1).is_zero


def test_log_binomial_large_against_big_integer():
    exact = math.log(math.comb(10**6, 10**3))
    assert math.isclose(log_binomial(10**6, 10**3).log, exact, rel_tol=1e-9)


@pytest.mark.parametrize(
    "A,B",
    [(50_000, 300), (50_000, 25_000), (10**6, 10**3), (10**6, 333_333), (123_457, 60_000), (10**5, 99_000)],
)
def test_log_binomial_stirling_branch(A, B):
    # these all take the Stirling branch; a 40-digit loggamma is the oracle
    with mpmath.workdps(40):
        exact = float(mpmath.loggamma(A + 1) - mpmath.loggamma(B + 1) - mpmath.loggamma(A - B + 1))
    got = log_binomial(A, B).log
    assert abs(got - exact) <= 1e-12 * max(1.0, exact)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 30_000), st.data())
def test_log_binomial_matches_exact(A, data):
    B = data.draw(st.integers(0, A))
    exact = math.log(math.comb(A, B)) if math.comb(A, B) else None
    got = log_binomial(A, B)
    assert math.isclose(got.log, exact, rel_tol=1e-9, abs_tol=1e-12)


def test_log_binomial_up_to_1e9():
    A, B = 10**9, 5 * 10**8 + 17
    exact = math.log(math.comb(A, 400))
    assert math.isclose(log_binomial(A, 400).log, exact, rel_tol=1e-13)
    with mpmath.workdps(40):
        lg = float(mpmath.loggamma(A + 1) - mpmath.loggamma(B + 1) - mpmath.loggamma(A - B + 1))
    assert math.isclose(log_binomial(A, B).log, lg, rel_tol=1e-13)


# ---------------------------------------------------------------- polynomials


@pytest.mark.parametrize("S,R,expected", [(2, 1, (1,)), (2, 2, (1, 2)), (5, 3, (1, 5, 10))])
def test_truncated_binomial_poly(S, R, expected):
    p = truncated_binomial_poly(S, R)
    assert p.coeffs == expected
    assert p.cap == R - 1


@pytest.mark.parametrize("S,R", [(0, 1), (3, 0), (3, 5)])
def test_truncated_binomial_poly_rejects(S, R):
    with pytest.raises(ValueError):
        truncated_binomial_poly(S, R)


@pytest.mark.parametrize(
    "coeffs,m,s,expected",
    [((1, 2), 3, 3, 8), ((1,), 5, 0, 1), ((1, 5, 10), 2, 4, 100), ((1, 2), 3, 2, 12)],
)
def test_poly_pow_coeff(coeffs, m, s, expected):
    p = TruncatedPoly(coeffs, len(coeffs) - 1)
    assert math.isclose(float(poly_pow_coeff(p, m, s)), expected, rel_tol=1e-12)
    assert math.isclose(float(poly_pow_coeff(p, m, s, exact=False)), expected, rel_tol=1e-12)


def test_poly_pow_coeff_beyond_degree_is_zero():
    assert poly_pow_coeff(TruncatedPoly((1, 2), 1), 3, 4).is_zero


@pytest.mark.parametrize(
    "S,R,m,s,expected", [(2, 1, 3, 0, 1), (2, 2, 1, 1, 2), (5, 3, 2, 4, 100)]
)
def test_restricted_composition_weight(S, R, m, s, expected):
    assert float(restricted_composition_weight(S, R, m, s)) == pytest.approx(expected, rel=1e-14)


def test_restricted_composition_weight_range():
    with pytest.raises(ValueError):
        restricted_composition_weight(5, 3, 2, 5)


def test_two_routes_agree_on_grid():
    for S in range(1, 9):
        for R in range(1, min(4, S + 1) + 1):
            p = truncated_binomial_poly(S, R)
            for m in range(1, 5):
                full = poly_pow_exact(p.coeffs, m, m * (R - 1))
                for s in range(m * (R - 1) + 1):
                    w = restricted_composition_weight(S, R, m, s)
                    assert w == LogReal.from_value(full[s])
                    assert w == poly_pow_coeff(p, m, s)
                    if m <= 3:
                        assert float(w) == pytest.approx(brute_composition_weight(S, R, m, s), rel=1e-12)


def test_log_power_matches_exact_power():
    p = truncated_binomial_poly(40, 6)
    exact = poly_pow_exact(p.coeffs, 37, 150)
    logs = poly_pow_log(p.log_coeffs(), 37, 150)
    for s in range(len(exact)):
        assert math.isclose(logs[s], math.log(exact[s]), rel_tol=1e-13)


# ---------------------------------------------------------------- falling factorial envelope


def test_falling_factorial_hand_point():
    approx, bound = falling_factorial_approx(100, 5)
    exact = 100 * 99 * 98 * 97 * 96
    assert exact == 9_034_502_400
    assert math.isclose(float(approx), 9.048374180e9, rel_tol=1e-9)
    rel = abs(float(approx) - exact) / exact
    assert rel == pytest.approx(0.00154, abs=5e-5)
    assert bound == pytest.approx(0.0125)
    assert rel <= bound


def test_falling_factorial_trivial():
    approx, bound = falling_factorial_approx(10, 1)
    assert float(approx) == pytest.approx(10.0, rel=1e-15)
    assert bound == pytest.approx(1e-2)


def test_falling_factorial_large():
    approx, bound = falling_factorial_approx(10**6, 10**3)
    log_exact = math.log(math.perm(10**6, 10**3))
    rel = abs(math.expm1(approx.log - log_exact))
    assert rel <= bound == 1e-3
    assert rel <= 1e-6 * 200  # observed constant close to 1/6


@pytest.mark.parametrize("A,B", [(10, 5), (10, 7), (3, 2)])
def test_falling_factorial_rejects_outside_precondition(A, B):
    with pytest.raises(ValueError):
        falling_factorial_approx(A, B)


# ---------------------------------------------------------------- log-concavity


def test_check_log_concave_examples():
    assert check_log_concave([1, 2, 1]).is_log_concave
    bad = check_log_concave([1, 1, 4])
    assert not bad.is_log_concave
    assert bad.first_violation_index == 1
    assert bad.max_violation_ratio == 4.0
    row = [math.comb(10, i) for i in range(11)]
    assert check_log_concave(row).is_log_concave
    assert check_log_concave([LogReal.from_value(x) for x in row]).is_log_concave


def test_check_log_concave_internal_zero():
    res = check_log_concave([1, 0, 1])
    assert not res.is_log_concave
    assert res.first_violation_index == 1
    assert check_log_concave([0, 0, 1, 2, 1, 0]).is_log_concave


def test_check_log_concave_equality_is_allowed():
    assert check_log_concave([3, 3, 3, 3]).is_log_concave
    assert check_log_concave([LogReal.from_value(3.0)] * 4).is_log_concave
    assert check_log_concave([Fraction(1, 3), Fraction(1, 3)]).is_log_concave


def test_truncated_binomial_powers_are_log_concave():
    for S in range(1, 15):
        for R in range(1, S + 2):
            p = truncated_binomial_poly(S, R)
            for m in (1, 2, 3, 5, 8):
                seq = poly_pow_exact(p.coeffs, m, m * (R - 1))
                assert check_log_concave(seq).is_log_concave, (S, R, m)


log_concave_seq = st.lists(st.floats(-3, 3), min_size=1, max_size=12).map(
    # partial sums of decreasing increments give a concave log sequence
    lambda d: [sum(sorted(d, reverse=True)[:i]) for i in range(len(d) + 1)]
)


@given(log_concave_seq, log_concave_seq)
def test_hadamard_product_stays_log_concave(la, lb):
    n = min(len(la), len(lb))
    a = [LogReal.from_log(x) for x in la[:n]]
    b = [LogReal.from_log(x) for x in lb[:n]]
    assert check_log_concave(a).is_log_concave
    assert check_log_concave([x * y for x, y in zip(a, b)]).is_log_concave
