import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mixpois.combinatorics import (
    IntPolynomial,
    PartitionSizeError,
    assoc_stirling2,
    assoc_stirling2_product,
    bell_number,
    centered_poisson_moment_closed,
    centered_poisson_moment_recurrence,
    centered_poisson_moment_touchard,
    double_factorial_odd,
    enumerate_partitions_min_block,
    falling_factorial,
    stirling2,
    touchard_poly,
)


def set_partitions(items):
    """All set partitions of a list, by inserting the first item everywhere."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def naive_count(s, k, min_size):
    return sum(1 for p in set_partitions(list(range(s)))
               if len(p) == k and all(len(b) >= min_size for b in p))


@pytest.mark.parametrize("s", range(0, 8))
def test_oracle_matches_naive_generator(s):
    for k in range(s + 1):
        for m in (1, 2, 3):
            assert enumerate_partitions_min_block(s, k, m) == naive_count(s, k, m)


@pytest.mark.parametrize("s,j,expected", [(0, 0, 1), (3, 2, 3), (4, 2, 7)])
def test_stirling2_examples(s, j, expected):
    assert stirling2(s, j) == expected


@pytest.mark.parametrize("s,k,expected", [(2, 1, 1), (4, 2, 3), (6, 3, 15)])
def test_assoc_stirling2_examples(s, k, expected):
    assert assoc_stirling2(s, k) == expected
    assert assoc_stirling2_product(s, k) == expected


def test_assoc_6_3_is_perfect_matchings():
    assert assoc_stirling2(6, 3) == math.factorial(6) // (2 ** 3 * math.factorial(3))


@pytest.mark.parametrize("s,k,m,expected", [(4, 2, 1, 7), (4, 2, 2, 3), (5, 5, 2, 0)])
def test_enumeration_examples(s, k, m, expected):
    assert enumerate_partitions_min_block(s, k, m) == expected


def test_enumeration_guard():
    with pytest.raises(PartitionSizeError):
        enumerate_partitions_min_block(15, 3, 1)


def test_stirling_matches_enumeration_up_to_10():
    for s in range(11):
        for j in range(s + 1):
            assert stirling2(s, j) == enumerate_partitions_min_block(s, j, 1)
            assert assoc_stirling2(s, j) == enumerate_partitions_min_block(s, j, 2)


def test_row_sums_are_bell_numbers():
    for s in range(11):
        unrestricted = sum(enumerate_partitions_min_block(s, j, 1) for j in range(s + 1))
        assert bell_number(s) == unrestricted
    assert bell_number(10) == 115975


def test_product_formula_matches_recurrence_beyond_oracle_range():
    for s in range(20):
        for k in range(s + 1):
            assert assoc_stirling2_product(s, k) == assoc_stirling2(s, k)


def test_big_integers_exact():
    # far beyond 64-bit range; the recurrence must stay exact
    v = stirling2(64, 32)
    assert v > 2 ** 64
    assert v == 32 * stirling2(63, 32) + stirling2(63, 31)


@pytest.mark.parametrize("m,expected", [(0, 1), (2, 3), (4, 105)])
def test_double_factorial(m, expected):
    assert double_factorial_odd(m) == expected


@pytest.mark.parametrize("x,s,expected", [(5, 0, 1), (4, 2, 12), (2, 4, 0)])
def test_falling_factorial_examples(x, s, expected):
    assert falling_factorial(x, s) == expected


def test_falling_factorial_vs_factorial_ratio():
    for n in range(13):
        for s in range(n + 1):
            assert falling_factorial(n, s) == math.factorial(n) // math.factorial(n - s)


@pytest.mark.parametrize("s,coeffs", [(0, (1,)), (2, (0, 1, 1)), (3, (0, 1, 3, 1))])
def test_touchard(s, coeffs):
    assert touchard_poly(s).coefficients == coeffs


def test_touchard_is_poisson_raw_moment():
    # independent route: direct series sum of l^s under Poisson(x)
    l = np.arange(200)
    for x in (0.7, 3.0):
        w = stats.poisson.pmf(l, x)
        for s in range(7):
            assert touchard_poly(s)(x) == pytest.approx(np.sum(w * l ** s), rel=1e-12)


@pytest.mark.parametrize("construct", [
    centered_poisson_moment_recurrence,
    centered_poisson_moment_closed,
    centered_poisson_moment_touchard,
])
@pytest.mark.parametrize("s,coeffs", [
    (1, ()), (2, (0, 1)), (3, (0, 1)), (4, (0, 1, 3)), (5, (0, 1, 10)), (6, (0, 1, 25, 15)),
])
def test_centered_poly_examples(construct, s, coeffs):
    assert construct(s).coefficients == coeffs


def test_centered_poly_matches_series():
    # E(P - x)^s by direct summation over the Poisson pmf
    l = np.arange(300)
    for x in (0.5, 2.0, 7.5):
        w = stats.poisson.pmf(l, x)
        for s in range(9):
            direct = np.sum(w * (l - x) ** s)
            assert float(centered_poisson_moment_recurrence(s)(x)) == pytest.approx(
                direct, rel=1e-9, abs=1e-12)


def test_three_constructions_agree_to_14():
    for s in range(15):
        r = centered_poisson_moment_recurrence(s)
        assert centered_poisson_moment_closed(s) == r
        assert centered_poisson_moment_touchard(s) == r


def test_degree_and_leading_coefficient():
    for s in range(2, 15):
        m = centered_poisson_moment_closed(s)
        assert m.degree == (s // 2 if s % 2 == 0 else (s - 1) // 2)
        if s % 2 == 0:
            assert m.leading_coefficient == double_factorial_odd(s // 2)


def test_polynomial_display_and_zero():
    assert str(IntPolynomial()) == "0"
    assert str(IntPolynomial((0, 1, 3))) == "x + 3x^2"
    assert str(centered_poisson_moment_closed(6)) == "x + 25x^2 + 15x^3"
    assert str(IntPolynomial((-2, 0, -1))) == "-2 - x^2"
    assert IntPolynomial((0, 0, 0)).is_zero()
    assert IntPolynomial((4, 1))(0) == 4


@given(st.lists(st.integers(-50, 50), max_size=6), st.lists(st.integers(-50, 50), max_size=6),
       st.integers(-5, 5))
@settings(max_examples=100, deadline=None)
def test_polynomial_arithmetic_is_evaluation_homomorphism(a, b, x):
    p, q = IntPolynomial(tuple(a)), IntPolynomial(tuple(b))
    assert (p + q)(x) == p(x) + q(x)
    assert (p * q)(x) == p(x) * q(x)
    assert p.shift(2)(x) == x * x * p(x)
    assert not p.coefficients or p.coefficients[-1] != 0
