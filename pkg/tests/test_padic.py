from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from betacoding.padic import PadicNumber, valuation

primes = st.sampled_from([2, 3, 5, 7])
nonzero = st.fractions(max_denominator=10**6).filter(lambda q: q != 0)


def P(x, p, prec=40):
    return PadicNumber.from_rational(x, p, prec)


def test_valuation():
    assert valuation(12, 2) == 2
    assert valuation(Fraction(5, 27), 3) == -3


def test_minus_one_is_all_ones():
    assert P(-1, 2, 10).digits == [1] * 10


def test_geometric_series_in_z2():
    # sum_{m >= 0} 2^m = -1 in Z_2
    s = sum((P(2**m, 2) for m in range(40)), PadicNumber.zero(2, 40))
    assert s == P(-1, 2)


@given(nonzero, nonzero, primes)
def test_field_operations_match_rationals(a, b, p):
    x, y = P(a, p), P(b, p)
    for got, want in [(x + y, a + b), (x - y, a - b), (x * y, a * b), (x / y, a / b)]:
        if want == 0:
            assert got.is_zero()
        else:
            assert got == P(want, p, 20)


@given(nonzero, primes)
def test_lift_is_congruent(a, p):
    x = P(a, p)
    assert P(x.lift(), p) == x


@given(nonzero, primes, st.integers(-3, 3))
def test_powers(a, p, n):
    assert P(a, p) ** n == P(a**n, p, 20)


def test_residue_requires_integrality():
    with pytest.raises(ValueError):
        P(Fraction(1, 2), 2).residue(3)
    assert P(Fraction(1, 3), 2).residue(4) == (pow(3, -1, 16))
