from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import qs, ratfuns
from qdiff.core import Poly, RatFun, qderive, vp
from qdiff.qcalc import (QSymbolTable, apply_dq_via_phi, apply_phi_via_dq, dq_to_phi_coeffs,
                         phi_to_dq_coeffs, q_binomial, q_factorial, q_factorial_valuation,
                         q_factorial_valuation_direct, q_int, q_pochhammer, q_pochhammer_x)

x = RatFun.x()


def test_q_int_and_factorial():
    assert q_int(0, 5) == 0
    assert q_int(3, 2) == 7
    assert q_factorial(4, 2) == 315
    assert q_int(7, 1) == 7


def test_q_binomial_examples():
    for n in range(6):
        assert q_binomial(n, 0, 3) == 1
        assert q_binomial(n, n, 3) == 1
    assert q_binomial(4, 2, 2) == 35
    assert q_binomial(3, 5, 2) == 0
    assert q_binomial(3, -1, 2) == 0


def test_pochhammer_examples():
    assert q_pochhammer_x(5, 0, 2) == Poly.const(1)
    assert q_pochhammer_x(1, 2, 2) == Poly([2, -3, 1])
    for n in range(1, 5):
        assert q_pochhammer(1, n, 3) == 0
    assert q_pochhammer(2, 2, 3) == (1 - 2) * (1 - 6)


def test_phi_dq_coefficient_examples():
    assert phi_to_dq_coeffs(1, 5) == [1, 4]
    assert phi_to_dq_coeffs(2, 2) == [1, 3, 2]


@pytest.mark.parametrize("q", [2, 3, Fraction(2, 3), -2])
def test_binomial_expansion_identity(q):
    q = Fraction(q)
    for n in range(31):
        lhs = Poly([(-1) ** j * q_binomial(n, j, q) * q ** (j * (j - 1) // 2) for j in range(n + 1)])
        rhs = Poly.const(1)
        for j in range(n):
            rhs = rhs * Poly([1, -q ** j])
        assert lhs == rhs


@pytest.mark.parametrize("q", [2, 3, Fraction(-1, 2), 7])
def test_pascal_recurrences(q):
    q = Fraction(q)
    for n in range(1, 31):
        for i in range(1, n + 1):
            c = q_binomial(n, i, q)
            assert c == q_binomial(n - 1, i - 1, q) + q ** i * q_binomial(n - 1, i, q)
            assert c == q ** (n - i) * q_binomial(n - 1, i - 1, q) + q_binomial(n - 1, i, q)


def test_binomial_matches_factorial_quotient():
    for q in (2, 3, Fraction(5, 7)):
        for n in range(16):
            for i in range(n + 1):
                want = q_factorial(n, q) / (q_factorial(n - i, q) * q_factorial(i, q))
                assert q_binomial(n, i, q) == want


def test_binomial_integral_at_integer_q():
    for q in (2, 3, 5):
        for n in range(31):
            for i in range(n + 1):
                assert q_binomial(n, i, q).denominator == 1
                assert q_binomial(n, i, q) > 0


def test_valuation_examples():
    assert q_factorial_valuation(4, 3, 8) == 4
    assert q_factorial_valuation(6, 3, 8) == 7
    assert q_factorial_valuation(1, 3, 8) == 0


@pytest.mark.parametrize("p,q", [(3, 8), (5, 2), (7, 10)])
def test_valuation_matches_direct_product(p, q):
    for n in range(61):
        assert q_factorial_valuation(n, p, q) == vp(q_factorial(n, q), p)
        assert q_factorial_valuation_direct(n, p, q) == vp(q_factorial(n, q), p)


@pytest.mark.parametrize("q", [2, 3, Fraction(1, 2)])
def test_dq_of_pochhammer(q):
    q = Fraction(q)
    for a in (0, 1, Fraction(-2, 3)):
        for n in range(1, 9):
            lhs = qderive(RatFun(q_pochhammer_x(a, n, q)), q, 1)
            assert lhs == RatFun(q_pochhammer_x(a, n - 1, q)) * q_int(n, q)


@given(ratfuns(), qs, st.integers(min_value=1, max_value=4))
def test_phi_dq_conversions(f, q, n):
    assert apply_phi_via_dq(f, n, q) == f.dilate(q ** n)
    assert apply_dq_via_phi(f, n, q) == qderive(f, q, n)


def test_conversion_round_trip_on_monomials():
    q = Fraction(3)
    for n in range(1, 5):
        for m in range(7):
            f = x ** m
            assert apply_dq_via_phi(apply_phi_via_dq(f, n, q), n, q) == qderive(f.dilate(q ** n), q, n)
            assert len(dq_to_phi_coeffs(n, q)) == n + 1


def test_symbol_table_threaded_fill():
    from concurrent.futures import ThreadPoolExecutor
    table = QSymbolTable(3)
    with ThreadPoolExecutor(4) as ex:
        got = list(ex.map(table.q_binomial, [20] * 21, range(21)))
    assert got == [q_binomial(20, i, 3) for i in range(21)]
