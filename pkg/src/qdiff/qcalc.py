"""q-combinatorics: q-integers, q-factorials, Gaussian binomials, q-Pochhammer
symbols, the conversion between powers of the dilatation and of d_q, and
p-adic valuations of q-factorials."""
from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache

from .core import INF, DomainError, Poly, RatFun, as_fraction, dilate, qderive, vp, vp_int


class QSymbolTable:
    """Per-q caches of [n]_q, [n]_q! and q-binomials."""

    def __init__(self, q):
        self.q = as_fraction(q)
        self._ints = [Fraction(0)]
        self._facts = [Fraction(1)]
        self._binom: dict[tuple[int, int], Fraction] = {}
        self._lock = threading.Lock()

    def q_int(self, n: int) -> Fraction:
        if n < 0:
            raise DomainError("n must be nonnegative")
        with self._lock:
            ints = self._ints
            while len(ints) <= n:
                k = len(ints)
                ints.append(ints[-1] + self.q ** (k - 1))
            return ints[n]

    def q_factorial(self, n: int) -> Fraction:
        if n < 0:
            raise DomainError("n must be nonnegative")
        self.q_int(n)
        with self._lock:
            facts = self._facts
            while len(facts) <= n:
                facts.append(facts[-1] * self._ints[len(facts)])
            return facts[n]

    def q_binomial(self, n: int, i: int) -> Fraction:
        if i < 0 or i > n or n < 0:
            return Fraction(0)
        if i == 0 or i == n:
            return Fraction(1)
        with self._lock:
            hit = self._binom.get((n, i))
            if hit is not None:
                return hit
            q = self.q
            table = self._binom
            for m in range(2, n + 1):
                for j in range(1, m):
                    if (m, j) not in table:
                        left = table.get((m - 1, j - 1), Fraction(1))
                        right = table.get((m - 1, j), Fraction(1))
                        table[(m, j)] = left + right * q ** j
            return table[(n, i)]


@lru_cache(maxsize=64)
def symbol_table(q) -> QSymbolTable:
    return QSymbolTable(q)


def q_int(n: int, q) -> Fraction:
    return symbol_table(as_fraction(q)).q_int(n)


def q_factorial(n: int, q) -> Fraction:
    return symbol_table(as_fraction(q)).q_factorial(n)


def q_binomial(n: int, i: int, q) -> Fraction:
    return symbol_table(as_fraction(q)).q_binomial(n, i)


def q_pochhammer_x(a, n: int, q) -> Poly:
    """(x - a)(x - qa)...(x - q^(n-1) a) as a polynomial."""
    a, q = as_fraction(a), as_fraction(q)
    out = Poly.const(1)
    for i in range(n):
        out = out * Poly((-a * q ** i, 1))
    return out


def q_pochhammer(a, n: int, q) -> Fraction:
    """(a; q)_n = (1 - a)(1 - aq)...(1 - a q^(n-1))."""
    a, q = as_fraction(a), as_fraction(q)
    out = Fraction(1)
    for i in range(n):
        out *= 1 - a * q ** i
    return out


def phi_to_dq_coeffs(n: int, q) -> list[Fraction]:
    """c with phi_q^n = sum_i c[i] x^i d_q^i."""
    q = as_fraction(q)
    if q in (0, 1):
        raise DomainError("q must differ from 0 and 1")
    return [q_binomial(n, i, q) * (q - 1) ** i * q ** (i * (i - 1) // 2) for i in range(n + 1)]


def dq_to_phi_coeffs(n: int, q) -> list[Fraction]:
    """c with d_q^n = x^(-n) sum_j c[j] phi_q^j."""
    q = as_fraction(q)
    if q in (0, 1):
        raise DomainError("q must differ from 0 and 1")
    qi = 1 / q
    scale = Fraction((-1) ** n) / (q - 1) ** n
    return [scale * (-1) ** j * q_binomial(n, j, qi) * qi ** (j * (j - 1) // 2) for j in range(n + 1)]


def apply_phi_via_dq(f: RatFun, n: int, q) -> RatFun:
    coeffs = phi_to_dq_coeffs(n, q)
    out = RatFun()
    for i, c in enumerate(coeffs):
        out = out + RatFun(Poly.monomial(i, c)) * qderive(f, q, i)
    return out


def apply_dq_via_phi(f: RatFun, n: int, q) -> RatFun:
    coeffs = dq_to_phi_coeffs(n, q)
    out = RatFun()
    for j, c in enumerate(coeffs):
        out = out + dilate(f, q, j) * c
    return out * RatFun(Poly.monomial(n)).inverse()


# ------------------------------------------------------------ p-adic helpers


def q_mod(q, m: int) -> int:
    q = as_fraction(q)
    return q.numerator * pow(q.denominator, -1, m) % m


def multiplicative_order(q, p: int) -> int:
    """Order of q in (Z/p)^*, by iterated multiplication."""
    q = as_fraction(q)
    if q.numerator % p == 0 or q.denominator % p == 0:
        raise DomainError(f"q is not a unit modulo {p}")
    g = q_mod(q, p)
    k, acc = 1, g
    while acc != 1:
        acc = acc * g % p
        k += 1
    return k


def v_one_minus_q_power(q, k: int, p: int):
    """v_p(1 - q^k) for q a p-adic unit, INF when q^k = 1."""
    q = as_fraction(q)
    a, b = q.numerator, q.denominator
    if q == 1:
        return INF
    if a % p == 0 or b % p == 0:
        raise DomainError("q must be a unit at p")
    if k == 0 or (k % 2 == 0 and a == -b):
        return INF
    prec = 8
    while True:
        m = p ** prec
        r = (pow(b, k, m) - pow(a, k, m)) % m
        if r:
            return vp_int(r, p)
        prec *= 2


def q_int_valuation(n: int, p: int, q) -> int:
    """v_p([n]_q) computed directly."""
    q = as_fraction(q)
    if n == 0:
        return INF
    if q == 1:
        return vp_int(n, p)
    return v_one_minus_q_power(q, n, p) - v_one_minus_q_power(q, 1, p)


def q_factorial_valuation_direct(n: int, p: int, q) -> int:
    return sum(q_int_valuation(i, p, q) for i in range(1, n + 1))


def is_strong(p: int, ell) -> bool:
    return ell >= 1 and (p > 2 or ell >= 2)


def q_factorial_valuation(n: int, p: int, q) -> int:
    """v_p([n]_q!), by the closed form when |1 - q^kappa|_p < |p|^(1/(p-1))."""
    q = as_fraction(q)
    if vp(q, p) != 0:
        raise DomainError(f"q = {q} is not a unit at {p}")
    kappa = multiplicative_order(q, p)
    ell = v_one_minus_q_power(q, kappa, p)
    if not is_strong(p, ell):
        return q_factorial_valuation_direct(n, p, q)
    m = n // kappa
    v_kappa = ell - v_one_minus_q_power(q, 1, p) if kappa > 1 else 0
    v_fact = 0
    pk = p
    while pk <= m:
        v_fact += m // pk
        pk *= p
    return m * v_kappa + v_fact
