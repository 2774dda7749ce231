"""Independent brute-force oracles used by the classify and acceptance tests.

The hypergeometric searcher looks for rational solutions y = N(x)/E(x) of

    (abx - c/q) y(q^2 x) - ((a+b)x - (1 + c/q)) y(qx) + (x - 1) y(x) = 0

with deg N <= 40 and a fixed denominator E. Poles away from 0 can only sit on
q^k with k between 1 + gamma - alpha - beta and 0, each simple: at the largest
pole the coefficient x - 1 must vanish, at the smallest the leading
coefficient must vanish, and in between the pole order cannot grow. E takes
every such point with two extra on each side, times x^8 for the point 0.
"""
from __future__ import annotations

from fractions import Fraction

import gmpy2

from qdiff.core import Poly, RatFun

DEGREE = 40
_PRIME = (1 << 61) - 1


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u:
            for j, v in enumerate(b):
                out[i + j] += u * v
    return out


def _dilate(a, s):
    return [c * s ** i for i, c in enumerate(a)]


def _denominator(alpha, beta, gamma, q):
    lo = min(0, 1 + gamma - alpha - beta) - 2
    E = [Fraction(0)] * 8 + [Fraction(1)]
    for k in range(lo, 3):
        E = _pmul(E, [-q ** k, Fraction(1)])
    return E


def _integer_rows(cols):
    """Transpose column vectors of Fractions into integer rows, cleared per row."""
    n = len(cols[0])
    rows = []
    for r in range(n):
        row = [c[r] for c in cols]
        den = 1
        for v in row:
            den = den * v.denominator // gmpy2.gcd(den, v.denominator)
        row = [int(v * den) for v in row]
        if any(row):
            rows.append(row)
    return rows


def _rank_mod(rows, ncols, p):
    m = [[v % p for v in r] for r in rows]
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [v * inv % p for v in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col]
                m[i] = [(u - f * v) % p for u, v in zip(m[i], m[rank])]
        rank += 1
    return rank


def _kernel_exact(rows, ncols):
    """Right kernel basis over Q via fraction-free elimination."""
    m = [[gmpy2.mpz(v) for v in r] for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r]
        for i in range(len(m)):
            if i != r and m[i][col]:
                a, b = pr[col], m[i][col]
                g = gmpy2.gcd(a, b)
                a, b = a // g, b // g
                new = [a * u - b * v for u, v in zip(m[i], pr)]
                g = 0
                for v in new:
                    g = gmpy2.gcd(g, v)
                if g > 1:
                    new = [v // g for v in new]
                m[i] = new
        pivots.append(col)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for i, c in enumerate(pivots):
            vec[c] = Fraction(int(-m[i][f]), int(m[i][c]))
        basis.append(vec)
    return basis


def hypergeom_rational_solutions(alpha, beta, gamma, q=2, degree=DEGREE):
    """Dimension of the rational solution space within the ansatz, and a basis
    (as RatFun) when the dimension is at least two."""
    q = Fraction(q)
    a, b, c = q ** alpha, q ** beta, q ** gamma
    L = [-c / q, a * b]
    M = [1 + c / q, -(a + b)]
    K = [Fraction(-1), Fraction(1)]
    E = _denominator(alpha, beta, gamma, q)
    E1, E2 = _dilate(E, q), _dilate(E, q * q)
    t0, t1, t2 = _pmul(K, _pmul(E1, E2)), _pmul(M, _pmul(E, E2)), _pmul(L, _pmul(E, E1))
    cols = []
    for j in range(degree + 1):
        # contribution of N = x^j
        col = [Fraction(0)] * (len(t0) + degree)
        for i, v in enumerate(t0):
            col[i + j] += v
        for i, v in enumerate(t1):
            col[i + j] += v * q ** j
        for i, v in enumerate(t2):
            col[i + j] += v * q ** (2 * j)
        cols.append(col)
    rows = _integer_rows(cols)
    ncols = degree + 1
    upper = ncols - _rank_mod(rows, ncols, _PRIME)
    if upper < 2:
        return upper, []
    kernel = _kernel_exact(rows, ncols)
    Epoly = Poly(E)
    sols = [RatFun(Poly(v), Epoly) for v in kernel]
    return len(kernel), sols


def hypergeom_residual(y: RatFun, alpha, beta, gamma, q=2) -> RatFun:
    q = Fraction(q)
    a, b, c = q ** alpha, q ** beta, q ** gamma
    x = RatFun.x()
    return ((a * b * x - c / q) * y.dilate(q * q) - ((a + b) * x - (1 + c / q)) * y.dilate(q)
            + (x - 1) * y)


def hypergeom_has_rational_basis(alpha, beta, gamma, q=2) -> bool:
    dim, sols = hypergeom_rational_solutions(alpha, beta, gamma, q)
    if dim < 2:
        return False
    assert all(hypergeom_residual(y, alpha, beta, gamma, q).is_zero() for y in sols)
    return True
