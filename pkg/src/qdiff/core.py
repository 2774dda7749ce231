"""Exact arithmetic substrate.

Univariate polynomials and rational functions over the rationals, square
matrices of rational functions, coefficient rings Z/p^l and reductions into
them, the dilatation x -> q^k x, the q-derivation, Gauss valuations and
recognition of exact powers of q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BadPrime, DomainError

INF = math.inf


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, str)):
        return Fraction(v)
    if isinstance(v, QExp):
        raise DomainError("a symbolic power of q is not a rational number")
    if isinstance(v, float):
        raise DomainError("floating point values are not accepted")
    return Fraction(v)


def vp_int(n: int, p: int) -> float | int:
    """p-adic valuation of an integer, INF for zero."""
    if n == 0:
        return INF
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def vp(r, p: int):
    r = as_fraction(r)
    if r == 0:
        return INF
    return vp_int(r.numerator, p) - vp_int(r.denominator, p)


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


# ---------------------------------------------------------------- polynomials


class Poly:
    """Polynomial over Q, coefficients indexed by degree; zero is ()."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [as_fraction(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def _raw(cls, c: list) -> "Poly":
        while c and c[-1] == 0:
            c.pop()
        obj = object.__new__(cls)
        obj.c = tuple(c)
        return obj

    @classmethod
    def const(cls, v) -> "Poly":
        return cls((v,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def monomial(cls, n: int, coeff=1) -> "Poly":
        return cls([0] * n + [coeff])

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def lc(self) -> Fraction:
        return self.c[-1]

    def __getitem__(self, i: int) -> Fraction:
        if 0 <= i < len(self.c):
            return self.c[i]
        return Fraction(0)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.c == other.c
        if isinstance(other, (int, Fraction)):
            return self.c == Poly.const(other).c
        return NotImplemented

    def __hash__(self):
        return hash(("Poly", self.c))

    def __repr__(self):
        return f"Poly({format_poly(self)})"

    def __neg__(self):
        return Poly._raw([-a for a in self.c])

    def __add__(self, other):
        other = _poly(other)
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return Poly._raw(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_poly(other))

    def __rsub__(self, other):
        return _poly(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Poly()
            return Poly._raw([a * other for a in self.c])
        other = _poly(other)
        a, b = self.c, other.c
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, u in enumerate(a):
            if u == 0:
                continue
            for j, v in enumerate(b):
                out[i + j] += u * v
        return Poly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise DomainError("negative power of a polynomial")
        result, base = Poly.const(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other):
        other = _poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        d = other.c
        dl = len(d)
        inv = 1 / d[-1]
        if len(r) < dl:
            return Poly(), self
        q = [Fraction(0)] * (len(r) - dl + 1)
        for k in range(len(r) - dl, -1, -1):
            coef = r[k + dl - 1] * inv
            q[k] = coef
            if coef:
                for j in range(dl):
                    r[k + j] -= coef * d[j]
        return Poly._raw(q), Poly._raw(r[: dl - 1])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self) -> "Poly":
        if not self.c:
            return self
        inv = 1 / self.c[-1]
        return Poly._raw([a * inv for a in self.c])

    def __call__(self, x0):
        acc = Fraction(0) if not isinstance(x0, Poly) else Poly()
        for a in reversed(self.c):
            acc = acc * x0 + a
        return acc

    def dilate(self, s) -> "Poly":
        """P(s*x)."""
        out, pw = [], Fraction(1)
        for a in self.c:
            out.append(a * pw)
            pw *= s
        return Poly._raw(out)

    def x_valuation(self) -> int | float:
        for i, a in enumerate(self.c):
            if a:
                return i
        return INF

    def shift_down(self, k: int) -> "Poly":
        return Poly._raw(list(self.c[k:]))

    def content_int(self) -> tuple[int, int]:
        """(lcm of denominators, gcd of numerators after scaling)."""
        den = 1
        for a in self.c:
            den = _lcm(den, a.denominator)
        g = 0
        for a in self.c:
            g = math.gcd(g, (a * den).numerator)
        return den, g


def _poly(v) -> Poly:
    if isinstance(v, Poly):
        return v
    if isinstance(v, (int, Fraction)):
        return Poly.const(v)
    raise TypeError(f"cannot convert {type(v).__name__} to Poly")


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd; gcd(0, 0) = 0."""
    while not b.is_zero():
        a, b = b, a % b
        if not b.is_zero():
            b = b.monic()
    return a.monic()


def format_poly(p: Poly, var: str = "x") -> str:
    if p.is_zero():
        return "0"
    terms = []
    for i in range(len(p.c) - 1, -1, -1):
        a = p.c[i]
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        mag = -a if a < 0 else a
        if i == 0:
            body = _fmt_q(mag)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            body = mono if mag == 1 else f"{_fmt_q(mag)}*{mono}"
        terms.append((sign, body))
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def _fmt_q(a: Fraction) -> str:
    return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"


# ------------------------------------------------------------ rational functions


class RatFun:
    """Reduced quotient of polynomials with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num=0, den=1, _reduced: bool = False):
        num, den = _poly(num), _poly(den)
        if den.is_zero():
            raise DomainError("zero denominator")
        if not _reduced:
            if num.is_zero():
                den = Poly.const(1)
            elif den.degree > 0:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num, den = num // g, den // g
            lead = den.lc()
            if lead != 1:
                num, den = num * (1 / lead), den * (1 / lead)
        self.num = num
        self.den = den

    @classmethod
    def x(cls) -> "RatFun":
        return cls(Poly.x(), _reduced=True)

    @classmethod
    def const(cls, v) -> "RatFun":
        return cls(Poly.const(v), _reduced=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def is_const(self) -> bool:
        return self.den.degree == 0 and self.num.degree <= 0

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise DomainError("not a constant")
        return self.num[0]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Poly)):
            other = RatFun(other)
        if isinstance(other, RatFun):
            return self.num.c == other.num.c and self.den.c == other.den.c
        return NotImplemented

    def __hash__(self):
        return hash(("RatFun", self.num.c, self.den.c))

    def __repr__(self):
        return f"RatFun({format_ratfun(self)})"

    def __str__(self):
        return format_ratfun(self)

    def __neg__(self):
        return RatFun(-self.num, self.den, _reduced=True)

    def __add__(self, other):
        other = _ratfun(other)
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)
        if self.is_poly() and other.is_poly():
            return RatFun(self.num + other.num, _reduced=True)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_ratfun(other))

    def __rsub__(self, other):
        return _ratfun(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RatFun(self.num * other, self.den, _reduced=True) if other else RatFun()
        other = _ratfun(other)
        if self.is_poly() and other.is_poly():
            return RatFun(self.num * other.num, _reduced=True)
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFun(self.den, self.num)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return RatFun(self.num * (1 / Fraction(other)), self.den, _reduced=True)
        return self * _ratfun(other).inverse()

    def __rtruediv__(self, other):
        return _ratfun(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFun(self.num ** n, self.den ** n, _reduced=True)

    def __call__(self, x0):
        x0 = as_fraction(x0)
        d = self.den(x0)
        if d == 0:
            raise DomainError(f"pole at {x0}")
        return self.num(x0) / d

    def dilate(self, s) -> "RatFun":
        """f(s*x) for a rational s."""
        s = as_fraction(s)
        if s == 0:
            raise DomainError("dilatation by zero")
        num, den = self.num.dilate(s), self.den.dilate(s)
        lead = den.lc()
        if lead != 1:
            num, den = num * (1 / lead), den * (1 / lead)
        return RatFun(num, den, _reduced=True)

    def x_valuation(self):
        """Order of vanishing at x = 0 (negative for poles)."""
        if self.is_zero():
            return INF
        return self.num.x_valuation() - self.den.x_valuation()

    def has_pole_at_zero(self) -> bool:
        return self.den[0] == 0

    def degree_at_infinity(self) -> int | float:
        """deg num - deg den; a pole at infinity iff positive."""
        if self.is_zero():
            return -INF
        return self.num.degree - self.den.degree

    def laurent(self, n_terms: int) -> tuple[int, list[Fraction]]:
        """(v, coeffs) with f = x^v * sum coeffs[i] x^i + O(x^(v+n_terms))."""
        if self.is_zero():
            return 0, [Fraction(0)] * n_terms
        vn = self.num.x_valuation()
        vd = self.den.x_valuation()
        num = self.num.shift_down(vn)
        den = self.den.shift_down(vd)
        return vn - vd, _series_div(num.c, den.c, n_terms)

    def series(self, n_terms: int) -> list[Fraction]:
        """Taylor coefficients at 0; requires no pole at 0."""
        if self.has_pole_at_zero():
            raise DomainError("pole at zero")
        return _series_div(self.num.c, self.den.c, n_terms)


def _series_div(num: Sequence[Fraction], den: Sequence[Fraction], n: int) -> list[Fraction]:
    inv0 = 1 / den[0]
    out: list[Fraction] = []
    for k in range(n):
        acc = num[k] if k < len(num) else Fraction(0)
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out.append(acc * inv0)
    return out


def _ratfun(v) -> RatFun:
    if isinstance(v, RatFun):
        return v
    if isinstance(v, (int, Fraction)):
        return RatFun.const(v)
    if isinstance(v, Poly):
        return RatFun(v, _reduced=True)
    raise TypeError(f"cannot convert {type(v).__name__} to RatFun")


def to_ratfun(v) -> RatFun:
    if isinstance(v, str):
        from .cli import parse_ratfun

        return parse_ratfun(v)
    return _ratfun(v if not isinstance(v, (int,)) else Fraction(v))


def format_ratfun(f: RatFun) -> str:
    n = format_poly(f.num)
    if f.is_poly():
        return n
    d = format_poly(f.den)
    if len(f.num.c) > 1 or f.num.c[0] < 0 or f.num.c[0].denominator != 1:
        n = f"({n})"
    return f"{n}/({d})"


def poly_from_roots(roots: Iterable, lead=1) -> Poly:
    out = Poly.const(lead)
    for r in roots:
        out = out * Poly((-as_fraction(r), 1))
    return out


# ------------------------------------------------------------------- matrices


class RatMatrix:
    """Dense matrix of rational functions, row-major."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Sequence):
        if len(entries) != rows * cols:
            raise DomainError("entry count does not match the shape")
        self.rows = rows
        self.cols = cols
        self.entries = tuple(to_ratfun(e) for e in entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RatMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        if any(len(row) != c for row in rows):
            raise DomainError("ragged matrix")
        return cls(r, c, [e for row in rows for e in row])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int | None = None) -> "RatMatrix":
        c = r if c is None else c
        return cls(r, c, [0] * (r * c))

    @classmethod
    def diag(cls, values: Sequence) -> "RatMatrix":
        n = len(values)
        return cls(n, n, [values[i] if i == j else 0 for i in range(n) for j in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij) -> RatFun:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[RatFun]:
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def to_rows(self) -> list[list[RatFun]]:
        return [self.row(i) for i in range(self.rows)]

    def __eq__(self, other):
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash(("RatMatrix", self.rows, self.cols, self.entries))

    def __repr__(self):
        body = "; ".join(", ".join(str(e) for e in self.row(i)) for i in range(self.rows))
        return f"RatMatrix([{body}])"

    def map(self, fn) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, [fn(e) for e in self.entries])

    def __add__(self, other: "RatMatrix"):
        if self.shape != other.shape:
            raise DomainError("shape mismatch")
        return RatMatrix(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "RatMatrix"):
        if self.shape != other.shape:
            raise DomainError("shape mismatch")
        return RatMatrix(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def scale(self, s) -> "RatMatrix":
        s = _ratfun(s) if not isinstance(s, (int, Fraction)) else s
        return self.map(lambda e: e * s)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise DomainError("shape mismatch in product")
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                acc = RatFun()
                for k in range(self.cols):
                    a = ri[k]
                    if a.is_zero():
                        continue
                    b = other.entries[k * other.cols + j]
                    if b.is_zero():
                        continue
                    acc = acc + a * b
                out.append(acc)
        return RatMatrix(self.rows, other.cols, out)

    def __pow__(self, n: int) -> "RatMatrix":
        if self.rows != self.cols:
            raise DomainError("power of a non-square matrix")
        if n < 0:
            return self.inverse() ** (-n)
        result, base = RatMatrix.identity(self.rows), self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def transpose(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows,
                         [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    def dilate(self, s) -> "RatMatrix":
        return self.map(lambda e: e.dilate(s))

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == RatMatrix.identity(self.rows)

    def is_constant(self) -> bool:
        return all(e.is_const() for e in self.entries)

    def evaluate(self, x0) -> list[list[Fraction]]:
        return [[e(x0) for e in self.row(i)] for i in range(self.rows)]

    def has_pole_at_zero(self) -> bool:
        return any(e.has_pole_at_zero() for e in self.entries)

    def _echelon(self):
        """Row echelon form over Q(x); returns (rows, rank, det sign-and-pivots product)."""
        m = [list(self.row(i)) for i in range(self.rows)]
        rank = 0
        det = RatFun.const(1)
        for col in range(self.cols):
            piv = None
            for r in range(rank, self.rows):
                if not m[r][col].is_zero():
                    if piv is None or _weight(m[r][col]) < _weight(m[piv][col]):
                        piv = r
            if piv is None:
                det = RatFun()
                continue
            if piv != rank:
                m[rank], m[piv] = m[piv], m[rank]
                det = -det
            pv = m[rank][col]
            det = det * pv
            inv = pv.inverse()
            for r in range(rank + 1, self.rows):
                if m[r][col].is_zero():
                    continue
                f = m[r][col] * inv
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
            rank += 1
        return m, rank, det

    def rank(self) -> int:
        return self._echelon()[1]

    def det(self) -> RatFun:
        if self.rows != self.cols:
            raise DomainError("determinant of a non-square matrix")
        if self.rows == 1:
            return self.entries[0]
        if self.rows == 2:
            return self[0, 0] * self[1, 1] - self[0, 1] * self[1, 0]
        return self._echelon()[2]

    def inverse(self) -> "RatMatrix":
        n = self.rows
        if n != self.cols:
            raise DomainError("inverse of a non-square matrix")
        if n == 1:
            return RatMatrix(1, 1, [self.entries[0].inverse()])
        if n == 2:
            d = self.det()
            if d.is_zero():
                raise DomainError("singular matrix")
            di = d.inverse()
            return RatMatrix(2, 2, [self[1, 1] * di, -self[0, 1] * di,
                                    -self[1, 0] * di, self[0, 0] * di])
        m = [list(self.row(i)) + [RatFun.const(1) if i == j else RatFun() for j in range(n)]
             for i in range(n)]
        for col in range(n):
            piv = None
            for r in range(col, n):
                if not m[r][col].is_zero():
                    if piv is None or _weight(m[r][col]) < _weight(m[piv][col]):
                        piv = r
            if piv is None:
                raise DomainError("singular matrix")
            m[col], m[piv] = m[piv], m[col]
            inv = m[col][col].inverse()
            m[col] = [a * inv for a in m[col]]
            for r in range(n):
                if r != col and not m[r][col].is_zero():
                    f = m[r][col]
                    m[r] = [a - f * b for a, b in zip(m[r], m[col])]
        return RatMatrix(n, n, [m[i][n + j] for i in range(n) for j in range(n)])

    def kron(self, other: "RatMatrix") -> "RatMatrix":
        r, c = self.rows * other.rows, self.cols * other.cols
        out = []
        for i1 in range(self.rows):
            for i2 in range(other.rows):
                for j1 in range(self.cols):
                    for j2 in range(other.cols):
                        out.append(self[i1, j1] * other[i2, j2])
        return RatMatrix(r, c, out)


def _weight(f: RatFun) -> int:
    return len(f.num.c) + len(f.den.c)


def frac_rank(rows: list[list[Fraction]]) -> int:
    """Rank of a matrix of rationals."""
    return len(frac_rref(rows)[1])


def frac_rref(rows: list[list]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over a field; returns (matrix, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def frac_nullspace(rows: list[list], ncols: int) -> list[list]:
    """Basis of the right kernel {v : M v = 0} over a field."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    m, pivots = frac_rref(rows)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][f]
        basis.append(v)
    return basis


# ----------------------------------------------------- dilatation, q-derivation


def dilate(f: RatFun, q, k: int = 1) -> RatFun:
    """f(q^k x)."""
    q = as_fraction(q)
    if q == 0:
        raise DomainError("q must be nonzero")
    return _ratfun(f).dilate(q ** k)


def qderive(f: RatFun, q, n: int = 1) -> RatFun:
    """n-th power of d_q f = (f(qx) - f(x)) / ((q-1) x)."""
    q = as_fraction(q)
    if q in (0, 1):
        raise DomainError("q must differ from 0 and 1")
    f = _ratfun(f)
    scale = RatFun(Poly((0, q - 1)), _reduced=True).inverse()
    for _ in range(n):
        if f.is_const():
            return RatFun()
        f = (f.dilate(q) - f) * scale
    return f


def qderive_matrix(m: RatMatrix, q, n: int = 1) -> RatMatrix:
    return m.map(lambda e: qderive(e, q, n))


def gauss_valuation(f, p: int):
    """Additive Gauss valuation: |f|_{p,Gauss} = p^(-v); INF for zero."""
    f = _ratfun(f) if not isinstance(f, RatFun) else f
    if f.is_zero():
        return INF
    return (min(vp(a, p) for a in f.num.c if a)
            - min(vp(a, p) for a in f.den.c if a))


def gauss_valuation_matrix(m: RatMatrix, p: int):
    return min(gauss_valuation(e, p) for e in m.entries)


# ----------------------------------------------------------- powers of q


@dataclass(frozen=True)
class QExp:
    """The exact value q^exponent, kept symbolic."""

    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "exponent", Fraction(self.exponent))

    def __mul__(self, other: "QExp") -> "QExp":
        return QExp(self.exponent + other.exponent)

    def __truediv__(self, other: "QExp") -> "QExp":
        return QExp(self.exponent - other.exponent)

    def is_integral(self) -> bool:
        return self.exponent.denominator == 1

    def value(self, q) -> Fraction | None:
        """The rational value of q^exponent, or None if it is irrational."""
        q = as_fraction(q)
        e, d = self.exponent.numerator, self.exponent.denominator
        base = q ** e
        if d == 1:
            return base
        root = _rational_root(base, d)
        return root

    def __str__(self):
        return f"q^({self.exponent})" if self.exponent.denominator != 1 else f"q^{self.exponent}"


def _int_root(n: int, d: int) -> int | None:
    if n < 0:
        return None
    r = round(n ** (1.0 / d)) if n < 2 ** 1000 else _bisect_root(n, d)
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** d == n:
            return c
    return None


def _bisect_root(n: int, d: int) -> int:
    lo, hi = 0, 1 << (n.bit_length() // d + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** d <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


def _rational_root(r: Fraction, d: int) -> Fraction | None:
    """Real d-th root when rational (positive root for even d)."""
    sign = 1
    if r < 0:
        if d % 2 == 0:
            return None
        sign = -1
    a = _int_root(abs(r.numerator), d)
    b = _int_root(r.denominator, d)
    if a is None or b is None:
        return None
    return sign * Fraction(a, b)


@lru_cache(maxsize=256)
def _reference_prime(q: Fraction) -> int:
    from sympy import factorint

    for part in (abs(q.numerator), q.denominator):
        if part > 1:
            return min(factorint(part))
    raise DomainError("q must not be 0 or +-1")


def _check_q(q) -> Fraction:
    q = as_fraction(q)
    if q in (0, 1, -1):
        raise DomainError("q must not be 0 or +-1")
    return q


def q_rational_power_test(r, q, dcap: int = 64) -> Fraction | None:
    """e/d in lowest terms with d <= dcap and r^d = q^e, else None."""
    q = _check_q(q)
    r = as_fraction(r)
    if r == 0:
        raise DomainError("r must be nonzero")
    p = _reference_prime(q)
    ratio = Fraction(vp(r, p), vp(q, p))
    if ratio.denominator > dcap:
        return None
    e, d = ratio.numerator, ratio.denominator
    if r ** d != q ** e:
        return None
    return ratio


def q_power_test(r, q) -> int | None:
    """k with r = q^k, else None."""
    ratio = q_rational_power_test(r, q, 1)
    return None if ratio is None else ratio.numerator


def to_qexp(v, q, dcap: int = 64) -> QExp | None:
    """Recognise v as q^(e/d); QExp passes through unchanged."""
    if isinstance(v, QExp):
        return v
    v = as_fraction(v)
    if v == 0:
        return None
    e = q_rational_power_test(v, q, dcap)
    return None if e is None else QExp(e)


# ---------------------------------------------------------------- factoring


def factor_poly(P: Poly) -> tuple[Fraction, list[tuple[Poly, int]]]:
    """(constant, [(monic irreducible factor, multiplicity)]) over Q."""
    P = _poly(P)
    if P.is_zero():
        raise DomainError("cannot factor the zero polynomial")
    if P.degree == 0:
        return P.c[0], []
    from sympy import QQ, Poly as SPoly, Symbol

    x = Symbol("x")
    sp = SPoly([QQ(a.numerator, a.denominator) for a in reversed(P.c)], x, domain=QQ)
    const, facs = sp.factor_list()
    out = []
    lead = Fraction(int(const.p), int(const.q)) if hasattr(const, "p") else Fraction(str(const))
    for fac, mult in facs:
        coeffs = [Fraction(int(c.numerator), int(c.denominator)) for c in reversed(fac.all_coeffs())]
        fp = Poly(coeffs)
        lead *= fp.lc() ** mult
        out.append((fp.monic(), int(mult)))
    out.sort(key=lambda t: (t[0].degree, t[0].c))
    return lead, out


# ------------------------------------------------------------ modular rings


@dataclass(frozen=True)
class ModRing:
    p: int
    ell: int = 1

    def __post_init__(self):
        if self.ell < 1:
            raise DomainError("ell must be positive")

    @property
    def modulus(self) -> int:
        return self.p ** self.ell

    def inv(self, a: int) -> int:
        a %= self.modulus
        if a % self.p == 0:
            raise DomainError(f"{a} is not a unit modulo {self.modulus}")
        return pow(a, -1, self.modulus)

    def reduce(self, r) -> int:
        r = as_fraction(r)
        if r.denominator % self.p == 0:
            raise BadPrime(self.p, "coefficient denominator divisible by p")
        return r.numerator * self.inv(r.denominator) % self.modulus


def _safe_dtype(m: int, length: int):
    return np.int64 if m * m * max(length, 1) < (1 << 62) else object


def mp_trim(a: np.ndarray) -> np.ndarray:
    nz = np.nonzero(a)[0]
    if len(nz) == 0:
        return a[:0]
    return a[: nz[-1] + 1]


def mp_mul(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0, dtype=object if a.dtype == object else np.int64)
    dt = _safe_dtype(m, min(len(a), len(b)))
    out = np.convolve(a.astype(dt), b.astype(dt)) % m
    if dt is object:
        return mp_trim(out)
    return mp_trim(out.astype(np.int64))


def mp_add(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    if len(b):
        out[: len(b)] = (out[: len(b)] + b) % m
    return mp_trim(out)


def mp_scale(a: np.ndarray, c: int, m: int) -> np.ndarray:
    if len(a) == 0:
        return a
    c %= m
    if c * m < (1 << 62) and a.dtype != object:
        return mp_trim(a * c % m)
    return mp_trim(np.array([int(v) * c % m for v in a], dtype=object))


def mp_dilate(a: np.ndarray, s: int, m: int) -> np.ndarray:
    """P(s x) with s a unit mod m."""
    if len(a) == 0:
        return a
    powers = [1] * len(a)
    for i in range(1, len(a)):
        powers[i] = powers[i - 1] * s % m
    if a.dtype == object or m * m >= (1 << 62):
        return mp_trim(np.array([int(v) * w % m for v, w in zip(a, powers)], dtype=object))
    return mp_trim(a * np.array(powers, dtype=np.int64) % m)


def _to_int_array(vals: list[int], m: int) -> np.ndarray:
    dt = np.int64 if m < (1 << 31) else object
    return mp_trim(np.array([v % m for v in vals], dtype=dt))


def mp_is_zero(a: np.ndarray) -> bool:
    return len(mp_trim(a)) == 0


def mp_has_unit_content(a: np.ndarray, p: int) -> bool:
    return any(int(v) % p for v in a)


class ModMatrix:
    """Matrix over (Z/p^l)[x] localised at a common denominator: num / den."""

    __slots__ = ("ring", "rows", "cols", "num", "den")

    def __init__(self, ring: ModRing, rows: int, cols: int, num: Sequence[np.ndarray], den: np.ndarray):
        self.ring = ring
        self.rows = rows
        self.cols = cols
        self.num = tuple(mp_trim(np.asarray(a)) for a in num)
        self.den = mp_trim(np.asarray(den))
        if not mp_has_unit_content(self.den, ring.p):
            raise BadPrime(ring.p)

    @classmethod
    def identity(cls, ring: ModRing, n: int) -> "ModMatrix":
        one = _to_int_array([1], ring.modulus)
        zero = _to_int_array([], ring.modulus)
        return cls(ring, n, n, [one if i == j else zero for i in range(n) for j in range(n)], one)

    def entry(self, i: int, j: int) -> "ModRatFun":
        return ModRatFun(self.ring, self.num[i * self.cols + j], self.den)

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        m = self.ring.modulus
        out = []
        for i in range(self.rows):
            for j in range(other.cols):
                acc = np.zeros(0, dtype=np.int64)
                for k in range(self.cols):
                    a = self.num[i * self.cols + k]
                    b = other.num[k * other.cols + j]
                    if len(a) and len(b):
                        acc = mp_add(acc, mp_mul(a, b, m), m)
                out.append(acc)
        return ModMatrix(self.ring, self.rows, other.cols, out, mp_mul(self.den, other.den, m))

    def dilate(self, s: int) -> "ModMatrix":
        m = self.ring.modulus
        return ModMatrix(self.ring, self.rows, self.cols,
                         [mp_dilate(a, s, m) for a in self.num], mp_dilate(self.den, s, m))

    def minus_scalar(self, c: int) -> "ModMatrix":
        """self - c*I."""
        m = self.ring.modulus
        cd = mp_scale(self.den, c, m)
        out = list(self.num)
        for i in range(self.rows):
            k = i * self.cols + i
            out[k] = mp_add(out[k], mp_scale(cd, -1, m), m)
        return ModMatrix(self.ring, self.rows, self.cols, out, self.den)

    def is_zero(self) -> bool:
        return all(mp_is_zero(a) for a in self.num)

    def is_identity(self) -> bool:
        return self.minus_scalar(1).is_zero()

    def reduce_to(self, ring: ModRing) -> "ModMatrix":
        """Coarser reduction, e.g. from p^l down to p."""
        if ring.p != self.ring.p or ring.ell > self.ring.ell:
            raise DomainError("can only reduce to a coarser modulus of the same prime")
        m = ring.modulus
        return ModMatrix(ring, self.rows, self.cols,
                         [_to_int_array([int(v) for v in a], m) for a in self.num],
                         _to_int_array([int(v) for v in self.den], m))

    def to_lists(self) -> tuple[list[list[list[int]]], list[int]]:
        rows = [[[int(v) for v in self.num[i * self.cols + j]] for j in range(self.cols)]
                for i in range(self.rows)]
        return rows, [int(v) for v in self.den]

    def __repr__(self):
        rows, den = self.to_lists()
        return f"ModMatrix(mod {self.ring.modulus}, num={rows}, den={den})"


class ModRatFun:
    """num / den over Z/p^l with den of unit content."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: ModRing, num: np.ndarray, den: np.ndarray):
        self.ring = ring
        self.num = mp_trim(np.asarray(num))
        self.den = mp_trim(np.asarray(den))
        if not mp_has_unit_content(self.den, ring.p):
            raise BadPrime(ring.p)

    def __mul__(self, other: "ModRatFun") -> "ModRatFun":
        m = self.ring.modulus
        return ModRatFun(self.ring, mp_mul(self.num, other.num, m), mp_mul(self.den, other.den, m))

    def __add__(self, other: "ModRatFun") -> "ModRatFun":
        m = self.ring.modulus
        return ModRatFun(self.ring,
                         mp_add(mp_mul(self.num, other.den, m), mp_mul(other.num, self.den, m), m),
                         mp_mul(self.den, other.den, m))

    def __pow__(self, n: int) -> "ModRatFun":
        out = ModRatFun(self.ring, _to_int_array([1], self.ring.modulus), _to_int_array([1], self.ring.modulus))
        for _ in range(n):
            out = out * self
        return out

    def equals_const(self, c: int) -> bool:
        """num == c * den in (Z/p^l)[x]; valid since den is not a zero divisor."""
        m = self.ring.modulus
        return mp_is_zero(mp_add(self.num, mp_scale(self.den, -c, m), m))

    def __eq__(self, other):
        if not isinstance(other, ModRatFun):
            return NotImplemented
        m = self.ring.modulus
        lhs = mp_mul(self.num, other.den, m)
        rhs = mp_mul(other.num, self.den, m)
        return mp_is_zero(mp_add(lhs, mp_scale(rhs, -1, m), m))

    __hash__ = None

    def is_unit_like(self) -> bool:
        """Non-zero-divisor numerator: unit content modulo p."""
        return mp_has_unit_content(self.num, self.ring.p)

    def __repr__(self):
        return f"ModRatFun(mod {self.ring.modulus}, {[int(v) for v in self.num]}/{[int(v) for v in self.den]})"


def _integer_form(polys: Sequence[Poly], den: Poly) -> tuple[list[list[int]], list[int]]:
    scale = 1
    for P in list(polys) + [den]:
        for a in P.c:
            scale = _lcm(scale, a.denominator)
    ints = [[int(a * scale) for a in P.c] for P in polys]
    dint = [int(a * scale) for a in den.c]
    g = 0
    for row in ints + [dint]:
        for v in row:
            g = math.gcd(g, v)
    g = g or 1
    return [[v // g for v in row] for row in ints], [v // g for v in dint]


def _common_denominator(fs: Sequence[RatFun]) -> Poly:
    d = Poly.const(1)
    for f in fs:
        if f.den.degree > 0 and not (d % f.den).is_zero():
            d = d * (f.den // poly_gcd(d, f.den))
    return d


def mod_reduce(f, ring: ModRing):
    """Reduce a RatFun or RatMatrix into coefficients modulo p^l."""
    m = ring.modulus
    if isinstance(f, RatMatrix):
        d = _common_denominator(f.entries)
        nums = [e.num * (d // e.den) for e in f.entries]
        ints, dint = _integer_form(nums, d)
        if all(v % ring.p == 0 for v in dint):
            raise BadPrime(ring.p)
        return ModMatrix(ring, f.rows, f.cols, [_to_int_array(r, m) for r in ints], _to_int_array(dint, m))
    f = _ratfun(f) if not isinstance(f, RatFun) else f
    ints, dint = _integer_form([f.num], f.den)
    if all(v % ring.p == 0 for v in dint):
        raise BadPrime(ring.p)
    return ModRatFun(ring, _to_int_array(ints[0], m), _to_int_array(dint, m))
