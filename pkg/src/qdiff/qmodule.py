"""Linear q-difference systems.

Convention: a system (q, A) acts on a basis row e by Phi(e) = e A(x), so a
fundamental matrix of row solutions satisfies Y(qx) = Y(x) A(x).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (DomainError, Poly, RatFun, RatMatrix, as_fraction, frac_rank,
                   qderive_matrix, to_ratfun)
from .errors import PoleAtZero, Resonant, SearchExhausted
from .qcalc import q_factorial


class QDiffSystem:
    __slots__ = ("q", "A")

    def __init__(self, q, A):
        q = as_fraction(q)
        if q == 0:
            raise DomainError("q must be nonzero")
        if not isinstance(A, RatMatrix):
            A = RatMatrix.from_rows(A)
        if A.rows != A.cols:
            raise DomainError("system matrix must be square")
        if A.det().is_zero():
            raise DomainError("system matrix must be invertible")
        self.q = q
        self.A = A

    @property
    def rank(self) -> int:
        return self.A.rows

    def __eq__(self, other):
        return isinstance(other, QDiffSystem) and self.q == other.q and self.A == other.A

    def __hash__(self):
        return hash((self.q, self.A))

    def __repr__(self):
        return f"QDiffSystem(q={self.q}, A={self.A!r})"

    def to_delta(self) -> "DeltaSystem":
        return DeltaSystem(self.q, _g1(self))

    @classmethod
    def from_column_convention(cls, q, B) -> "QDiffSystem":
        """Adapter for y(qx) = B(x) y(x) with column solutions."""
        if not isinstance(B, RatMatrix):
            B = RatMatrix.from_rows(B)
        return cls(q, B.transpose())


@dataclass(frozen=True)
class DeltaSystem:
    q: Fraction
    G1: RatMatrix

    def to_qdiff(self) -> QDiffSystem:
        n = self.G1.rows
        scale = RatFun(Poly((0, self.q - 1)))
        return QDiffSystem(self.q, RatMatrix.identity(n) + self.G1.scale(scale))


@dataclass
class FormalSolution:
    """Truncated matrix power series sum_{n<=N} Y_n x^n."""

    N: int
    coeffs: list = field(default_factory=list)

    def __getitem__(self, n: int):
        return self.coeffs[n]

    def evaluate_entry(self, i: int, j: int) -> list[Fraction]:
        return [Y[i][j] for Y in self.coeffs]


# ----------------------------------------------------- Fraction matrix helpers


def fmat_zero(r: int, c: int | None = None) -> list[list[Fraction]]:
    c = r if c is None else c
    return [[Fraction(0)] * c for _ in range(r)]


def fmat_identity(n: int) -> list[list[Fraction]]:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def fmat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum((a[i][t] * b[t][j] for t in range(k)), Fraction(0)) for j in range(m)]
            for i in range(n)]


def fmat_add(a, b):
    return [[u + v for u, v in zip(ra, rb)] for ra, rb in zip(a, b)]


def fmat_scale(a, s):
    return [[u * s for u in r] for r in a]


def matrix_series(A: RatMatrix, n_terms: int) -> list[list[list[Fraction]]]:
    """Taylor coefficients of A at 0 as a list of rational matrices."""
    if A.has_pole_at_zero():
        raise PoleAtZero("matrix has a pole at 0")
    ser = [e.series(n_terms) for e in A.entries]
    return [[[ser[i * A.cols + j][k] for j in range(A.cols)] for i in range(A.rows)]
            for k in range(n_terms)]


# ----------------------------------------------------------------- operations


def _x_minus_scale(q) -> RatFun:
    return RatFun(Poly((0, as_fraction(q) - 1))).inverse()


def _g1(S: QDiffSystem) -> RatMatrix:
    if S.q == 1:
        raise DomainError("q must differ from 1")
    return (S.A - RatMatrix.identity(S.rank)).scale(_x_minus_scale(S.q))


def phi_iterate(S: QDiffSystem, n: int) -> RatMatrix:
    """A(x) A(qx) ... A(q^(n-1) x)."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    out = RatMatrix.identity(S.rank)
    if S.A.is_constant():
        return S.A ** n
    for k in range(n):
        out = out @ S.A.dilate(S.q ** k)
    return out


def delta_matrices(S: QDiffSystem, n: int) -> list[RatMatrix]:
    """[G_0, ..., G_n] with G_{k+1} = G_1 G_k(qx) + d_q G_k."""
    G1 = _g1(S)
    out = [RatMatrix.identity(S.rank)]
    if n >= 1:
        out.append(G1)
    constant = G1.is_constant()
    for _ in range(2, n + 1):
        prev = out[-1]
        if constant:
            out.append(G1 @ prev)
        else:
            out.append(G1 @ prev.dilate(S.q) + qderive_matrix(prev, S.q))
    return out


def casorati_matrix(u: Sequence, q) -> RatMatrix:
    u = [to_ratfun(f) for f in u]
    q = as_fraction(q)
    mu = len(u)
    return RatMatrix(mu, mu, [f.dilate(q ** j) for f in u for j in range(mu)])


def casorati_rank(u: Sequence, q) -> int:
    """Rank over Q(x) of (phi_q^j u_i); the dimension of the Q-span of u."""
    if not u:
        return 0
    return casorati_matrix(u, q).rank()


@dataclass(frozen=True)
class CyclicVector:
    m: tuple  # coordinates as RatFun (polynomials)
    P: RatMatrix  # columns: coordinates of m, Phi m, ..., Phi^(mu-1) m
    companion: RatMatrix  # P^{-1} A P(qx)


def _phi_coords(S: QDiffSystem, c: list[RatFun]) -> list[RatFun]:
    """Coordinates of Phi(e c) = e A(x) c(qx)."""
    mu = S.rank
    cq = [f.dilate(S.q) for f in c]
    return [sum((S.A[i, k] * cq[k] for k in range(mu)), RatFun()) for i in range(mu)]


def _candidate_vectors(mu: int):
    unit = lambda i: [Poly.const(int(k == i)) for k in range(mu)]
    for i in range(mu):
        yield unit(i)
    lams = (1, -1, 2)
    for i, j in itertools.permutations(range(mu), 2):
        for s in range(2 * mu + 1):
            for lam in lams:
                v = unit(i)
                v[j] = v[j] + Poly.monomial(s, lam)
                yield v
    for i, j, k in itertools.permutations(range(mu), 3):
        for s in range(2 * mu + 1):
            for t in range(2 * mu + 1):
                for lam in lams:
                    v = unit(i)
                    v[j] = v[j] + Poly.monomial(s, lam)
                    v[k] = v[k] + Poly.monomial(t, 1)
                    yield v


def cyclic_vector(S: QDiffSystem) -> CyclicVector:
    mu = S.rank
    for cand in _candidate_vectors(mu):
        cols = [[RatFun(p) for p in cand]]
        for _ in range(mu - 1):
            cols.append(_phi_coords(S, cols[-1]))
        P = RatMatrix(mu, mu, [cols[j][i] for i in range(mu) for j in range(mu)])
        if P.det().is_zero():
            continue
        companion = P.inverse() @ S.A @ P.dilate(S.q)
        return CyclicVector(tuple(cols[0]), P, companion)
    raise SearchExhausted("no cyclic vector in the bounded search")


def is_companion_shaped(C: RatMatrix) -> bool:
    """Ones on the subdiagonal, zeros elsewhere outside the last column."""
    n = C.rows
    for i in range(n):
        for j in range(n - 1):
            want = 1 if i == j + 1 else 0
            if C[i, j] != want:
                return False
    return True


def delta_cyclic_coefficients(S: QDiffSystem, m: Sequence) -> list[RatFun]:
    """a_0..a_{mu-1} with Delta^mu m = sum a_i Delta^i m."""
    mu = S.rank
    scale = _x_minus_scale(S.q)
    cols = [[to_ratfun(v) for v in m]]
    for _ in range(mu):
        c = cols[-1]
        phi = _phi_coords(S, c)
        cols.append([(a - b) * scale for a, b in zip(phi, c)])
    P = RatMatrix(mu, mu, [cols[j][i] for i in range(mu) for j in range(mu)])
    rhs = RatMatrix(mu, 1, cols[mu])
    sol = P.inverse() @ rhs
    return [sol[i, 0] for i in range(mu)]


def formal_solution(S: QDiffSystem, N: int) -> FormalSolution:
    """sum_{n<=N} G_n(0)/[n]_q! x^n, computed from Y(qx) = Y(x) A(x), Y(0) = I."""
    mu = S.rank
    if S.A.has_pole_at_zero() or _g1(S).has_pole_at_zero():
        raise PoleAtZero("G_1 has a pole at x = 0")
    A = matrix_series(S.A, N + 1)
    q = S.q
    Y = [fmat_identity(mu)]
    for n in range(1, N + 1):
        acc = fmat_zero(mu)
        for k in range(1, n + 1):
            acc = fmat_add(acc, fmat_mul(Y[n - k], A[k]))
        Y.append(fmat_scale(acc, 1 / (q ** n - 1)))
    return FormalSolution(N, Y)


def formal_solution_from_delta(S: QDiffSystem, N: int) -> FormalSolution:
    """The same series assembled from G_n(0)/[n]_q!."""
    G = delta_matrices(S, N)
    coeffs = []
    for n, Gn in enumerate(G):
        if Gn.has_pole_at_zero():
            raise PoleAtZero(f"G_{n} has a pole at x = 0")
        coeffs.append(fmat_scale(Gn.evaluate(0), 1 / q_factorial(n, S.q)))
    return FormalSolution(N, coeffs)


def formal_residual(S: QDiffSystem, Y: FormalSolution) -> list:
    """Coefficients of Y(qx) - Y(x) A(x) up to x^N."""
    A = matrix_series(S.A, Y.N + 1)
    out = []
    for n in range(Y.N + 1):
        acc = fmat_scale(Y[n], S.q ** n)
        for k in range(n + 1):
            acc = fmat_add(acc, fmat_scale(fmat_mul(Y[n - k], A[k]), -1))
        out.append(acc)
    return out


def _solve_linear(M: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    n = len(M)
    aug = [list(M[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [u - f * v for u, v in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def constant_form_at_zero(S: QDiffSystem, N: int):
    """(A(0), F) with A(0) F(qx) = F(x) A(x) mod x^(N+1), F(0) = I.

    In row-solution terms, if Y0(qx) = Y0(x) A(0) then Y0 F solves the system.
    """
    mu = S.rank
    A = matrix_series(S.A, N + 1)
    A0 = A[0]
    if frac_rank(A0) < mu:
        raise DomainError("A(0) is not invertible")
    q = S.q
    F = [fmat_identity(mu)]
    for n in range(1, N + 1):
        rhs = fmat_zero(mu)
        for k in range(1, n + 1):
            rhs = fmat_add(rhs, fmat_mul(F[n - k], A[k]))
        # unknown X: q^n A0 X - X A0 = rhs, vectorised row-major
        qn = q ** n
        M = []
        b = []
        for i in range(mu):
            for j in range(mu):
                row = [Fraction(0)] * (mu * mu)
                for t in range(mu):
                    row[t * mu + j] += qn * A0[i][t]
                    row[i * mu + t] -= A0[t][j]
                M.append(row)
                b.append(rhs[i][j])
        sol = _solve_linear(M, b)
        if sol is None:
            raise Resonant(n)
        F.append([[sol[i * mu + j] for j in range(mu)] for i in range(mu)])
    return A0, FormalSolution(N, F)


def is_regular_singular_presentation(S: QDiffSystem, at: str = "zero") -> bool:
    """A holomorphic and invertible at the point, in the given basis."""
    if at == "zero":
        if S.A.has_pole_at_zero():
            return False
        return frac_rank(S.A.evaluate(0)) == S.rank
    if at == "infinity":
        if any(e.degree_at_infinity() > 0 for e in S.A.entries):
            return False
        limit = [[(e.num[e.num.degree] / e.den.lc() if e.degree_at_infinity() == 0 else Fraction(0))
                  for e in S.A.row(i)] for i in range(S.rank)]
        return frac_rank(limit) == S.rank
    raise DomainError("at must be 'zero' or 'infinity'")


def dual(S: QDiffSystem) -> QDiffSystem:
    return QDiffSystem(S.q, S.A.inverse().transpose())


def tensor(S1: QDiffSystem, S2: QDiffSystem) -> QDiffSystem:
    if S1.q != S2.q:
        raise DomainError("tensor operands must share q")
    return QDiffSystem(S1.q, S1.A.kron(S2.A))


def power_system(S: QDiffSystem, k: int) -> QDiffSystem:
    """The q^k-difference system with matrix A_k = phi_iterate(S, k)."""
    if k < 1:
        raise DomainError("k must be positive")
    return QDiffSystem(S.q ** k, phi_iterate(S, k))
