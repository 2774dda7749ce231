"""Rational solutions of q-difference systems and the curvature/solution
consistency verdict.

Order one is decided exactly by telescoping along q-orbits of irreducible
factors. Higher rank uses formal row solutions at 0, entrywise Pade
reconstruction and exact substitution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .arithmetic import MOD_P_ELL, ScanReport, curvature_scan
from .core import (INF, DomainError, Poly, QExp, RatFun, RatMatrix, as_fraction,
                   factor_poly, frac_nullspace, frac_rref, q_power_test,
                   q_rational_power_test, to_ratfun)
from .errors import Inconclusive
from .qmodule import QDiffSystem


@dataclass(frozen=True)
class ScaledRatFun:
    """q^scale * f(x), with the power of q kept symbolic."""

    scale: QExp
    f: RatFun

    @classmethod
    def coerce(cls, b) -> "ScaledRatFun":
        if isinstance(b, ScaledRatFun):
            return b
        if isinstance(b, QExp):
            return cls(b, RatFun.const(1))
        return cls(QExp(0), to_ratfun(b))


# ------------------------------------------------------------------ order one


def _shift_class_index(P: Poly, R: Poly, q: Fraction) -> int | None:
    """k with P(x) = R(q^k x) / q^(k deg R), both monic with nonzero constant term."""
    if P.degree != R.degree:
        return None
    kd = q_power_test(R[0] / P[0], q)
    if kd is None or kd % P.degree:
        return None
    k = kd // P.degree
    if R.dilate(q ** k).monic() == P:
        return k
    return None


def _telescope(f: RatFun, q: Fraction):
    """Split f = c * x^m * prod(orbit factors) and telescope each orbit.

    Returns (g, c_residual, m) with g(qx)/g(x) * c_residual * x^m = f, or
    None when some orbit's exponents do not sum to zero.
    """
    c_num, fac_num = factor_poly(f.num)
    fac_den = factor_poly(f.den)[1] if f.den.degree > 0 else []
    exps: list[tuple[Poly, int]] = [(P, e) for P, e in fac_num] + [(P, -e) for P, e in fac_den]
    m = 0
    classes: list[tuple[Poly, dict[int, int]]] = []
    for P, e in exps:
        if P == Poly.x():
            m += e
            continue
        for rep, table in classes:
            k = _shift_class_index(P, rep, q)
            if k is not None:
                table[k] = table.get(k, 0) + e
                break
        else:
            classes.append((P, {0: e}))
    g = RatFun.const(1)
    shift = 0
    for rep, table in classes:
        if sum(table.values()) != 0:
            return None
        lo, hi = min(table), max(table)
        h = 0
        for j in range(lo, hi + 1):
            h -= table.get(j, 0)
            if h:
                # b-exponent at index j is h_{j-1} - h_j, so factor index j carries h_j
                r = RatFun(rep.dilate(q ** j).monic())
                g = g * r ** h
                shift += h * rep.degree
    return g, c_num / q ** shift, m


def order1_rational_test(b, q) -> RatFun | None:
    """f in Q(x)^* with f(qx)/f(x) = b(x), or None."""
    q = as_fraction(q)
    b = to_ratfun(b)
    if b.is_zero():
        raise DomainError("b must be nonzero")
    tel = _telescope(b, q)
    if tel is None:
        return None
    g, c, m = tel
    if m != 0:
        return None
    s = q_power_test(c, q)
    if s is None:
        return None
    return g * RatFun(Poly.monomial(s)) if s >= 0 else g / RatFun(Poly.monomial(-s))


@dataclass(frozen=True)
class KummerSolution:
    d: int
    delta: Fraction
    f: RatFun  # y = x^delta * f(x)


def order1_kummer_test(b, q, dcap: int = 24) -> KummerSolution | None:
    """Minimal d <= dcap and y = x^delta f(x), delta in (1/d)Z, with y(qx) = b y."""
    q = as_fraction(q)
    sb = ScaledRatFun.coerce(b)
    if sb.f.is_zero():
        raise DomainError("b must be nonzero")
    tel = _telescope(sb.f, q)
    if tel is None:
        return None
    g, c, m = tel
    if m != 0:
        return None
    e = q_rational_power_test(c, q, dcap)
    if e is None:
        return None
    delta = sb.scale.exponent + e
    if delta.denominator > dcap:
        return None
    return KummerSolution(delta.denominator, delta, g)


# ------------------------------------------------------------ Pade reconstruction


def pade(coeffs: Sequence[Fraction], m: int, n: int) -> RatFun | None:
    """P/Q with deg P <= m, deg Q <= n matching every given coefficient.

    Q comes from the orders m+1..m+n only; the remaining orders are checked.
    """
    T = len(coeffs) - 1
    if m + n > T:
        raise DomainError("not enough coefficients for this Pade type")
    at = lambda k: coeffs[k] if k >= 0 else Fraction(0)
    rows = [[at(k - j) for j in range(n + 1)] for k in range(m + 1, m + n + 1)]
    kernel = frac_nullspace(rows, n + 1)
    Q = Poly(kernel[0])
    for k in range(m + n + 1, T + 1):
        if sum((Q[j] * coeffs[k - j] for j in range(n + 1)), Fraction(0)) != 0:
            return None
    full = [sum((Q[j] * coeffs[k - j] for j in range(min(k, n) + 1)), Fraction(0)) for k in range(m + 1)]
    return RatFun(Poly(full), Q)


def reconstruct_rational(coeffs: Sequence[Fraction], degree_cap: int) -> RatFun | None:
    """Smallest (d, d) Pade approximant, d <= degree_cap, consistent with all terms."""
    if all(c == 0 for c in coeffs):
        return RatFun()
    for d in range(degree_cap + 1):
        if 2 * d + 2 > len(coeffs):
            break
        f = pade(coeffs, d, d)
        if f is not None and not f.has_pole_at_zero():
            return f
    return None


# ---------------------------------------------------------- formal row solutions


def _rational_eigenvalues(M: list[list[Fraction]]) -> list[Fraction]:
    mu = len(M)
    A = RatMatrix(mu, mu, [M[i][j] for i in range(mu) for j in range(mu)])
    x = RatFun.x()
    char = (RatMatrix.identity(mu).scale(x) - A).det()
    _, facs = factor_poly(char.num)
    return sorted({-P[0] for P, _ in facs if P.degree == 1})


def _fmul(a, b):
    return [[sum((a[i][t] * b[t][j] for t in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
            for i in range(len(a))]


def _left_kernel(M: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of {u : u M = 0}."""
    mt = [list(col) for col in zip(*M)]
    return frac_nullspace(mt, len(M))


def _solve_left(M: list[list[Fraction]], r: list[Fraction]) -> list[Fraction] | None:
    """A particular z with z M = r."""
    mu = len(M)
    aug = [[M[i][j] for i in range(mu)] + [r[j]] for j in range(len(M[0]))]
    red, piv = frac_rref(aug)
    if mu in piv:
        return None
    z = [Fraction(0)] * mu
    for row, pc in zip(red, piv):
        z[pc] = row[mu]
    return z


def _regular_formal_space(series: list, q: Fraction, s: int, T: int):
    """Formal row solutions x^s z(x), z in Q[[x]]^mu, for A holomorphic at 0.

    series[k] is the coefficient matrix of x^k in A. Returns a list of
    solutions, each a list of T+1 coefficient rows.
    """
    mu = len(series[0])
    A0 = series[0]
    Z: list[list[list[Fraction]]] = []  # Z[n] is P x mu
    P = 0
    for n in range(T + 1):
        r = [[Fraction(0)] * mu for _ in range(P)]
        for k in range(1, n + 1):
            if k >= len(series):
                break
            prod = _fmul(Z[n - k], series[k]) if P else []
            for t in range(P):
                r[t] = [a + b for a, b in zip(r[t], prod[t])]
        lam = q ** (s + n)
        M = [[(lam if i == j else 0) - A0[i][j] for j in range(mu)] for i in range(mu)]
        right_ker = frac_nullspace(M, mu)
        if right_ker and P:
            C = [[sum((r[t][i] * w[i] for i in range(mu)), Fraction(0)) for w in right_ker]
                 for t in range(P)]
            B = _left_kernel(C)  # rows: admissible parameter combinations
            if len(B) < P:
                Z = [_fmul(B, Zn) if B else [] for Zn in Z]
                r = _fmul(B, r) if B else []
                P = len(B)
        Zn = []
        for t in range(P):
            z = _solve_left(M, r[t])
            if z is None:
                raise ArithmeticError("inconsistent formal recursion")
            Zn.append(z)
        new = _left_kernel(M)
        for u in new:
            for prev in Z:
                prev.append([Fraction(0)] * mu)
            Zn.append(list(u))
        P += len(new)
        Z.append(Zn)
    return [[Z[n][t] for n in range(T + 1)] for t in range(P)]


def _laurent_matrix(A: RatMatrix, T: int):
    """(v, series) with A = x^v sum series[k] x^k and series[0] != 0."""
    lau = [e.laurent(T + 1) if not e.is_zero() else (INF, None) for e in A.entries]
    v = min(l[0] for l in lau)
    mu = A.rows
    out = []
    for k in range(T + 1):
        Mk = [[Fraction(0)] * mu for _ in range(mu)]
        for idx, (ve, ser) in enumerate(lau):
            if ser is None:
                continue
            off = k - (ve - v)
            if 0 <= off < len(ser):
                Mk[idx // mu][idx % mu] = ser[off]
        out.append(Mk)
    return v, out


def _dense_formal_space(series: list, v: int, q: Fraction, s: int, T: int):
    """Truncated kernel for q^s z(qx) = x^v z(x) At(x) when v < 0."""
    mu = len(series[0])
    w = -v
    nvars = mu * (T + 1)
    rows = []
    for n in range(v, T + v + 1):
        for j in range(mu):
            row = [Fraction(0)] * nvars
            if n >= 0:
                row[n * mu + j] += q ** (s + n)
            for k in range(len(series)):
                idx = n + w - k
                if idx < 0:
                    break
                if idx > T:
                    continue
                for i in range(mu):
                    row[idx * mu + i] -= series[k][i][j]
            rows.append(row)
    kernel = frac_nullspace(rows, nvars)
    return [[vec[n * mu:(n + 1) * mu] for n in range(T + 1)] for vec in kernel]


# ------------------------------------------------------------- rational solving


@dataclass
class RationalSolutionBasis:
    solutions: list  # rows, each a list of RatFun
    residuals: list  # exact residual rows, all zero
    rank: int
    complete: bool

    def as_matrix(self) -> RatMatrix:
        return RatMatrix.from_rows(self.solutions)


def residual(S: QDiffSystem, y: Sequence[RatFun]) -> list[RatFun]:
    """y(qx) - y(x) A(x)."""
    mu = S.rank
    yq = [f.dilate(S.q) for f in y]
    return [yq[j] - sum((y[i] * S.A[i, j] for i in range(mu)), RatFun()) for j in range(mu)]


def _independent(rows: list[list[RatFun]]) -> list[list[RatFun]]:
    keep: list[list[RatFun]] = []
    for row in rows:
        trial = keep + [row]
        if RatMatrix.from_rows(trial).rank() == len(trial):
            keep = trial
    return keep


def _candidate_rows(S: QDiffSystem, degree_cap: int, terms: int):
    """(shift, formal solutions, exact_empty) for the rational search."""
    q = S.q
    v, series = _laurent_matrix(S.A, terms)
    if v > 0:
        return 0, [], True
    if v == 0:
        eig = [lam for lam in _rational_eigenvalues(series[0]) if lam != 0]
        shifts = [k for k in (q_power_test(lam, q) for lam in eig) if k is not None]
        if not shifts:
            return 0, [], True
        s_min = min(shifts)
        T = max(terms, max(shifts) - s_min + 2 * degree_cap + 4)
        if T > terms:
            v, series = _laurent_matrix(S.A, T)
        return s_min, _regular_formal_space(series, q, s_min, T), False
    from .core import frac_rank

    if frac_rank(series[0]) == S.rank:
        return 0, [], True
    s_min = -degree_cap
    T = terms + degree_cap
    T2 = T + T // 2 + S.rank * (1 - v)
    _, series = _laurent_matrix(S.A, T2)
    return s_min, _stable_dense_space(series, v, q, s_min, T, T2), False


def _stable_dense_space(series, v, q, s, T, T2):
    # Truncation leaves the top coefficients partly free, and they leak into
    # low orders. That leakage depends on the cut, genuine solutions do not.
    short = [[c for row in sol for c in row] for sol in _dense_formal_space(series, v, q, s, T)]
    width = len(short[0]) if short else 0
    longer = [[c for row in sol[:T + 1] for c in row]
              for sol in _dense_formal_space(series, v, q, s, T2)]
    if not short or not longer:
        return []
    k1 = len(short)
    cols = short + [[-c for c in vec] for vec in longer]
    rel = frac_nullspace([[vec[i] for vec in cols] for i in range(width)], len(cols))
    mu = len(series[0])
    out = []
    for r in rel:
        flat = [sum((r[j] * short[j][i] for j in range(k1)), Fraction(0)) for i in range(width)]
        out.append([flat[n * mu:(n + 1) * mu] for n in range(T + 1)])
    return _prune(out)


def _prune(sols):
    """Keep a linearly independent subfamily."""
    keep, acc = [], []
    for sol in sols:
        trial = acc + [[c for row in sol for c in row]]
        if not frac_nullspace([list(col) for col in zip(*trial)], len(trial)):
            acc, keep = trial, keep + [sol]
    return keep


def rational_solutions(S: QDiffSystem, degree_cap: int = 30, terms: int | None = None):
    """Verified rational row solutions of Y(qx) = Y(x) A(x).

    Returns a RationalSolutionBasis, or None when rational solutions are
    proven absent. Raises Inconclusive when formal solutions exist but none
    is reconstructed within the cap.
    """
    need = 2 * degree_cap + 4
    terms = need if terms is None else terms
    if terms < need:
        raise DomainError(f"terms must be at least 2*degree_cap + 4 = {need}")
    s, formal, exact_empty = _candidate_rows(S, degree_cap, terms)
    if exact_empty:
        return None
    found = []
    base = s
    for sol in formal:
        # skip leading zero terms so the shift does not eat into the cap
        m = next((n for n, row in enumerate(sol) if any(row)), 0)
        sol, s = sol[m:], base + m
        xs = RatFun(Poly.monomial(abs(s)))
        comps = []
        for i in range(S.rank):
            f = reconstruct_rational([row[i] for row in sol], degree_cap)
            if f is None:
                break
            comps.append(f * xs if s >= 0 else f / xs)
        else:
            if any(not c.is_zero() for c in comps) and all(r.is_zero() for r in residual(S, comps)):
                found.append(comps)
    basis = _independent(found)
    if not basis:
        # in rank one the exact test can still prove that nothing exists
        if S.rank == 1 and order1_rational_test(S.A[0, 0], S.q) is None:
            return None
        raise Inconclusive(degree_cap)
    basis.sort(key=lambda row: [str(e) for e in row])
    return RationalSolutionBasis(basis, [residual(S, y) for y in basis], len(basis),
                                 len(basis) == S.rank)


def is_trivial_over_formal(S: QDiffSystem, N: int = 20) -> bool:
    """Whether the given presentation has mu independent solutions x^s z(x),
    s in Z, z in Q[[x]]^mu; exponents of A(0) must lie in q^Z."""
    v, series = _laurent_matrix(S.A, N)
    if v != 0:
        return False
    eig_all = _rational_eigenvalues(series[0])
    from .core import frac_rank

    if frac_rank(series[0]) < S.rank:
        return False
    shifts = [q_power_test(lam, S.q) for lam in eig_all]
    if not shifts or any(k is None for k in shifts):
        return False
    s_min, s_max = min(shifts), max(shifts)
    T = max(N, s_max - s_min + 1)
    if T > N:
        _, series = _laurent_matrix(S.A, T)
    return len(_regular_formal_space(series, S.q, s_min, T)) == S.rank


# ------------------------------------------------------------------ verdict


@dataclass
class GrothendieckReport:
    verdict: str
    scan: ScanReport
    solutions: list
    caps: dict
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "scan": self.scan.to_json(),
                "solutions": [[str(e) for e in row] for row in self.solutions],
                "caps": self.caps, "details": self.details}


def grothendieck_test(S: QDiffSystem, pmax: int = 200, degree_cap: int = 30,
                      terms: int | None = None, jobs: int = 1) -> GrothendieckReport:
    terms = 2 * degree_cap + 4 if terms is None else terms
    scan = curvature_scan(S, pmax, MOD_P_ELL, jobs=jobs)
    caps = {"degree_cap": degree_cap, "terms": terms, "pmax": pmax}
    hit_cap = False
    try:
        basis = rational_solutions(S, degree_cap, terms)
    except Inconclusive:
        basis, hit_cap = None, True
    full = basis is not None and basis.complete
    sols = basis.solutions if basis is not None else []
    all_id = scan.all_identity(MOD_P_ELL)
    failing = [v.p for v in scan.verdicts if v.status not in ("Identity", "BadPrime")]
    details = {"failing_primes": failing, "solver_hit_cap": hit_cap}
    if all_id and full:
        verdict = "consistent_trivial"
    elif not all_id and not full:
        verdict = "consistent_nontrivial"
    elif full:
        verdict = "inconsistent"
    else:
        verdict = "inconclusive"
    return GrothendieckReport(verdict, scan, sols, caps, details)
