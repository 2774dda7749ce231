"""Generic Galois groups of small worked families, and the rational/algebraic
classification of the basic hypergeometric equation."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arithmetic import MOD_P_ELL, curvature_matrix, prime_profile, primes_upto
from .core import (BadPrime, DomainError, ModMatrix, ModRatFun, Poly, QExp, RatFun,
                   RatMatrix, as_fraction, q_rational_power_test, to_ratfun)
from .errors import DegenerateEquation, HypothesisNotMet, UndefinedParameters
from .qmodule import QDiffSystem
from .solver import ScaledRatFun, order1_kummer_test, order1_rational_test

FAMILIES = ("Trivial", "Mu", "Gm", "AdditiveGa", "GaSemidirectMu", "GaSemidirectGm",
            "Diag2", "Diag2UnionAntidiag2", "FiniteDihedralLike", "FourElement")


@dataclass(frozen=True)
class GroupDescriptor:
    family: str
    d: int = 1
    at_cap: bool = False
    # rational change of basis T; the gauged matrix T^-1 A T(qx) has its
    # curvature in the group itself rather than in a conjugate
    gauge: RatMatrix | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown group family {self.family!r}")
        if self.d < 1:
            raise DomainError("d must be positive")

    def __str__(self):
        if self.family in ("Mu", "GaSemidirectMu", "FiniteDihedralLike"):
            return f"{self.family}({self.d})"
        return self.family + (" (at cap)" if self.at_cap else "")


def _scaled(b, q: Fraction) -> tuple[ScaledRatFun, RatFun | None]:
    """b as a scaled rational function, plus its plain value when that is rational."""
    sb = ScaledRatFun.coerce(b)
    v = sb.scale.value(q)
    return sb, (None if v is None else sb.f * v)


def _order1(b, q: Fraction, dcap: int):
    """('rational', f) | ('kummer', KummerSolution) | ('none', None)."""
    sb, plain = _scaled(b, q)
    if sb.f.is_zero():
        raise DomainError("b must be nonzero")
    if plain is not None:
        f = order1_rational_test(plain, q)
        if f is not None:
            return "rational", f
    k = order1_kummer_test(sb, q, dcap)
    if k is not None and k.d > 1:
        return "kummer", k
    return "none", None


def _qpow(q: Fraction, e: Fraction) -> Fraction | None:
    return QExp(e).value(q)


def galois_rank1(b, q, dcap: int = 24) -> GroupDescriptor:
    """Group of y(qx) = b(x) y(x)."""
    q = as_fraction(q)
    kind, sol = _order1(b, q, dcap)
    if kind == "rational":
        return GroupDescriptor("Trivial", gauge=RatMatrix.diag([sol.inverse()]))
    if kind == "kummer":
        return GroupDescriptor("Mu", sol.d, gauge=RatMatrix.diag([sol.f.inverse()]))
    return GroupDescriptor("Gm", at_cap=True)


def rank1_system(b, q) -> QDiffSystem:
    _, plain = _scaled(b, as_fraction(q))
    if plain is None:
        raise DomainError("the coefficient is not rational for this q")
    return QDiffSystem(q, RatMatrix.from_rows([[plain]]))


def triangular_system(a, b, q) -> QDiffSystem:
    """Module matrix [[1, 0], [a, b]]: Phi(e1) = e1 + a e2, Phi(e2) = b e2."""
    _, plain = _scaled(b, as_fraction(q))
    if plain is None:
        raise DomainError("b is not rational for this q")
    return QDiffSystem(q, RatMatrix.from_rows([[1, 0], [to_ratfun(a), plain]]))


def antidiagonal_system(r, q) -> QDiffSystem:
    """Module matrix [[0, 1], [r, 0]]."""
    _, plain = _scaled(r, as_fraction(q))
    if plain is None:
        raise DomainError("r is not rational for this q")
    return QDiffSystem(q, RatMatrix.from_rows([[0, 1], [plain, 0]]))


def galois_triangular2(a, b, q, dcap: int = 24) -> GroupDescriptor:
    q = as_fraction(q)
    a = to_ratfun(a)
    if a.is_zero() or a.has_pole_at_zero() or a(0) == 0:
        raise DomainError("a must be nonzero with a finite nonzero value at 0")
    kind, sol = _order1(b, q, dcap)
    if kind == "rational":
        return GroupDescriptor("AdditiveGa", gauge=RatMatrix.diag([1, sol.inverse()]))
    if kind == "kummer":
        return GroupDescriptor("GaSemidirectMu", sol.d, gauge=RatMatrix.diag([1, sol.f.inverse()]))
    return GroupDescriptor("GaSemidirectGm", at_cap=True)


def _halve(r, q: Fraction) -> ScaledRatFun:
    """Rewrite a q-scaled coefficient with respect to q^2."""
    sr = ScaledRatFun.coerce(r)
    return ScaledRatFun(QExp(sr.scale.exponent / 2), sr.f)


def galois_antidiagonal2(r, q, dcap: int = 24) -> GroupDescriptor:
    q = as_fraction(q)
    sr = _halve(r, q)
    kind, sol = _order1(sr, q * q, dcap)
    if kind == "rational":
        # g(q^2 x) = r g(x); T = diag(1/g(qx), 1/g(x)) turns the matrix into the swap
        gauge = RatMatrix.diag([sol.dilate(q).inverse(), sol.inverse()])
        return GroupDescriptor("FourElement", gauge=gauge)
    if kind == "kummer":
        u = sol.f
        root = _qpow(q, sol.delta)
        gauge = None
        if root is not None:
            gauge = RatMatrix.diag([u.dilate(q).inverse(), u.inverse() * root])
        return GroupDescriptor("FiniteDihedralLike", sol.d, gauge=gauge)
    return GroupDescriptor("Diag2UnionAntidiag2", at_cap=True)


# ------------------------------------------------------ curvature membership


def _unit_root(f: ModRatFun, d: int) -> bool:
    return (f ** d).equals_const(1)


def _is_zero(f: ModRatFun) -> bool:
    return f.equals_const(0)


def group_contains(desc: GroupDescriptor, M: ModMatrix) -> bool:
    """Whether M satisfies the reduced defining equations of the group."""
    fam, d = desc.family, desc.d
    e = M.entry
    if M.rows == 1:
        if fam == "Trivial":
            return e(0, 0).equals_const(1)
        if fam == "Mu":
            return _unit_root(e(0, 0), d)
        if fam == "Gm":
            return e(0, 0).is_unit_like()
        return False
    diagonal = _is_zero(e(0, 1)) and _is_zero(e(1, 0))
    anti = _is_zero(e(0, 0)) and _is_zero(e(1, 1))
    if fam in ("AdditiveGa", "GaSemidirectMu", "GaSemidirectGm"):
        if not (_is_zero(e(0, 1)) and e(0, 0).equals_const(1)):
            return False
        if fam == "AdditiveGa":
            return e(1, 1).equals_const(1)
        if fam == "GaSemidirectMu":
            return _unit_root(e(1, 1), d)
        return e(1, 1).is_unit_like()
    if fam == "FourElement":
        if diagonal:
            return any(e(0, 0).equals_const(s) and e(1, 1).equals_const(s) for s in (1, -1))
        if anti:
            return any(e(0, 1).equals_const(s) and e(1, 0).equals_const(s) for s in (1, -1))
        return False
    if fam == "FiniteDihedralLike":
        if diagonal:
            return _unit_root(e(0, 0), d) and _unit_root(e(1, 1), d)
        if anti:
            return _unit_root(e(0, 1), d) and _unit_root(e(1, 0), d)
        return False
    if fam in ("Diag2UnionAntidiag2", "Diag2"):
        return diagonal or (anti and fam != "Diag2")
    return fam == "Trivial" and M.is_identity()


def gauge_transform(S: QDiffSystem, T: RatMatrix) -> QDiffSystem:
    """Matrix of the same module in the basis e T: T^-1 A T(qx)."""
    return QDiffSystem(S.q, T.inverse() @ S.A @ T.dilate(S.q))


def curvature_membership(desc: GroupDescriptor, S: QDiffSystem, pmax: int = 100) -> dict[int, bool]:
    """p -> membership of the gauged curvature, over good strong primes p <= pmax.

    Primes where the gauged matrix does not reduce are left out.
    """
    Sg = gauge_transform(S, desc.gauge) if desc.gauge is not None else S
    out = {}
    for p in primes_upto(pmax):
        prof = prime_profile(S.q, p)
        if not (prof.good and prof.strong):
            continue
        try:
            M = curvature_matrix(Sg, p, MOD_P_ELL)
        except BadPrime:
            continue
        out[p] = group_contains(desc, M)
    return out


# --------------------------------------------------------- hypergeometric


@dataclass(frozen=True)
class HypergeomParams:
    a: Fraction | QExp
    b: Fraction | QExp
    c: Fraction | QExp
    q: Fraction

    def __post_init__(self):
        q = as_fraction(self.q)
        object.__setattr__(self, "q", q)
        for name in "abc":
            v = getattr(self, name)
            if not isinstance(v, QExp):
                object.__setattr__(self, name, as_fraction(v))
        if self.is_zero("c") and (self.is_zero("a") or self.is_zero("b")):
            raise DegenerateEquation("the equation needs not (a = c = 0) and not (b = c = 0)")

    def is_zero(self, name: str) -> bool:
        v = getattr(self, name)
        return not isinstance(v, QExp) and v == 0

    def value(self, name: str) -> Fraction:
        v = getattr(self, name)
        if isinstance(v, QExp):
            r = v.value(self.q)
            if r is None:
                raise DomainError(f"{name} = {v} is irrational for q = {self.q}")
            return r
        return v

    def exponent(self, name: str, dcap: int = 64) -> Fraction | None:
        """e with parameter = q^e, or None outside q^Q (within dcap)."""
        v = getattr(self, name)
        if isinstance(v, QExp):
            return v.exponent
        if v == 0:
            return None
        return q_rational_power_test(v, self.q, dcap)

    @classmethod
    def from_exponents(cls, alpha, beta, gamma, q) -> "HypergeomParams":
        return cls(QExp(alpha), QExp(beta), QExp(gamma), q)


def hypergeom_coefficients(P: HypergeomParams) -> tuple[RatFun, RatFun]:
    """(P1, P0) with phi^2 y + P1 phi y + P0 y = 0."""
    a, b, c, q = P.value("a"), P.value("b"), P.value("c"), P.q
    lead = Poly((-c / q, a * b))
    if lead.is_zero():
        raise DegenerateEquation("abx - c/q vanishes identically")
    x = RatFun.x()
    P1 = -((a + b) * x - (1 + c / q)) / RatFun(lead)
    P0 = (x - 1) / RatFun(lead)
    return P1, P0


def hypergeom_system(P: HypergeomParams) -> QDiffSystem:
    """Companion system acting on rows (y, phi y)."""
    P1, P0 = hypergeom_coefficients(P)
    return QDiffSystem(P.q, RatMatrix.from_rows([[0, -P0], [1, -P1]]))


def _in_q_int_le0(e: Fraction | None) -> bool:
    return e is not None and e.denominator == 1 and e <= 0


def phi21_defined(P: HypergeomParams) -> bool:
    gc = P.exponent("c")
    if not _in_q_int_le0(gc):
        return True
    for name in "ab":
        e = P.exponent(name)
        if _in_q_int_le0(e) and (e - gc).denominator == 1 and e - gc >= 0:
            return True
    return False


def phi21_truncate(P: HypergeomParams, N: int) -> list[Fraction]:
    """Coefficients 0..N of the basic hypergeometric series."""
    if not phi21_defined(P):
        raise UndefinedParameters("c lies in q^(Z<=0) without a terminating numerator")
    a, b, c, q = P.value("a"), P.value("b"), P.value("c"), P.q
    out = [Fraction(1)]
    t = Fraction(1)
    for n in range(N):
        num = (1 - a * q ** n) * (1 - b * q ** n)
        if num == 0 or t == 0:
            t = Fraction(0)
        else:
            t = t * num / ((1 - c * q ** n) * (1 - q ** (n + 1)))
        out.append(t)
    return out


# -------------------------------------------------------------- Schwarz list


def in_Z(m, n) -> bool:
    """(m, n) in (Z>0 x Z<=0) u (Z<=0 x Z>0)."""
    if m is None or n is None or Fraction(m).denominator != 1 or Fraction(n).denominator != 1:
        return False
    return (m > 0 and n <= 0) or (m <= 0 and n > 0)


def z_clause(alpha, beta, gamma) -> bool:
    return ((in_Z(alpha, alpha + 1 - gamma) or in_Z(beta, beta + 1 - gamma))
            and (in_Z(alpha, beta) or in_Z(alpha + 1 - gamma, beta + 1 - gamma)))


def goursat_rational(alpha: int, beta: int, gamma: int) -> bool:
    """Whether |1-g|, |g-a-b|, |a-b| satisfy the triangle inequality."""
    n1, n2, n3 = sorted((abs(1 - gamma), abs(gamma - alpha - beta), abs(alpha - beta)))
    return n1 + n2 >= n3


def _is_int(e) -> bool:
    return e is not None and e.denominator == 1


def log_singularity_zero(P: HypergeomParams) -> bool:
    g = P.exponent("c")
    if not _is_int(g):
        raise HypothesisNotMet("c is not an integral power of q")
    al, be = P.exponent("a"), P.exponent("b")
    regular = ((_is_int(al) and in_Z(al, al + 1 - g)) or (_is_int(be) and in_Z(be, be + 1 - g)))
    return not regular


def log_singularity_infinity(P: HypergeomParams) -> bool:
    al, be, g = P.exponent("a"), P.exponent("b"), P.exponent("c")
    if al is None or be is None or not _is_int(al - be):
        raise HypothesisNotMet("a/b is not an integral power of q")
    regular = in_Z(al, be) or (g is not None and in_Z(1 + al - g, 1 + be - g))
    return not regular


@dataclass
class SchwarzVerdict:
    rational_basis: bool
    algebraic_basis: bool
    witnesses: dict
    log_sing_zero: bool
    log_sing_infinity: bool

    def __post_init__(self):
        if self.rational_basis and not self.algebraic_basis:
            raise AssertionError("a rational basis is algebraic")

    def to_json(self) -> dict:
        return {"rational_basis": self.rational_basis, "algebraic_basis": self.algebraic_basis,
                "log_zero": self.log_sing_zero, "log_infinity": self.log_sing_infinity,
                "witness": self.witnesses}


def _schwarz(P: HypergeomParams) -> SchwarzVerdict:
    al, be, g = (P.exponent(n) for n in "abc")
    wit: dict = {"exponents": [None if e is None else str(e) for e in (al, be, g)]}
    rational = False
    if all(_is_int(e) for e in (al, be, g)):
        rational = z_clause(al, be, g)
        if rational:
            wit["triple"] = [int(al), int(be), int(g)]
        else:
            wit["failing"] = "Z-clause"
    else:
        wit["failing"] = "not all in q^Z"
    algebraic = rational
    if not rational:
        if any(e is None for e in (al, be, g)):
            wit["failing"] = "not all in q^Q"
        else:
            generic = not _is_int(g) and not _is_int(al - be)
            paired = (_is_int(al) and _is_int(be - g)) or (_is_int(be) and _is_int(al - g))
            algebraic = generic and paired
            if algebraic:
                wit["algebraic"] = "Kummer-type basis"
    notes = []
    try:
        lz = log_singularity_zero(P)
    except HypothesisNotMet as exc:
        lz = False
        notes.append(f"zero: {exc}")
    try:
        li = log_singularity_infinity(P)
    except HypothesisNotMet as exc:
        li = False
        notes.append(f"infinity: {exc}")
    if notes:
        wit["log_notes"] = notes
    return SchwarzVerdict(rational, algebraic, wit, lz, li)


def schwarz_rational(P: HypergeomParams) -> SchwarzVerdict:
    """Full verdict; rational_basis is the field of interest."""
    return _schwarz(P)


def schwarz_algebraic(P: HypergeomParams) -> SchwarzVerdict:
    """Full verdict; algebraic_basis is the field of interest."""
    return _schwarz(P)
