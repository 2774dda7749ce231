import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import hypergeom_has_rational_basis, hypergeom_residual
from qdiff.classify import (GroupDescriptor, HypergeomParams, antidiagonal_system,
                            curvature_membership, galois_antidiagonal2, galois_rank1,
                            galois_triangular2, goursat_rational, hypergeom_coefficients,
                            hypergeom_system, in_Z, log_singularity_infinity, log_singularity_zero,
                            phi21_defined, phi21_truncate, rank1_system, schwarz_algebraic,
                            schwarz_rational, triangular_system, z_clause)
from qdiff.core import DomainError, Poly, QExp, RatFun, RatMatrix
from qdiff.errors import DegenerateEquation, HypothesisNotMet, UndefinedParameters
from qdiff.qmodule import is_regular_singular_presentation
from qdiff.solver import ScaledRatFun

x = RatFun.x()
HALF = QExp(Fraction(1, 2))
exps = st.integers(-6, 6)


def hp(al, be, ga, q=2):
    return HypergeomParams.from_exponents(al, be, ga, q)


# Galois taxonomy

def test_rank1_families():
    assert str(galois_rank1(HALF, 2)) == "Mu(2)"
    assert galois_rank1(2, 2).family == "Trivial"
    g = galois_rank1(1 + x, 2)
    assert g.family == "Gm" and g.at_cap
    assert str(galois_rank1(QExp(Fraction(2, 3)), 5)) == "Mu(3)"


def test_triangular_families():
    assert galois_triangular2(1 + x, 2, 2).family == "AdditiveGa"
    assert str(galois_triangular2(1, HALF, 2)) == "GaSemidirectMu(2)"
    assert galois_triangular2(3, 1 + x, 2).family == "GaSemidirectGm"
    with pytest.raises(DomainError):
        galois_triangular2(x, 2, 2)


def test_antidiagonal_families():
    assert galois_antidiagonal2(4, 2).family == "FourElement"
    assert str(galois_antidiagonal2(2, 2)) == "FiniteDihedralLike(2)"
    assert galois_antidiagonal2(1 + x, 2).family == "Diag2UnionAntidiag2"
    assert galois_antidiagonal2(ScaledRatFun(QExp(2), (x - Fraction(1, 9)) / (x - 1)), 3).family == "FourElement"


def test_descriptor_validation():
    with pytest.raises(DomainError):
        GroupDescriptor("Sp4")
    with pytest.raises(DomainError):
        GroupDescriptor("Mu", 0)


CASES = [
    ("rank1", lambda: (galois_rank1(2, 2), rank1_system(2, 2))),
    ("rank1-kummer", lambda: (galois_rank1(HALF, 4), rank1_system(HALF, 4))),
    ("rank1-gm", lambda: (galois_rank1(1 + x, 2), rank1_system(1 + x, 2))),
    ("tri", lambda: (galois_triangular2(1 + x, 2 * (x - Fraction(1, 2)) / (x - 1), 2),
                     triangular_system(1 + x, 2 * (x - Fraction(1, 2)) / (x - 1), 2))),
    ("tri-kummer", lambda: (galois_triangular2(1, HALF, 4), triangular_system(1, HALF, 4))),
    ("tri-gm", lambda: (galois_triangular2(3, 1 + x, 2), triangular_system(3, 1 + x, 2))),
    ("anti", lambda: (galois_antidiagonal2(4, 2), antidiagonal_system(4, 2))),
    ("anti-kummer", lambda: (galois_antidiagonal2(4, 4), antidiagonal_system(4, 4))),
    ("anti-gm", lambda: (galois_antidiagonal2(1 + x, 2), antidiagonal_system(1 + x, 2))),
]


@pytest.mark.parametrize("name,build", CASES, ids=[c[0] for c in CASES])
def test_curvature_membership(name, build):
    desc, S = build()
    res = curvature_membership(desc, S, pmax=60)
    assert res and all(res.values())


def test_membership_negative_control():
    wrong = GroupDescriptor("Trivial")
    res = curvature_membership(wrong, rank1_system(HALF, 4), pmax=60)
    assert not all(res.values())


# hypergeometric equation

def test_hypergeom_exponents_at_zero():
    P = HypergeomParams(3, 5, 7, 2)
    P1, P0 = hypergeom_coefficients(P)
    c, q = Fraction(7), Fraction(2)
    assert P1(0) == -(1 + c / q) / (c / q)
    assert P0(0) == q / c
    # the indicial roots of t^2 + P1(0) t + P0(0) are 1 and q/c
    for t in (1, q / c):
        assert t * t + P1(0) * t + P0(0) == 0
    S = hypergeom_system(P)
    assert is_regular_singular_presentation(S, "zero")
    assert S.A.det() == (x - 1) / (15 * x - Fraction(7, 2))


def test_hypergeom_degenerate():
    with pytest.raises(DegenerateEquation):
        HypergeomParams(0, 3, 0, 2)
    with pytest.raises(DegenerateEquation):
        HypergeomParams(3, 0, 0, 2)
    S = hypergeom_system(hp(1, 1, 1))
    assert S.q == 2


def test_phi21_examples():
    P = HypergeomParams(QExp(-2), QExp(1), QExp(-3), 2)
    assert phi21_truncate(P, 5) == [1, Fraction(6, 7), Fraction(4, 7), 0, 0, 0]
    P = HypergeomParams(QExp(-1), 3, 5, 2)
    out = phi21_truncate(P, 4)
    assert out[0] == 1 and out[1] != 0 and out[2:] == [0, 0, 0]
    with pytest.raises(UndefinedParameters):
        phi21_truncate(HypergeomParams(3, 5, QExp(-2), 2), 3)
    assert phi21_defined(HypergeomParams(QExp(-1), 5, QExp(-2), 2))


@pytest.mark.parametrize("params", [(3, 5, 7, 2), (Fraction(1, 3), 2, Fraction(5, 2), 3),
                                    (QExp(-3), QExp(1), QExp(2), 2)])
def test_phi21_satisfies_equation(params):
    P = HypergeomParams(*params)
    a, b, c, q = P.value("a"), P.value("b"), P.value("c"), P.q
    N = 12
    y = RatFun(Poly(phi21_truncate(P, N)))
    res = ((a * b * x - c / q) * y.dilate(q * q) - ((a + b) * x - (1 + c / q)) * y.dilate(q)
           + (x - 1) * y)
    assert res.is_poly()
    coeffs = [res.num[i] for i in range(N + 1)]
    assert all(v == 0 for v in coeffs)


# Schwarz list

def test_log_singularities():
    assert log_singularity_zero(hp(2, 5, 1))
    assert not log_singularity_zero(hp(1, 3, 3))
    with pytest.raises(HypothesisNotMet):
        log_singularity_zero(HypergeomParams(QExp(1), QExp(2), 3, 2))
    with pytest.raises(HypothesisNotMet):
        log_singularity_infinity(HypergeomParams(3, 5, 7, 2))
    assert isinstance(log_singularity_infinity(hp(1, 3, 3)), bool)


def test_schwarz_examples():
    v = schwarz_rational(hp(1, 3, 3))
    assert v.rational_basis and v.algebraic_basis and v.witnesses["triple"] == [1, 3, 3]
    v = schwarz_algebraic(HypergeomParams(QExp(1), HALF, QExp(Fraction(3, 2)), 2))
    assert v.algebraic_basis and not v.rational_basis
    v = schwarz_rational(HypergeomParams(3, 5, 7, 2))
    assert not v.rational_basis and not v.algebraic_basis
    assert v.log_sing_zero is False and v.witnesses["log_notes"]
    assert set(v.to_json()) == {"rational_basis", "algebraic_basis", "log_zero", "log_infinity",
                                "witness"}


def test_goursat_examples():
    assert goursat_rational(1, 3, 3)
    assert not goursat_rational(0, 0, 0)
    assert not z_clause(0, 0, 0)
    assert in_Z(1, 0) and in_Z(0, 1) and not in_Z(1, 1) and not in_Z(0, 0)


@given(exps, exps, exps)
def test_goursat_symmetric(al, be, ga):
    assert goursat_rational(al, be, ga) == goursat_rational(be, al, ga)


def test_goursat_matches_z_clause_on_cube():
    for al, be, ga in itertools.product(range(-6, 7), repeat=3):
        assert goursat_rational(al, be, ga) == z_clause(al, be, ga), (al, be, ga)


@given(st.one_of(exps.map(QExp), st.fractions(min_value=-4, max_value=4, max_denominator=4)
                 .filter(lambda v: v != 0).map(lambda v: QExp(v))),
       st.one_of(exps.map(QExp), st.sampled_from([Fraction(3), Fraction(5, 7)])),
       st.one_of(exps.map(QExp), st.sampled_from([QExp(Fraction(1, 2)), Fraction(3)])),
       st.sampled_from([Fraction(2), Fraction(3)]))
def test_rational_implies_algebraic(a, b, c, q):
    v = schwarz_rational(HypergeomParams(a, b, c, q))
    assert (not v.rational_basis) or v.algebraic_basis
    assert schwarz_algebraic(HypergeomParams(a, b, c, q)).algebraic_basis == v.algebraic_basis


@pytest.mark.parametrize("triple", [(1, 3, 3), (2, 6, 6), (0, 0, 0), (-1, 2, 0), (3, -2, 1),
                                    (-3, -1, -2), (2, 2, 4), (1, -1, 1)])
def test_schwarz_against_brute_force(triple):
    assert schwarz_rational(hp(*triple)).rational_basis == hypergeom_has_rational_basis(*triple)


def test_heine_spot_check():
    seen = 0
    for al, be, ga in itertools.product(range(-4, 5), repeat=3):
        P = hp(al, be, ga)
        if not schwarz_rational(P).rational_basis or not phi21_defined(P):
            continue
        stop = [-e for e in (al, be) if e <= 0]
        if not stop:
            continue
        n0 = min(stop)
        coeffs = phi21_truncate(P, n0 + 6)
        assert all(v == 0 for v in coeffs[n0 + 1:])
        y = RatFun(Poly(coeffs))
        assert hypergeom_residual(y, al, be, ga).is_zero()
        seen += 1
    assert seen > 0
