import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qdiff.core import Poly, RatFun, RatMatrix

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small_ints = st.integers(min_value=-6, max_value=6)
rationals = st.builds(Fraction, small_ints, st.integers(min_value=1, max_value=4))


@st.composite
def polys(draw, max_degree=4, nonzero=False):
    coeffs = draw(st.lists(rationals, min_size=1, max_size=max_degree + 1))
    p = Poly(coeffs)
    if nonzero and p.is_zero():
        p = Poly.const(1)
    return p


@st.composite
def ratfuns(draw, max_degree=3, nonzero=False):
    num = draw(polys(max_degree, nonzero=nonzero))
    den = draw(polys(max_degree, nonzero=True))
    return RatFun(num, den)


qs = st.sampled_from([Fraction(2), Fraction(3), Fraction(-2), Fraction(2, 3), Fraction(5), Fraction(1, 2)])


def random_poly(rng: random.Random, deg: int, lo=-3, hi=3) -> RatFun:
    return RatFun(Poly([rng.randint(lo, hi) for _ in range(deg + 1)]))


def random_invertible_matrix(rng: random.Random, n: int, deg: int) -> RatMatrix:
    while True:
        M = RatMatrix(n, n, [random_poly(rng, deg) for _ in range(n * n)])
        if not M.det().is_zero():
            return M


@pytest.fixture
def rng():
    return random.Random(20240611)
