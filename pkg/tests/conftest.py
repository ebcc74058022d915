from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import strategies as st

from canform.canonical import CanonicalParams
from canform.graph import build_laplacian
from canform.ratpoly import BivarPoly, LambdaPoly
from canform.realization import StructuredRealization

HALF = Fraction(1, 2)
NIDS_ZETA = (HALF, Fraction(1), Fraction(0), HALF)

small_rationals = st.fractions(min_value=-4, max_value=4, max_denominator=7)
nonzero_rationals = small_rationals.filter(lambda q: q != 0)


@st.composite
def canonical_params(draw):
    return CanonicalParams(draw(nonzero_rationals), *(draw(small_rationals) for _ in range(4)))


@st.composite
def lambda_polys(draw, max_degree=2):
    return LambdaPoly(draw(st.lists(small_rationals, max_size=max_degree + 1)))


@st.composite
def bivar_polys(draw, max_z=2, max_lam=1):
    return BivarPoly(draw(st.lists(lambda_polys(max_lam), max_size=max_z + 1)))


@pytest.fixture
def nids_params():
    return CanonicalParams(Fraction(1, 10), *NIDS_ZETA)


@pytest.fixture
def ring5():
    return build_laplacian("ring", 5)


@pytest.fixture
def ring5_scaled():
    # W = I - L/4 keeps every registry transfer function stable on ring(5)
    return build_laplacian("ring", 5, mu=Fraction(1, 4))


@pytest.fixture
def k4():
    return build_laplacian("complete", 4)


def nids_three_state(alpha):
    a = Fraction(alpha)
    return StructuredRealization(
        A0=[[2, -1, a], [1, 0, 0], [0, 0, 0]],
        A1=[[-1, HALF, -a / 2], [0, 0, 0], [0, 0, 0]],
        B0=[-a, 0, 1],
        B1=[a / 2, 0, 0],
        C0=[1, 0, 0],
        C1=[0, 0, 0],
    )


Z, LAM = sp.symbols("z lam")


def to_sympy(p: BivarPoly):
    return sum(sp.Rational(c.numerator, c.denominator) * Z**i * LAM**j
               for i, lp in enumerate(p.coeffs) for j, c in enumerate(lp.coeffs))


def sympy_tf(r: StructuredRealization):
    """Unreduced (num, den) of C(zI-A)^{-1}B + D by symbolic elimination."""
    def m(rows):
        return sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in row] for row in rows])
    A = m(r.A0) + LAM * m(r.A1)
    B = m([[x] for x in r.B0]) + LAM * m([[x] for x in r.B1])
    C = m([r.C0]) + LAM * m([r.C1])
    D = sp.Rational(r.D0.numerator, r.D0.denominator) + LAM * sp.Rational(r.D1.numerator, r.D1.denominator)
    M = Z * sp.eye(r.s) - A
    den = sp.expand(M.det())
    X = M.LUsolve(B)
    num = sp.expand(sp.cancel((C * X)[0, 0] * den + D * den))
    return num, den
