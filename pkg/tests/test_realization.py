from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from canform.canonical import (
    CanonicalParams,
    alternate_realization,
    canonical_realization,
    canonical_transfer_function,
)
from canform.realization import (
    RealizationFormatError,
    SingularTransform,
    StructuredRealization,
    realization_from_text,
    realization_to_text,
    similarity_transform,
    transfer_function,
    unreduced_transfer_function,
    validate_class,
)

from conftest import canonical_params, nids_three_state, small_rationals, sympy_tf, to_sympy


@st.composite
def realizations(draw, s=2, passthrough=False):
    def mat():
        return [[draw(small_rationals) for _ in range(s)] for _ in range(s)]

    def vec():
        return [draw(small_rationals) for _ in range(s)]

    kw = dict(A0=mat(), A1=mat(), B0=vec(), B1=vec(), C0=vec(), C1=vec())
    if passthrough:
        kw.update(D0=draw(small_rationals), D1=draw(small_rationals))
    return StructuredRealization(**kw)


@st.composite
def unimodular(draw, s=2):
    # product of elementary integer shears, determinant 1
    t = [[Fraction(int(i == j)) for j in range(s)] for i in range(s)]
    for _ in range(draw(st.integers(1, 4))):
        i, j = draw(st.integers(0, s - 1)), draw(st.integers(0, s - 1))
        if i == j:
            continue
        k = draw(st.integers(-2, 2))
        t = [[t[r][c] + (k * t[j][c] if r == i else 0) for c in range(s)] for r in range(s)]
    return t


def test_canonical_tf_via_realization(nids_params):
    assert transfer_function(canonical_realization(nids_params)) == canonical_transfer_function(nids_params)


def test_nids_three_state_tf(nids_params):
    assert transfer_function(nids_three_state(nids_params.alpha)) == canonical_transfer_function(nids_params)


def test_alternate_realization_same_tf(nids_params):
    r1, r2 = canonical_realization(nids_params), alternate_realization(nids_params)
    assert r1 != r2
    assert transfer_function(r1) == transfer_function(r2)


@settings(max_examples=50, deadline=None)
@given(canonical_params())
def test_alternate_realization_same_tf_random(p):
    assert transfer_function(alternate_realization(p)) == transfer_function(canonical_realization(p))


@settings(max_examples=30, deadline=None)
@given(realizations(passthrough=True))
def test_faddeev_leverrier_matches_symbolic(r):
    num, den = unreduced_transfer_function(r)
    snum, sden = sympy_tf(r)
    assert sp.expand(to_sympy(den) - sden) == 0
    assert sp.expand(to_sympy(num) - snum) == 0


@settings(max_examples=30, deadline=None)
@given(realizations(s=3))
def test_degrees(r):
    num, den = unreduced_transfer_function(r)
    assert den.degree == r.s
    assert num.degree < r.s
    f = transfer_function(r)
    assert f.num.is_zero() or f.num.degree < f.den.degree


def test_similarity_identity(nids_params):
    r = canonical_realization(nids_params)
    assert similarity_transform(r, [[1, 0], [0, 1]]) == r


def test_similarity_scaling_keeps_tf(nids_params):
    r = canonical_realization(nids_params)
    r2 = similarity_transform(r, [[2, 0], [0, 2]])
    assert r2.B0 != r.B0
    assert transfer_function(r2) == transfer_function(r)


@settings(max_examples=40, deadline=None)
@given(realizations(), unimodular())
def test_similarity_invariance(r, t):
    assert transfer_function(similarity_transform(r, t)) == transfer_function(r)


@settings(max_examples=20, deadline=None)
@given(realizations(s=3), unimodular(s=3))
def test_similarity_invariance_three_state(r, t):
    assert transfer_function(similarity_transform(r, t)) == transfer_function(r)


def test_singular_transform(nids_params):
    with pytest.raises(SingularTransform):
        similarity_transform(canonical_realization(nids_params), [[1, 2], [2, 4]])


def test_validate_canonical(nids_params):
    d = validate_class(canonical_realization(nids_params))
    assert d.state_dim_ok and d.passthrough_ok and d.single_comm_ok and not d.messages


def test_validate_nids_three_state():
    d = validate_class(nids_three_state(Fraction(1, 10)))
    assert not d.state_dim_ok
    assert d.passthrough_ok and d.single_comm_ok


def test_validate_double_communication(nids_params):
    r = canonical_realization(nids_params)
    r2 = StructuredRealization(r.A0, r.A1, r.B0, [1, 0], r.C0, r.C1)
    d = validate_class(r2)
    assert not d.single_comm_ok
    assert any("two sequential rounds" in m for m in d.messages)


def test_validate_passthrough(nids_params):
    r = canonical_realization(nids_params)
    r2 = StructuredRealization(r.A0, r.A1, r.B0, r.B1, r.C0, r.C1, D0=1)
    assert not validate_class(r2).passthrough_ok


def test_dimension_checks():
    with pytest.raises(ValueError):
        StructuredRealization([[1, 0], [0, 1]], [[0, 0]], [1, 0], [0, 0], [1, 0], [0, 0])


@settings(max_examples=40, deadline=None)
@given(realizations(passthrough=True))
def test_file_round_trip(r):
    text = realization_to_text(r)
    assert realization_from_text(text) == r
    assert realization_to_text(realization_from_text(text)) == text


def test_file_round_trip_three_state():
    r = nids_three_state(Fraction(7, 3))
    assert realization_from_text(realization_to_text(r)) == r


def test_file_defaults_and_errors():
    r = realization_from_text("[realization]\ns = 1\nA0 = 1\nB0 = -1/10\nC0 = 1\n")
    assert r.A1 == ((0,),) and r.D0 == 0
    with pytest.raises(RealizationFormatError):
        realization_from_text("[realization]\ns = 2\nA0 = 1\nB0 = 1\nC0 = 1\n")
    with pytest.raises(RealizationFormatError):
        realization_from_text("[realization]\ns = 1\nA0 = 0.5\nB0 = 1\nC0 = 1\n")
