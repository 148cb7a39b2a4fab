import pytest
import sympy
from hypothesis import given, strategies as st

from glueforge import ringcat
from glueforge.errors import MalformedInput, ValidationError
from glueforge.ringcat import LocRing, RingMor

x = sympy.Symbol("x")
A = LocRing.polynomial("x")


def test_localize_at_x():
    R, m = ringcat.localize(A, "x")
    assert R.inverted == frozenset({x}) and m.kind == "further-localization"


def test_localize_at_unit_is_identity():
    R, m = ringcat.localize(A, 1)
    assert R == A and m.kind == "identity"
    Rx, _ = ringcat.localize(A, "x")
    assert ringcat.localize(Rx, "3*x**2")[1].kind == "identity"


def test_localize_twice_canonical():
    R1, _ = ringcat.localize(ringcat.localize(A, "x")[0], "x - 1")
    R2, _ = ringcat.localize(A, "x**2 - x")
    assert R1 == R2 == LocRing(("x",), frozenset({x, x - 1}))


def test_localize_at_zero_gives_zero_ring():
    R, m = ringcat.localize(A, 0)
    assert R.is_zero and m.target.is_zero


def test_tensor_examples():
    B, b = ringcat.localize(A, "x")
    C, c = ringcat.localize(A, "x - 1")
    assert ringcat.tensor_over(A, b, c) == LocRing(("x",), frozenset({x, x - 1}))
    i = ringcat.identity(A)
    assert ringcat.tensor_over(A, i, i) == A
    assert ringcat.tensor_over(A, b, ringcat.to_zero(A)).is_zero


def test_open_embedding_examples():
    assert ringcat.is_open_embedding(ringcat.localize(A, "x")[1])
    assert ringcat.is_open_embedding(ringcat.identity(A))
    evaluation = RingMor(A, LocRing.polynomial(), {"x": 0})
    assert not ringcat.is_open_embedding(evaluation)


def test_transition_of_projective_line_is_iso():
    Axx = ringcat.localize(A, "x")[0]
    Ay = LocRing.polynomial("y")
    Ayy = ringcat.localize(Ay, "y")[0]
    phi = ringcat.substitution(Ayy, Axx, {"y": "1/x"})
    assert ringcat.is_iso(phi)
    assert not ringcat.is_iso(ringcat.localize(A, "x")[1])


def test_image_must_be_a_unit_when_inverted():
    Axx = ringcat.localize(A, "x")[0]
    with pytest.raises(ValidationError):
        ringcat.substitution(Axx, A, {"x": "x + 1"})


def test_zero_ring_rules():
    Z = LocRing.zero()
    assert ringcat.to_zero(A).target.is_zero
    with pytest.raises(ValidationError):
        RingMor(Z, A, {})


def test_graded_sections_examples():
    assert ringcat.graded_sections(A, 2).exponents == (0, 1, 2)
    Axx = ringcat.localize(A, "x")[0]
    assert ringcat.graded_sections(Axx, 0, (-2, 2)).dim == 5
    inf = ringcat.graded_sections(LocRing.polynomial("y"), 0, (-3, 3), infinity=True)
    assert inf.exponents == (-3, -2, -1, 0)
    assert inf.basis() == ["x^-3", "x^-2", "x^-1", "1"]
    with pytest.raises(ValidationError):
        ringcat.graded_sections(LocRing.polynomial("x", "y"), 0)


def test_ring_json_round_trip_and_errors():
    R = LocRing(("x",), frozenset({x, x - 1}))
    assert ringcat.ring_from_json(R.to_json()) == R
    with pytest.raises(MalformedInput):
        ringcat.ring_from_json({"vars": ["x"], "inverted": ["import os"]})


def test_pullback_of_two_basic_opens():
    b = ringcat.localize(A, "x")[1]
    c = ringcat.localize(A, "x + 2")[1]
    P, pb, pc = ringcat.pullback_ring(A, b, c)
    assert P == LocRing(("x",), frozenset({x, x + 2}))
    assert ringcat.compose(b, pb) == ringcat.compose(c, pc)


roots = st.lists(st.integers(-4, 4), min_size=0, max_size=3)


def basic(rs):
    f = sympy.Integer(1)
    for r in rs:
        f *= x - r
    return f


@given(roots, roots)
def test_localizing_in_steps_is_canonical(r1, r2):
    one = ringcat.localize(ringcat.localize(A, basic(r1))[0], basic(r2))[0]
    other = ringcat.localize(A, sympy.expand(basic(r1) * basic(r2)))[0]
    assert one == other
    assert ringcat.canon(ringcat.canon(one)) == ringcat.canon(one)
    assert one.inverted == frozenset(x - r for r in set(r1) | set(r2))


@given(roots, roots, st.integers(-3, 3))
def test_open_embeddings_compose(r1, r2, shift):
    R1, m1 = ringcat.localize(A, basic(r1))
    R2, m2 = ringcat.localize(R1, basic(r2))
    # an isomorphism x -> x + shift between shifted localizations
    S = LocRing(("x",), frozenset(sympy.expand(f.subs(x, x + shift)) for f in R2.inverted))
    S = ringcat.canon(S)
    iso = RingMor(R2, S, {"x": x + shift})
    total = ringcat.compose(ringcat.compose(m1, m2), iso)
    assert ringcat.is_open_embedding(total)
    AT, there, back = ringcat.embedding_factors(total)
    assert AT == R2 and ringcat.is_iso(there)


@given(roots)
def test_tensor_with_itself(rs):
    B, b = ringcat.localize(A, basic(rs))
    assert ringcat.tensor_over(A, b, b) == B
