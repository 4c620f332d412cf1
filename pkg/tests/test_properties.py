"""Algebraic invariants of the engine as hypothesis properties (shrinking counterexamples)."""
from hypothesis import given, settings
from hypothesis import strategies as st

from jetrigidity.geometries import heisenberg
from jetrigidity.jetcore import MapJet, mapjet_compose, mapjet_inverse
from jetrigidity.structures import is_contact
from jetrigidity.tensorjet import (
    exterior_derivative,
    interior_product,
    lie_bracket,
    lie_derivative,
    pullback_tensor,
    wedge,
)
from strategies import diffeo_germs, forms, jet_polys, sym_tensors, unit_jets, vector_fields

FAST = settings(max_examples=40, deadline=None)


def same(a, b):
    m = min(a.order, b.order)
    return (a - b).truncate(m).is_zero()


@FAST
@given(jet_polys(2, 4), jet_polys(2, 4), st.integers(0, 3))
def test_truncation_is_a_ring_homomorphism(a, b, k):
    assert (a * b).truncate(k) == a.truncate(k) * b.truncate(k)
    assert (a + b).truncate(k) == a.truncate(k) + b.truncate(k)


@FAST
@given(jet_polys(3, 3), jet_polys(3, 3))
def test_partial_is_a_derivation(a, b):
    for i in range(3):
        assert same((a * b).partial(i), a.partial(i) * b + a * b.partial(i))


@FAST
@given(diffeo_germs(2, 3), diffeo_germs(2, 3), diffeo_germs(2, 3))
def test_composition_is_associative(f, g, h):
    left = mapjet_compose(mapjet_compose(f, g), h)
    right = mapjet_compose(f, mapjet_compose(g, h))
    assert all(same(a, b) for a, b in zip(left.components, right.components))


@FAST
@given(diffeo_germs(3, 3))
def test_inverse_round_trip(f):
    ident = MapJet.identity(3, 3)
    for comp in (mapjet_compose(f, mapjet_inverse(f)), mapjet_compose(mapjet_inverse(f), f)):
        assert all(same(a, b) for a, b in zip(comp.components, ident.components))


@FAST
@given(diffeo_germs(3, 3), diffeo_germs(3, 3), sym_tensors(3, 3))
def test_pullback_is_contravariant(f, g, T):
    assert same(pullback_tensor(mapjet_compose(f, g), T), pullback_tensor(g, pullback_tensor(f, T)))


@FAST
@given(diffeo_germs(3, 3), forms(3, 1, 3))
def test_pullback_commutes_with_d(f, a):
    assert same(pullback_tensor(f, exterior_derivative(a)), exterior_derivative(pullback_tensor(f, a)))


@FAST
@given(forms(3, 1, 3), forms(3, 1, 3))
def test_one_forms_anticommute(a, b):
    assert same(wedge(a, b), -wedge(b, a))
    assert wedge(a, a).is_zero()


@FAST
@given(vector_fields(3, 3), forms(3, 1, 3), forms(3, 1, 3))
def test_interior_product_is_an_antiderivation(X, a, b):
    lhs = interior_product(X, wedge(a, b))
    rhs = wedge(interior_product(X, a), b) - wedge(a, interior_product(X, b))
    assert same(lhs, rhs)


@FAST
@given(vector_fields(3, 3), forms(3, 1, 3), forms(3, 1, 3))
def test_lie_derivative_is_a_derivation_of_wedge(X, a, b):
    lhs = lie_derivative(X, wedge(a, b))
    assert same(lhs, wedge(lie_derivative(X, a), b) + wedge(a, lie_derivative(X, b)))


@FAST
@given(vector_fields(2, 4), vector_fields(2, 4), sym_tensors(2, 4))
def test_lie_derivative_represents_the_bracket(X, Y, T):
    lhs = lie_derivative(lie_bracket(X, Y), T)
    rhs = lie_derivative(X, lie_derivative(Y, T)) - lie_derivative(Y, lie_derivative(X, T))
    assert same(lhs, rhs)


@FAST
@given(unit_jets(3, 3), diffeo_germs(3, 3))
def test_contact_condition_survives_rescaling_and_pullback(u, f):
    w = heisenberg(3).omega
    assert is_contact(w.scale(u))
    assert is_contact(pullback_tensor(f, w))
