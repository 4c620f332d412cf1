from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings

import oracles
from jetrigidity.geometries import conformal_lightlike, heisenberg_form, lightcone
from jetrigidity.jetcore import DomainError, JetPoly, variables
from jetrigidity.structures import (
    ChartError,
    ClassificationError,
    GeometricStructure,
    NotLightlikeError,
    StructureError,
    classify_lightlike,
    generalized_conformal_of,
    is_contact,
    kernel_field,
    solve_proportional,
)
from jetrigidity.tensorjet import FormJet, SymTensorJet, VectorFieldJet, from_quadratic_form, lie_derivative
from strategies import unit_jets


def one_form(n, m, comps):
    return FormJet.one_form([c if isinstance(c, JetPoly) else JetPoly.constant(n, m, c) for c in comps])


def test_contact_examples():
    x, y, z = variables(3, 2)
    assert is_contact(heisenberg_form(2))
    assert not is_contact(one_form(3, 2, [0, 0, 1]))
    assert is_contact(one_form(3, 2, [0, -x, 1]))
    with pytest.raises(DomainError):
        is_contact(one_form(2, 2, [0, 1]))


@settings(max_examples=50, deadline=None)
@given(unit_jets(3, 3))
def test_contact_is_a_property_of_the_hyperplane_field(u):
    w = heisenberg_form(3)
    scaled = FormJet.one_form([u * c for c in w.one_form_components()])
    assert is_contact(scaled) == is_contact(w)
    dz = one_form(3, 3, [0, 0, 1])
    assert not is_contact(FormJet.one_form([u * c for c in dz.one_form_components()]))


def test_validity_predicates():
    with pytest.raises(StructureError):
        GeometricStructure.riemannian(from_quadratic_form(2, 2, {(0, 0): 1}))
    with pytest.raises(NotLightlikeError):
        GeometricStructure.lightlike(from_quadratic_form(3, 2, {(0, 0): 1}))
    with pytest.raises(NotLightlikeError):
        GeometricStructure.lightlike(from_quadratic_form(2, 2, {(0, 0): -1}))
    with pytest.raises(StructureError):
        GeometricStructure.subriemannian(one_form(3, 2, [0, 0, 0]), from_quadratic_form(3, 2, {(0, 0): 1}))
    with pytest.raises(StructureError):  # H degenerate on ker dz
        GeometricStructure.subriemannian(one_form(3, 2, [0, 0, 1]), from_quadratic_form(3, 2, {(0, 0): 1}))
    with pytest.raises(ClassificationError):
        GeometricStructure.metric(from_quadratic_form(3, 2, {(0, 0): 1}))
    with pytest.raises(StructureError):
        GeometricStructure.framing([VectorFieldJet.coordinate(2, 2, 0)])
    # degenerate framings are allowed
    x = variables(1, 3)[0]
    assert GeometricStructure.framing([VectorFieldJet([x * x])]).kind == "framing"


def test_structure_round_trip():
    s = GeometricStructure.subriemannian(heisenberg_form(3), from_quadratic_form(3, 3, {(0, 0): 1, (1, 1): 1}))
    assert GeometricStructure.from_dict(s.to_dict(), 3, 3) == s


def test_transversally_riemannian_example():
    for n in (2, 3, 4):
        g = from_quadratic_form(n, 3, {(i, i): 1 for i in range(n - 1)})
        c = classify_lightlike(g)
        assert c.tag == "transversally_riemannian"
        assert c.characteristic_direction == VectorFieldJet.coordinate(n, 3, n - 1)


def test_transversally_conformal_generic_example():
    g = conformal_lightlike(4, 4).g
    c = classify_lightlike(g)
    assert c.tag == "transversally_conformal_generic"
    assert c.transversally_conformal and c.generic
    r = sp.Symbol("x4")
    assert oracles.same_jet(c.conformal_factor_jet, oracles.series_truncate(1 / (1 + r), [r], 4).subs({}))


def test_lightcone_is_transversally_conformal_generic():
    c = classify_lightlike(lightcone(3, 4).g)
    assert c.tag == "transversally_conformal_generic"
    assert c.conformal_factor_jet == JetPoly.constant(3, 3, 2)


def test_non_conformal_generic_example():
    g = conformal_lightlike(3, 3, slopes=[1, 2]).g
    assert classify_lightlike(g).tag == "generic_nonconformal"


def test_kernel_field_annihilates_g_in_a_tilted_chart():
    xs = oracles.syms(2)
    x, t = xs
    # dx'^2 with x' = x - t - x t: kernel tilts away from the coordinate axes
    dxp = [1 - t, -1 - x]
    G = sp.Matrix(2, 2, lambda i, j: dxp[i] * dxp[j])
    g = SymTensorJet.from_matrix([[oracles.from_expr(G[i, j], xs, 4) for j in range(2)] for i in range(2)])
    N = kernel_field(g)
    contracted = g.contract(N)
    assert contracted.is_zero()
    assert classify_lightlike(g).tag == "transversally_riemannian"


@settings(max_examples=40, deadline=None)
@given(unit_jets(4, 3))
def test_rescaling_n_keeps_proportionality_and_tag(u):
    g = conformal_lightlike(4, 4).g
    cl = classify_lightlike(g)
    N = cl.characteristic_direction.truncate(3)
    uN = VectorFieldJet([u * c for c in N])
    L1 = lie_derivative(N, g.truncate(3))
    L2 = lie_derivative(uN, g.truncate(3))
    assert solve_proportional(L2, L1) is not None
    f2 = solve_proportional(L2, g.truncate(3))
    assert f2 is not None


def test_generalized_conformal_shapes():
    n, m = 3, 3
    q1, q2, r = variables(n, m)
    one = JetPoly.constant(n, m, 1)
    point = from_quadratic_form(n, m, {(0, 0): one + q2 * q2, (1, 1): 2})
    ray = from_quadratic_form(n, m, {(0, 0): one + r, (1, 1): one + r})
    curve = from_quadratic_form(n, m, {(0, 0): one + r, (1, 1): one + r.scale(2)})
    assert generalized_conformal_of(point).shape() == "point"
    assert generalized_conformal_of(ray).shape() == "ray"
    assert generalized_conformal_of(curve).shape() == "curve"
    fam = generalized_conformal_of(curve)
    assert fam.at(Fraction(1, 2)).entry(1, 1) == JetPoly.constant(2, 3, 2)


def test_generalized_conformal_needs_adapted_chart():
    xs = variables(2, 2)
    g = SymTensorJet.from_matrix([[JetPoly.constant(2, 2, 1), xs[0]], [xs[0], xs[0] * xs[0]]])
    with pytest.raises(ChartError):
        generalized_conformal_of(g)
