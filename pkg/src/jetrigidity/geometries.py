"""Builders for the reference geometries used by the builtin scenarios and the tests."""
from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from .jetcore import JetPoly, MapJet, exp_jet, variables
from .structures import GeometricStructure
from .tensorjet import FormJet, VectorFieldJet, from_quadratic_form


def _const(n: int, m: int, v) -> JetPoly:
    return JetPoly.constant(n, m, v)


# ---------------------------------------------------------------- contact / sub-Riemannian

def heisenberg_form(order: int) -> FormJet:
    """``dz + x dy - y dx`` on R^3 (coordinates x, y, z)."""
    x, y, _ = variables(3, order)
    return FormJet.one_form([-y, x, _const(3, order, 1)])


def heisenberg(order: int) -> GeometricStructure:
    """Heisenberg contact sub-Riemannian structure with ``H = dx^2 + dy^2``."""
    H = from_quadratic_form(3, order, {(0, 0): 1, (1, 1): 1})
    return GeometricStructure.subriemannian(heisenberg_form(order), H)


def heisenberg_frame(order: int) -> List[VectorFieldJet]:
    """Orthonormal horizontal frame ``d/dx + y d/dz``, ``d/dy - x d/dz``."""
    x, y, _ = variables(3, order)
    one, zero = _const(3, order, 1), JetPoly.zero(3, order)
    return [VectorFieldJet([one, zero, y]), VectorFieldJet([zero, one, -x])]


def dz_minus_xdy(order: int) -> GeometricStructure:
    """The form ``dz - x dy`` with ``H = dx^2 + dy^2``."""
    x, _, _ = variables(3, order)
    omega = FormJet.one_form([JetPoly.zero(3, order), -x, _const(3, order, 1)])
    H = from_quadratic_form(3, order, {(0, 0): 1, (1, 1): 1})
    return GeometricStructure.subriemannian(omega, H)


def cubic_map(order: int) -> MapJet:
    """``(x + z^2/2, y - z x^2/2, z + y z^2/2)``: identity 1-jet, non-trivial 2-jet."""
    x, y, z = variables(3, order)
    h = Fraction(1, 2)
    return MapJet([x + (z * z).scale(h), y - (z * x * x).scale(h), z + (y * z * z).scale(h)])


def heisenberg_family_map(m: int, order: int) -> MapJet:
    """``(x + z^m, y + z^m, z)``."""
    x, y, z = variables(3, order)
    return MapJet([x + z ** m, y + z ** m, z])


# ---------------------------------------------------------------- Riemannian

def flat(n: int, order: int) -> GeometricStructure:
    return GeometricStructure.riemannian(from_quadratic_form(n, order, {(i, i): 1 for i in range(n)}))


def rotation_map(order: int, c=Fraction(3, 5), s=Fraction(4, 5), n: int = 3) -> MapJet:
    """Rotation by the rational angle ``(c, s)`` in the first coordinate plane."""
    xs = variables(n, order)
    comps = [xs[0].scale(c) - xs[1].scale(s), xs[0].scale(s) + xs[1].scale(c)] + list(xs[2:])
    return MapJet(comps)


# ---------------------------------------------------------------- lightlike

def degenerate_line(order: int) -> GeometricStructure:
    """``dx^2`` on R^2: lightlike, transversally Riemannian, infinitely many Killing jets."""
    return GeometricStructure.lightlike(from_quadratic_form(2, order, {(0, 0): 1}))


def conformal_lightlike(n: int, order: int, slopes: Sequence = None) -> GeometricStructure:
    """``sum (1 + a_i r) dq_i^2`` on R^n, ``r`` the last coordinate.

    Equal slopes give the transversally conformal generic metric ``(1 + r) dq^2``.
    """
    slopes = [1] * (n - 1) if slopes is None else list(slopes)
    xs = variables(n, order)
    r = xs[-1]
    terms = {(i, i): _const(n, order, 1) + r.scale(Fraction(slopes[i])) for i in range(n - 1)}
    return GeometricStructure.lightlike(from_quadratic_form(n, order, terms))


def _inv_stereo(n: int, order: int):
    """Jets of ``p = (1, xi(y))`` on the chart ``(y_1..y_{n-1}, t)`` and of ``1/(1+|y|^2)``."""
    xs = variables(n, order)
    ys = xs[:-1]
    s = sum((y * y for y in ys), JetPoly.zero(n, order))
    inv = (_const(n, order, 1) + s).reciprocal()
    xi = [(y.scale(2)) * inv for y in ys] + [(_const(n, order, 1) - s) * inv]
    return [_const(n, order, 1)] + xi, inv


def lightcone(n: int, order: int) -> GeometricStructure:
    """Induced degenerate metric on the future light cone of R^{1,n}, chart ``(y, t)``.

    ``g = e^{2t} 4 |dy|^2 / (1 + |y|^2)^2``.
    """
    xs = variables(n, order)
    t = xs[-1]
    _, inv = _inv_stereo(n, order)
    factor = exp_jet(t.scale(2)) * inv * inv
    terms = {(i, i): factor.scale(4) for i in range(n - 1)}
    return GeometricStructure.lightlike(from_quadratic_form(n, order, terms))


def lorentz_generators(n: int) -> List[List[List[Fraction]]]:
    """Basis of o(1, n): rotations in the spatial planes and boosts."""
    N = n + 1
    out = []
    for i in range(1, N):
        for j in range(i + 1, N):
            A = [[Fraction(0)] * N for _ in range(N)]
            A[i][j], A[j][i] = Fraction(-1), Fraction(1)
            out.append(A)
    for i in range(1, N):
        A = [[Fraction(0)] * N for _ in range(N)]
        A[0][i] = A[i][0] = Fraction(1)
        out.append(A)
    return out


def lorentz_fields(n: int, order: int) -> List[VectorFieldJet]:
    """Vector fields on the cone chart induced by the linear action of o(1, n)."""
    p, _ = _inv_stereo(n, order)
    den = p[0] + p[n]
    inv2 = (den * den).reciprocal()
    fields = []
    for A in lorentz_generators(n):
        Ap = [sum((p[b].scale(A[a][b]) for b in range(n + 1) if A[a][b]), JetPoly.zero(n, order))
              for a in range(n + 1)]
        comps = [(Ap[i + 1] * den - p[i + 1] * (Ap[0] + Ap[n])) * inv2 for i in range(n - 1)]
        comps.append(Ap[0])
        fields.append(VectorFieldJet(comps))
    return fields


def singular_metric(d: int, order: int, center=0) -> GeometricStructure:
    """``x^{2d} dx^2`` on R, in a chart centered at ``center``."""
    x = variables(1, order)[0] + _const(1, order, center)
    g = from_quadratic_form(1, order, {(0, 0): x ** (2 * d)})
    return GeometricStructure.metric(g)


# ---------------------------------------------------------------- framings

def framing_xd(d: int, order: int) -> GeometricStructure:
    """The single field ``x^d d/dx`` on R."""
    x = variables(1, order)[0]
    return GeometricStructure.framing([VectorFieldJet([x ** d])])
