"""Geometric structures as validated jet data, and lightlike classification.

Four kinds are supported: Riemannian metrics, sub-Riemannian structures given
by a pair (contact-type form, ambient representative of the metric on its
kernel), lightlike metrics, and framings.  All are structures of order one.
Classification statements hold "to the available jet order" only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .jetcore import DomainError, JetError, JetPoly, OrderError, monomials
from .tensorjet import (
    FormJet,
    SymTensorJet,
    VectorFieldJet,
    exterior_derivative,
    lie_derivative,
    wedge,
    wedge_power,
)

KINDS = ("riemannian", "subriemannian", "lightlike", "framing")


class StructureError(JetError):
    """Payload does not satisfy the validity predicate of its kind."""


class NotLightlikeError(StructureError):
    pass


class ClassificationError(StructureError):
    pass


class ChartError(StructureError):
    pass


@dataclass(frozen=True)
class GeometricStructure:
    """Tagged union over the four structure kinds.

    Use the ``riemannian`` / ``subriemannian`` / ``lightlike`` / ``framing``
    constructors; they run the validity predicates.
    """

    kind: str
    dim: int
    order: int
    g: Optional[SymTensorJet] = None
    omega: Optional[FormJet] = None
    H: Optional[SymTensorJet] = None
    frame: Optional[Tuple[VectorFieldJet, ...]] = None
    tensor_order: int = field(default=1, compare=False)

    # -- constructors
    @classmethod
    def riemannian(cls, g: SymTensorJet) -> "GeometricStructure":
        if not linalg.is_positive_definite(g.const_matrix()):
            raise StructureError("Riemannian metric is not positive definite at the center")
        return cls("riemannian", g.dim, g.order, g=g)

    @classmethod
    def subriemannian(cls, omega: FormJet, H: SymTensorJet) -> "GeometricStructure":
        if omega.degree != 1:
            raise StructureError("the distribution must be given by a 1-form")
        if omega.dim != H.dim:
            raise StructureError("form and metric live in different dimensions")
        w0 = [c.const() for c in omega.one_form_components()]
        if not any(w0):
            raise StructureError("the 1-form vanishes at the center")
        ker = linalg.dense_nullspace([w0], omega.dim)
        H0 = H.const_matrix()
        gram = [[sum(a[i] * H0[i][j] * b[j] for i in range(omega.dim) for j in range(omega.dim)) for b in ker]
                for a in ker]
        if not linalg.is_positive_definite(gram):
            raise StructureError("H is not positive definite on the kernel of the form")
        return cls("subriemannian", omega.dim, min(omega.order, H.order), omega=omega, H=H)

    @classmethod
    def lightlike(cls, g: SymTensorJet) -> "GeometricStructure":
        M = g.const_matrix()
        if linalg.dense_rank(M) != g.dim - 1 or not linalg.is_positive_semidefinite(M):
            raise NotLightlikeError("a lightlike metric is positive semidefinite of rank n-1 at the center")
        return cls("lightlike", g.dim, g.order, g=g)

    @classmethod
    def framing(cls, fields: Sequence[VectorFieldJet]) -> "GeometricStructure":
        fields = tuple(fields)
        if not fields:
            raise StructureError("empty framing")
        n = fields[0].dim
        if any(X.dim != n for X in fields):
            raise StructureError("framing fields in different dimensions")
        if len(fields) != n:
            raise StructureError(f"a framing of R^{n} has {n} fields, got {len(fields)}")
        return cls("framing", n, min(X.order for X in fields), frame=fields)

    @classmethod
    def metric(cls, g: SymTensorJet) -> "GeometricStructure":
        """Riemannian or lightlike, whichever the center matrix says; rejects anything else."""
        M = g.const_matrix()
        if linalg.is_positive_definite(M):
            return cls.riemannian(g)
        if linalg.dense_rank(M) == g.dim - 1 and linalg.is_positive_semidefinite(M):
            return cls.lightlike(g)
        raise ClassificationError("metric is neither Riemannian nor lightlike at the center")

    # -- operations
    def truncate(self, order: int) -> "GeometricStructure":
        if order > self.order:
            raise OrderError(f"structure has order {self.order}, cannot raise to {order}")
        if self.kind in ("riemannian", "lightlike"):
            return GeometricStructure(self.kind, self.dim, order, g=self.g.truncate(order))
        if self.kind == "subriemannian":
            return GeometricStructure(self.kind, self.dim, order, omega=self.omega.truncate(order),
                                      H=self.H.truncate(order))
        return GeometricStructure(self.kind, self.dim, order, frame=tuple(X.truncate(order) for X in self.frame))

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind in ("riemannian", "lightlike"):
            d["g"] = self.g.to_dict("g")
        elif self.kind == "subriemannian":
            d["omega"] = self.omega.to_dict()
            d["H"] = self.H.to_dict("H")
        else:
            d["frame"] = [X.to_dict() for X in self.frame]
        return d

    @classmethod
    def from_dict(cls, data: dict, dim: int, order: int) -> "GeometricStructure":
        kind = data.get("kind")
        if kind in ("riemannian", "lightlike", "metric"):
            g = SymTensorJet.from_dict(data["g"], dim, order)
            return {"riemannian": cls.riemannian, "lightlike": cls.lightlike, "metric": cls.metric}[kind](g)
        if kind == "subriemannian":
            omega = FormJet.from_dict(data["omega"], dim, order, degree=1)
            H = SymTensorJet.from_dict(data["H"], dim, order)
            return cls.subriemannian(omega, H)
        if kind == "framing":
            return cls.framing([VectorFieldJet.from_dict(X, dim, order) for X in data["frame"]])
        raise StructureError(f"unknown structure kind {kind!r}")


# ---------------------------------------------------------------- contact test

def is_contact(omega: FormJet, n: Optional[int] = None) -> bool:
    """``omega ^ (d omega)^d`` has non-zero constant coefficient, ``n = 2d + 1``."""
    n = omega.dim if n is None else n
    if n % 2 == 0:
        raise DomainError("contact structures live in odd dimension")
    if omega.degree != 1:
        raise DomainError("contact test needs a 1-form")
    d = (n - 1) // 2
    if d == 0:
        return any(c.const() for c in omega.one_form_components())
    if omega.order < 1:
        raise OrderError("contact test needs the 1-jet of the form")
    vol = wedge(omega, wedge_power(exterior_derivative(omega), d))
    top = tuple(range(n))
    return vol.component(top).const() != 0


# ---------------------------------------------------------------- lightlike classification

@dataclass(frozen=True)
class LightlikeClassification:
    characteristic_direction: VectorFieldJet
    tag: str  # transversally_riemannian | transversally_conformal_generic | generic_nonconformal | other
    transversally_conformal: bool
    generic: bool
    conformal_factor_jet: Optional[JetPoly]
    lie_derivative: SymTensorJet
    order: int

    def to_dict(self) -> dict:
        return {
            "class": self.tag,
            "transversally_conformal": self.transversally_conformal,
            "generic": self.generic,
            "to_order": self.order,
            "N": self.characteristic_direction.to_dict(),
            "f": None if self.conformal_factor_jet is None else self.conformal_factor_jet.to_dict(),
            "genericity_test": "rank and kernel of L_N g at the center only",
        }


def kernel_field(g: SymTensorJet) -> VectorFieldJet:
    """The jet of the characteristic direction, normalized by one unit component.

    The kernel vector of the center matrix fixes which component is set to 1
    (the last non-zero one); the rest is solved degree by degree.
    """
    n, m = g.dim, g.order
    M = g.const_matrix()
    ker = linalg.dense_nullspace(M, n)
    if len(ker) != 1:
        raise NotLightlikeError(f"center matrix has a {len(ker)}-dimensional kernel")
    v0 = ker[0]
    p = max(i for i in range(n) if v0[i])
    monos = monomials(n, m)
    free = [j for j in range(n) if j != p]
    ncols = len(free) * len(monos)
    col = {(j, e): a * len(monos) + b for a, j in enumerate(free) for b, e in enumerate(monos)}
    rows: Dict[Tuple[int, tuple], Dict[int, Fraction]] = {}
    rhs: Dict[Tuple[int, tuple], Fraction] = {}
    for i in range(n):
        for j in free:
            gij = g.entry(i, j)
            for e in monos:
                prod = gij * JetPoly.monomial(n, m, e)
                for eo, v in prod.coeffs.items():
                    rows.setdefault((i, eo), {})[col[(j, e)]] = v
        for eo, v in g.entry(i, p).coeffs.items():
            rhs[(i, eo)] = rhs.get((i, eo), 0) - v
    keys = sorted(set(rows) | set(rhs))
    sol = linalg.solve([rows.get(k, {}) for k in keys], [rhs.get(k, Fraction(0)) for k in keys], ncols)
    if sol is None:
        raise NotLightlikeError(f"rank of g jumps within the {m}-jet; no kernel field")
    comps: List[JetPoly] = []
    for j in range(n):
        if j == p:
            comps.append(JetPoly.constant(n, m, 1))
        else:
            comps.append(JetPoly(n, m, {e: sol.get(col[(j, e)], 0) for e in monos}))
    return VectorFieldJet(comps)


def solve_proportional(L: SymTensorJet, g: SymTensorJet) -> Optional[JetPoly]:
    """A function jet ``f`` with ``L = f g`` to ``L``'s order, or None."""
    n = g.dim
    m = min(L.order, g.order)
    monos = monomials(n, m)
    rows: Dict[Tuple[Tuple[int, int], tuple], Dict[int, Fraction]] = {}
    for c, e in enumerate(monos):
        x = JetPoly.monomial(n, m, e)
        for key, gij in g.coeffs.items():
            for eo, v in (gij.truncate(m) * x).coeffs.items():
                rows.setdefault((key, eo), {})[c] = v
    rhs: Dict = {}
    for key, lij in L.coeffs.items():
        for eo, v in lij.truncate(m).coeffs.items():
            rhs[(key, eo)] = v
    keys = sorted(set(rows) | set(rhs))
    sol = linalg.solve([rows.get(k, {}) for k in keys], [rhs.get(k, Fraction(0)) for k in keys], len(monos))
    if sol is None:
        return None
    return JetPoly(n, m, {monos[c]: v for c, v in sol.items()})


def classify_lightlike(g: SymTensorJet) -> LightlikeClassification:
    """Characteristic direction and class tag of a lightlike metric jet."""
    GeometricStructure.lightlike(g)  # validity
    N = kernel_field(g)
    L = lie_derivative(N, g)
    n = g.dim
    L0 = L.const_matrix()
    N0 = N.at_center()
    kernel_is_N = (linalg.dense_rank(L0) == n - 1
                   and all(sum(L0[i][j] * N0[j] for j in range(n)) == 0 for i in range(n)))
    if L.is_zero():
        return LightlikeClassification(N, "transversally_riemannian", True, False,
                                       JetPoly.zero(n, L.order), L, L.order)
    f = solve_proportional(L, g)
    if f is not None:
        tag = "transversally_conformal_generic" if kernel_is_N else "other"
        return LightlikeClassification(N, tag, True, kernel_is_N, f, L, L.order)
    tag = "generic_nonconformal" if kernel_is_N else "other"
    return LightlikeClassification(N, tag, False, kernel_is_N, None, L, L.order)


# ---------------------------------------------------------------- generalized conformal structures

@dataclass(frozen=True)
class GeneralizedConformalStructure:
    """The family ``r -> S(r)`` of scalar products on the quotient chart.

    ``family`` is a SymTensorJet in all n variables whose non-zero entries only
    involve the first ``base_dim`` indices; its coefficients depend on the
    transversal parameter (the last coordinate).
    """

    base_dim: int
    family: SymTensorJet

    @property
    def param_axis(self) -> int:
        return self.base_dim

    def at(self, r) -> SymTensorJet:
        """Scalar product family at a fixed parameter value, as a jet on the quotient chart."""
        n = self.base_dim
        r = Fraction(r)
        out = {}
        for (i, j), p in self.family.coeffs.items():
            c: Dict[tuple, Fraction] = {}
            for e, v in p.coeffs.items():
                key = e[:n]
                c[key] = c.get(key, 0) + v * r ** e[n]
            out[(i, j)] = JetPoly(n, p.order, c)
        return SymTensorJet(n, self.family.order, out)

    def shape(self) -> str:
        """``point`` (no dependence), ``ray`` (proportional family) or ``curve``."""
        d = SymTensorJet(self.family.dim, self.family.order - 1,
                         {k: v.partial(self.param_axis) for k, v in self.family.coeffs.items()})
        if d.is_zero():
            return "point"
        return "ray" if solve_proportional(d, self.family) is not None else "curve"


def generalized_conformal_of(g: SymTensorJet) -> GeneralizedConformalStructure:
    """Read off the curve of quotient scalar products in an adapted chart (N = d/d(last))."""
    GeometricStructure.lightlike(g)
    n = g.dim
    last = n - 1
    for (i, j) in g.coeffs:
        if last in (i, j):
            raise ChartError("chart is not adapted: g has components along the last coordinate")
    S0 = [[g.entry(i, j).const() for j in range(last)] for i in range(last)]
    if not linalg.is_positive_definite(S0):
        raise ChartError("quotient scalar product is not positive definite at the center")
    return GeneralizedConformalStructure(last, g)
