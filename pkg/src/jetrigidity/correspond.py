"""Correspondences between structure kinds.

* contact sub-Riemannian ``(omega, H)`` -> canonical contact form, Reeb field and
  the Riemannian extension ``hbar`` (R unit and orthogonal to the distribution);
* transversally conformal lightlike ``g = c(q, r) h_q`` -> conformal data on the
  quotient, and the unique isometric lift of a conformal map of the quotient.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence

from . import linalg
from .jetcore import DomainError, JetError, JetPoly, MapJet, OrderError, monomials
from .structures import ClassificationError, generalized_conformal_of, is_contact
from .tensorjet import (
    FormJet,
    SymTensorJet,
    VectorFieldJet,
    exterior_derivative,
    interior_product,
    pullback_tensor,
    wedge_power,
)


class ContactError(JetError):
    pass


class FrameError(JetError):
    pass


class GenericityError(JetError):
    pass


class DistortionError(JetError):
    pass


# ---------------------------------------------------------------- contact side

@dataclass(frozen=True)
class NormalizedContactData:
    f: JetPoly
    omega_prime: FormJet
    frame: tuple

    def to_dict(self) -> dict:
        return {"f": self.f.to_dict(), "omega_prime": self.omega_prime.to_dict(),
                "order": self.omega_prime.order}


def _check_frame(omega: FormJet, frame: Sequence[VectorFieldJet], order: int):
    n = omega.dim
    d = (n - 1) // 2
    if len(frame) != 2 * d:
        raise FrameError(f"the distribution has rank {2 * d}; got {len(frame)} fields")
    if linalg.dense_rank([X.at_center() for X in frame]) != 2 * d:
        raise FrameError("frame is not linearly independent at the center")
    for i, X in enumerate(frame):
        val = omega.evaluate([X]).truncate(order)
        if not val.is_zero():
            deg = val.lowest_degree()
            raise FrameError(f"field {i + 1} leaves the distribution at degree {deg}")


def normalize_contact(omega: FormJet, H: SymTensorJet, frame: Sequence[VectorFieldJet]) -> NormalizedContactData:
    """Canonical contact form ``omega' = f omega`` attached to ``(ker omega, H)``.

    ``f`` solves ``f^d (d omega)^d (X_1, ..., X_2d) = sqrt(det H(X_i, X_j))``, i.e.
    ``(d omega')^d`` restricted to the distribution equals the metric volume of the
    frame.  For ``d = 1`` and an orthonormal frame this is ``f d omega(X_1, X_2) = 1``.
    Independent of the unit rescaling of ``omega`` and of the frame up to orientation.
    """
    n = omega.dim
    if not is_contact(omega):
        raise ContactError("omega ^ (d omega)^d vanishes at the center")
    d = (n - 1) // 2
    frame = tuple(frame)
    order = min([omega.order - 1, H.order] + [X.order for X in frame])
    if order < 0:
        raise OrderError("normalization needs the 1-jet of omega")
    _check_frame(omega, frame, order)
    gram = [[H.evaluate(X, Y).truncate(order) for Y in frame] for X in frame]
    vol = linalg.det(gram)
    if vol.const() <= 0:
        raise FrameError("H is not positive definite on the frame")
    try:
        s = vol.sqrt()
    except DomainError as exc:
        raise FrameError(f"metric volume of the frame has no rational square root ({exc}); "
                         "use a frame with rational Gram determinant square") from None
    D = wedge_power(exterior_derivative(omega), d).evaluate(list(frame)).truncate(order)
    if not D.const():
        raise ContactError("(d omega)^d degenerates on the frame")
    fd = s * D.reciprocal()
    if fd.const() < 0 and d % 2 == 0:
        raise FrameError("frame orientation incompatible with an even power; flip one field")
    try:
        f = fd if d == 1 else fd.nth_root(d)
    except DomainError as exc:
        raise FrameError(str(exc)) from None
    return NormalizedContactData(f, omega.truncate(order).scale(f), frame)


def reeb_field(omega_p: FormJet) -> VectorFieldJet:
    """Unique ``R`` with ``i_R d omega' = 0`` and ``omega'(R) = 1``; order ``omega'.order - 1``."""
    n = omega_p.dim
    m = omega_p.order - 1
    if m < 0:
        raise OrderError("Reeb field needs the 1-jet of the form")
    dw = exterior_derivative(omega_p)
    w = [c.truncate(m) for c in omega_p.one_form_components()]
    monos = monomials(n, m)
    ncols = n * len(monos)
    rows: Dict[tuple, Dict[int, Fraction]] = {}
    for b, e in enumerate(monos):
        x = JetPoly.monomial(n, m, e)
        for i in range(n):
            col = b * n + i
            Ei = VectorFieldJet([x if a == i else JetPoly.zero(n, m) for a in range(n)])
            contr = interior_product(Ei, dw).one_form_components()
            for j, p in enumerate(contr):
                for eo, v in p.truncate(m).coeffs.items():
                    rows.setdefault(("d", j, eo), {})[col] = v
            for eo, v in (w[i] * x).coeffs.items():
                rows.setdefault(("w", eo), {})[col] = v
    rhs = {("w", (0,) * n): Fraction(1)}
    keys = sorted(set(rows) | set(rhs), key=repr)
    rowlist = [rows.get(k, {}) for k in keys]
    sol = linalg.solve(rowlist, [rhs.get(k, Fraction(0)) for k in keys], ncols)
    if sol is None or linalg.rank(rowlist) != ncols:
        raise ContactError("Reeb system is singular: the form is not contact")
    comps: List[Dict] = [dict() for _ in range(n)]
    for col, v in sol.items():
        b, i = divmod(col, n)
        comps[i][monos[b]] = v
    return VectorFieldJet([JetPoly(n, m, c) for c in comps])


def riemannian_extension(omega_p: FormJet, H: SymTensorJet, R: VectorFieldJet) -> SymTensorJet:
    """``hbar = H(P., P.) + omega' (x) omega'`` with ``P = id - R (x) omega'``."""
    n = H.dim
    m = min(omega_p.order, H.order, R.order)
    if m < 1:
        raise OrderError("Riemannian extension needs order >= 3 input (hbar order would be < 1)")
    if not (omega_p.evaluate([R]) - 1).truncate(m).is_zero():
        raise ContactError("omega'(R) != 1")
    w = [c.truncate(m) for c in omega_p.one_form_components()]
    HR = [c.truncate(m) for c in H.contract(R).one_form_components()]
    HRR = H.evaluate(R, R).truncate(m)
    out = {}
    for i in range(n):
        for j in range(i, n):
            e = (H.entry(i, j).truncate(m) - w[i] * HR[j] - w[j] * HR[i]
                 + w[i] * w[j] * HRR + w[i] * w[j])
            out[(i, j)] = e
    return SymTensorJet(n, m, out)


@dataclass(frozen=True)
class ContactPipeline:
    input_order: int
    normalized: NormalizedContactData
    reeb: VectorFieldJet
    hbar: SymTensorJet
    audit: Dict[str, object]

    def to_dict(self) -> dict:
        return {"input_order": self.input_order, "f": self.normalized.f.to_dict(),
                "reeb": self.reeb.to_dict(), "hbar": self.hbar.to_dict("h"), "audit": dict(self.audit)}


def contact_to_riemannian(omega: FormJet, H: SymTensorJet, frame: Sequence[VectorFieldJet],
                          audit_dependencies: bool = False, seed: int = 0) -> ContactPipeline:
    """Run normalize -> reeb -> extend, recording the order of each output.

    With ``audit_dependencies``, also re-run on inputs perturbed above the input
    order (output must not move) and at the input order (top coefficients of
    ``hbar`` should move, showing the loss of two orders is sharp).
    """
    m = min([omega.order, H.order] + [X.order for X in frame])
    if m < 3:
        raise OrderError(f"input order {m} < 3: hbar would have order < 1")
    nd = normalize_contact(omega, H, frame)
    R = reeb_field(nd.omega_prime)
    hbar = riemannian_extension(nd.omega_prime, H, R)
    audit: Dict[str, object] = {"input": m, "f": nd.f.order, "omega_prime": nd.omega_prime.order,
                                "reeb": R.order, "hbar": hbar.order, "loss": m - hbar.order}
    if audit_dependencies:
        rng = random.Random(seed)
        up = [X.truncate(min(X.order, m)) for X in frame]
        hi = _run(_perturb_form(omega.truncate(m), m + 1, rng), _perturb_sym(H.truncate(m), m + 1, rng), up)
        audit["independent_of_higher_input"] = hi.truncate(hbar.order) == hbar
        lo = _run(_perturb_form(omega.truncate(m), m, rng), _perturb_sym(H.truncate(m), m, rng), up)
        audit["depends_on_top_input_degree"] = lo != hbar
    return ContactPipeline(m, nd, R, hbar, audit)


def _run(omega, H, frame) -> SymTensorJet:
    nd = normalize_contact(omega, H, frame)
    return riemannian_extension(nd.omega_prime, H, reeb_field(nd.omega_prime))


def _bump(p: JetPoly, degree: int, rng: random.Random) -> JetPoly:
    """Add random rational terms of exactly ``degree`` (raising the order if needed)."""
    c = dict(p.coeffs)
    for e in monomials(p.dim, degree):
        if sum(e) == degree:
            c[e] = c.get(e, 0) + Fraction(rng.randint(-5, 5), rng.randint(1, 5))
    return JetPoly(p.dim, max(p.order, degree), c)


def _perturb_form(omega: FormJet, degree: int, rng: random.Random) -> FormJet:
    comps = [_bump(c, degree, rng) for c in omega.one_form_components()]
    return FormJet.one_form(comps)


def _perturb_sym(H: SymTensorJet, degree: int, rng: random.Random) -> SymTensorJet:
    n = H.dim
    out = {(i, j): _bump(H.entry(i, j), degree, rng) for i in range(n) for j in range(i, n)}
    return SymTensorJet(n, max(H.order, degree), out)


def _translate_sym(T: SymTensorJet, shift) -> SymTensorJet:
    return SymTensorJet(T.dim, T.order, {k: v.translate(shift) for k, v in T.coeffs.items()})


# ---------------------------------------------------------------- lightlike side

@dataclass(frozen=True)
class ConformalQuotientData:
    """``g = c(q, r) h_q`` in an adapted chart, gauge ``c(q, 0) = 1``."""

    c: JetPoly
    h_q: SymTensorJet  # in the n-1 quotient variables
    genericity_witness: JetPoly  # dc/dr
    g: SymTensorJet = field(repr=False)

    @property
    def generic(self) -> bool:
        return self.genericity_witness.const() != 0

    @property
    def base_dim(self) -> int:
        return self.h_q.dim

    def to_dict(self) -> dict:
        return {"c": self.c.to_dict(), "h_q": self.h_q.to_dict("h"),
                "dc_dr": self.genericity_witness.to_dict(), "generic": self.generic, "order": self.c.order,
                "gauge": "c(q,0) = 1"}


def _drop_last(p: JetPoly, n: int) -> JetPoly:
    """Restrict to r = 0 and view in the first n-1 variables."""
    return JetPoly(n - 1, p.order, {e[:-1]: v for e, v in p.coeffs.items() if e[-1] == 0})


def conformal_quotient(g: SymTensorJet) -> ConformalQuotientData:
    """Factor ``g = c(q, r) h(q)`` in a chart with ``N = d/dr`` (last coordinate)."""
    generalized_conformal_of(g)  # adapted chart + lightlike checks
    n, m = g.dim, g.order
    hq = SymTensorJet(n - 1, m, {k: _drop_last(v, n) for k, v in g.coeffs.items()})
    h_full = SymTensorJet(n, m, {k: v.embed(n, list(range(n - 1))) for k, v in hq.coeffs.items()})
    c = g.entry(0, 0) * h_full.entry(0, 0).reciprocal()
    if not (h_full.scale(c) - g).truncate(m).is_zero():
        raise ClassificationError("g is not of the form c(q, r) h(q): not transversally conformal")
    return ConformalQuotientData(c, hq, c.partial(n - 1), g)


@dataclass(frozen=True)
class IsometricLift:
    phi: MapJet  # (psi, delta - delta0): a germ fixing the center, landing at (0, delta0)
    delta: JetPoly  # full delta, including its constant delta0
    delta0: Fraction
    order: int
    pullback_verified_to: int

    def to_dict(self) -> dict:
        return {"delta": self.delta.to_dict(), "delta0": str(self.delta0), "order": self.order,
                "pullback_verified_to_order": self.pullback_verified_to}


def _rational_roots(coeffs: List[Fraction]) -> List[Fraction]:
    """Rational roots of ``sum coeffs[i] t^i`` (rational root theorem)."""
    while coeffs and not coeffs[-1]:
        coeffs = coeffs[:-1]
    if len(coeffs) <= 1:
        return []
    from math import lcm
    L = 1
    for c in coeffs:
        L = lcm(L, c.denominator)
    ints = [int(c * L) for c in coeffs]
    shift = 0
    while not ints[0]:
        ints, shift = ints[1:], shift + 1
    roots = [Fraction(0)] if shift else []
    if len(ints) == 1:
        return roots

    def divisors(a):
        a = abs(a)
        return [d for d in range(1, a + 1) if a % d == 0]

    for p in divisors(ints[0]):
        for q in divisors(ints[-1]):
            for s in (1, -1):
                t = Fraction(s * p, q)
                if t not in roots and sum(c * t ** i for i, c in enumerate(ints)) == 0:
                    roots.append(t)
    return roots


def isometric_lift(psi: MapJet, f: JetPoly, data: ConformalQuotientData) -> IsometricLift:
    """The lift ``phi(q, r) = (psi(q), delta(q, r))`` with ``c(psi(q), delta) f(q) = c(q, r)``.

    ``psi`` must fix the quotient center and satisfy ``psi^* h = f h``.  Away from
    ``delta0 = 0`` the jets of ``c`` and ``g`` are re-expanded at ``(0, delta0)`` as
    the polynomials they represent.
    """
    nq = data.base_dim
    n = nq + 1
    if psi.source_dim != nq or psi.target_dim != nq:
        raise DomainError(f"psi must act on the {nq}-dimensional quotient")
    if any(psi.base_image):
        raise DomainError("psi must fix the quotient center")
    if not data.generic:
        raise GenericityError("dc/dr vanishes at the center: lift is not unique")
    mc = min(psi.order - 1, data.h_q.order, f.order)
    if mc < 0:
        raise OrderError("psi must be known to order >= 1")
    if not (pullback_tensor(psi, data.h_q) - data.h_q.scale(f)).truncate(mc).is_zero():
        raise DistortionError("psi^* h != f h")
    c = data.c
    m = min(c.order, psi.order, f.order)
    # delta0 from c(0, delta0) f(0) = c(0, 0) = 1
    line = [c.coeff((0,) * nq + (i,)) for i in range(c.order + 1)]
    f0 = f.const()
    poly = [v * f0 for v in line]
    poly[0] -= 1
    roots = sorted(_rational_roots(poly), key=lambda t: (abs(t), t))
    if not roots:
        raise GenericityError("c(0, delta0) f(0) = 1 has no rational solution delta0")
    d0 = roots[0]
    ct = c.translate([0] * nq + [d0]) if d0 else c
    slope = ct.partial(nq).const() * f0
    if not slope:
        raise GenericityError("dc/dr vanishes at (0, delta0)")
    psi_n = [p.embed(n, list(range(nq))) for p in psi.components]
    f_n = f.embed(n, list(range(nq)))
    dt = JetPoly.zero(n, m)
    for _ in range(m + 1):
        F = (ct.compose(psi_n + [dt]) * f_n - c).truncate(m)
        if F.is_zero():
            break
        dt = dt - F.scale(1 / slope)
    F = (ct.compose(psi_n + [dt]) * f_n - c).truncate(m)
    if not F.is_zero():  # pragma: no cover - the iteration gains one degree per step
        raise GenericityError("cocycle iteration did not converge")
    phi = MapJet([p.truncate(m) for p in psi_n] + [dt])
    g_t = _translate_sym(data.g, [0] * nq + [d0]) if d0 else data.g
    pb = pullback_tensor(phi, g_t)
    top = pb.order
    if not (pb - data.g.truncate(top)).is_zero():
        raise DistortionError("lifted map does not pull g back to g")
    delta = dt + JetPoly.constant(n, m, d0)
    return IsometricLift(phi, delta, d0, m, top)
