"""Isometry jets, Killing jets and sub-rigidity verdicts.

Linearization convention
------------------------
A Killing K-jet is a vector field jet ``V`` of order ``K`` whose linearized
isometry equations hold to order ``K - 1`` (one derivative is consumed):

* riemannian / lightlike: ``L_V g = 0``;
* subriemannian: ``L_V omega = lam * omega`` and ``L_V H = omega . beta`` for some
  function jet ``lam`` and 1-form jet ``beta`` (auxiliary unknowns, projected out);
* framing: ``[V, X_i] = 0`` for every field of the frame.

This is the infinitesimal counterpart of ``Iso^K``: K-jets of diffeomorphisms
preserving the structure up to order ``K - 1``.  Prolonged spaces (``depth > 0``)
are the k-jets of Killing (k + depth)-jets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .jetcore import (
    DomainError,
    Exps,
    JetPoly,
    MapJet,
    OrderError,
    count_monomials,
    format_monomial,
    monomials,
)
from .structures import GeometricStructure
from .tensorjet import (
    FormJet,
    SymTensorJet,
    VectorFieldJet,
    lie_bracket,
    lie_derivative,
    pullback_tensor,
    sym_product,
)

LINEARIZATION = (
    "Killing K-jets: order-K vector field jets with linearized isometry equations "
    "holding to order K-1; sub-Riemannian gauge (lam*omega, omega.beta) adjoined as auxiliary unknowns"
)


# ---------------------------------------------------------------- system assembly

def _shift(acc: dict, poly: Dict[Exps, Fraction], exps: Exps, coef, maxdeg: int, rowkey, col: int):
    """Add ``coef * x^exps * poly`` (truncated at maxdeg) into column ``col`` of ``acc``."""
    d0 = sum(exps)
    for e, v in poly.items():
        if d0 + sum(e) > maxdeg:
            continue
        ne = tuple(a + b for a, b in zip(e, exps))
        key = (rowkey, ne)
        row = acc.setdefault(key, {})
        nv = row.get(col, 0) + coef * v
        if nv:
            row[col] = nv
        else:
            row.pop(col, None)


def _lower(exps: Exps, i: int) -> Tuple[int, Optional[Exps]]:
    p = exps[i]
    if not p:
        return 0, None
    return p, exps[:i] + (p - 1,) + exps[i + 1:]


@dataclass
class _System:
    n: int
    K: int
    monos: Tuple[Exps, ...]
    n_v: int  # number of vector field columns
    ncols: int
    rows: List[Dict[int, Fraction]]

    def v_col(self, mono_index: int, comp: int) -> int:
        return mono_index * self.n + comp


def _metric_equations(g: SymTensorJet, K: int, acc: dict, vcols):
    n = g.dim
    top = K - 1
    G = {(i, j): g.entry(i, j).truncate(top).coeffs for i in range(n) for j in range(n)}
    dG = {(c, i, j): g.entry(i, j).partial(c).truncate(top).coeffs
          for c in range(n) for i in range(n) for j in range(i, n)}
    for (e, c), col in vcols:
        for i in range(n):
            for j in range(i, n):
                _shift(acc, dG[(c, i, j)], e, 1, top, ("L", i, j), col)
                # g_cj d_i V^c + g_ic d_j V^c
                p, le = _lower(e, i)
                if p:
                    _shift(acc, G[(c, j)], le, p, top, ("L", i, j), col)
                p, le = _lower(e, j)
                if p:
                    _shift(acc, G[(i, c)], le, p, top, ("L", i, j), col)


def _subriemannian_equations(omega: FormJet, H: SymTensorJet, K: int, acc: dict, vcols, aux_start: int):
    n = omega.dim
    top = K - 1
    w = [c.truncate(top).coeffs for c in omega.one_form_components()]
    dw = {(c, i): omega.component((i,)).partial(c).truncate(top).coeffs for c in range(n) for i in range(n)}
    _metric_equations(H, K, acc, vcols)
    for (e, c), col in vcols:
        for i in range(n):
            # (L_V w)_i = V^c d_c w_i + w_c d_i V^c
            _shift(acc, dw[(c, i)], e, 1, top, ("W", i), col)
            p, le = _lower(e, i)
            if p:
                _shift(acc, w[c], le, p, top, ("W", i), col)
    aux = monomials(n, K - 1)
    col = aux_start
    # lam: -lam * w_i
    for e in aux:
        for i in range(n):
            _shift(acc, w[i], e, -1, top, ("W", i), col)
        col += 1
    # beta = x^e dx_a: -(w_i b_j + w_j b_i)
    for e in aux:
        for a in range(n):
            for i in range(n):
                for j in range(i, n):
                    if j == a:
                        _shift(acc, w[i], e, -1, top, ("L", i, j), col)
                    if i == a:
                        _shift(acc, w[j], e, -1, top, ("L", i, j), col)
            col += 1
    return col


def _framing_equations(frame: Sequence[VectorFieldJet], K: int, acc: dict, vcols):
    n = frame[0].dim
    top = K - 1
    for l, X in enumerate(frame):
        Xc = [X[j].truncate(top).coeffs for j in range(n)]
        dX = {(c, j): X[j].partial(c).truncate(top).coeffs for c in range(n) for j in range(n)}
        for (e, c), col in vcols:
            for j in range(n):
                # [V, X]^j = V^c d_c X^j - X^k d_k V^j
                _shift(acc, dX[(c, j)], e, 1, top, ("F", l, j), col)
            for k in range(n):
                p, le = _lower(e, k)
                if p:
                    _shift(acc, Xc[k], le, -p, top, ("F", l, c), col)


@lru_cache(maxsize=128)
def _build_system(sigma: GeometricStructure, K: int) -> _System:
    if K < 1:
        raise OrderError("Killing jets need order >= 1")
    if sigma.order < K:
        raise OrderError(f"structure known to order {sigma.order}; order-{K} Killing jets need order >= {K}")
    n = sigma.dim
    monos = monomials(n, K)
    vcols = [((e, c), b * n + c) for b, e in enumerate(monos) for c in range(n)]
    n_v = len(vcols)
    acc: dict = {}
    ncols = n_v
    if sigma.kind in ("riemannian", "lightlike"):
        _metric_equations(sigma.g, K, acc, vcols)
    elif sigma.kind == "subriemannian":
        ncols = _subriemannian_equations(sigma.omega, sigma.H, K, acc, vcols, n_v)
    elif sigma.kind == "framing":
        _framing_equations(sigma.frame, K, acc, vcols)
    else:  # pragma: no cover - guarded by the structure constructors
        raise DomainError(f"unknown kind {sigma.kind}")
    rows = [r for _, r in sorted(acc.items(), key=lambda kv: repr(kv[0])) if r]
    return _System(n, K, monos, n_v, ncols, rows)


@lru_cache(maxsize=128)
def _solution_basis(sigma: GeometricStructure, K: int) -> Tuple[Tuple[Tuple[int, Fraction], ...], ...]:
    """RREF basis of the V-projection of the order-K solution space."""
    sysm = _build_system(sigma, K)
    null = linalg.nullspace(sysm.rows, sysm.ncols)
    proj = [{c: v for c, v in vec.items() if c < sysm.n_v} for vec in null]
    basis = linalg.canonical_basis([p for p in proj if p])
    return tuple(tuple(sorted(b.items())) for b in basis)


def _vec_to_field(vec: Dict[int, Fraction], n: int, order: int, monos) -> VectorFieldJet:
    comps: List[Dict[Exps, Fraction]] = [dict() for _ in range(n)]
    for col, v in vec.items():
        b, c = divmod(col, n)
        comps[c][monos[b]] = v
    return VectorFieldJet([JetPoly(n, order, comps[c]) for c in range(n)])


def _field_to_vec(V: VectorFieldJet, order: int) -> Dict[int, Fraction]:
    n = V.dim
    index = {e: b for b, e in enumerate(monomials(n, order))}
    vec = {}
    for c in range(n):
        for e, v in V[c].coeffs.items():
            if sum(e) <= order:
                vec[index[e] * n + c] = v
    return vec


# ---------------------------------------------------------------- Killing jet spaces

@dataclass(frozen=True)
class KillingJetSpace:
    structure: GeometricStructure = field(repr=False)
    k: int
    depth: int
    dim: int
    basis: Tuple[VectorFieldJet, ...] = field(repr=False)
    filtered_dims: Dict[int, int]
    pivots: Tuple[int, ...] = field(repr=False)

    def contains(self, V: VectorFieldJet) -> bool:
        vec = _field_to_vec(V.truncate(self.k), self.k)
        rows = [_field_to_vec(B, self.k) for B in self.basis]
        return linalg.in_span(rows, vec)

    def to_dict(self, with_basis: bool = False) -> dict:
        d = {"k": self.k, "depth": self.depth, "dim": self.dim,
             "filtered_dims": {str(j): v for j, v in sorted(self.filtered_dims.items())}}
        if with_basis:
            d["basis"] = [B.to_dict() for B in self.basis]
        return d


def _prefix(n: int, j: int) -> int:
    """Number of V-columns of degree <= j."""
    return count_monomials(n, j) * n if j >= 0 else 0


def killing_jets(sigma: GeometricStructure, k: int, depth: int = 0) -> KillingJetSpace:
    """Killing k-jets at the center; with ``depth > 0``, the k-jets of Killing (k+depth)-jets."""
    if k < 1:
        raise OrderError("k must be >= 1")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    K = k + depth
    n = sigma.dim
    raw = _solution_basis(sigma, K)
    cut = _prefix(n, k)
    projected = [{c: v for c, v in vec if c < cut} for vec in raw]
    basis_rows = linalg.canonical_basis([p for p in projected if p])
    pivots = tuple(min(r) for r in basis_rows)
    monos = monomials(n, k)
    basis = tuple(_vec_to_field(r, n, k, monos) for r in basis_rows)
    filtered = {j: sum(1 for p in pivots if p >= _prefix(n, j)) for j in range(0, k + 1)}
    return KillingJetSpace(sigma, k, depth, len(basis_rows), basis, filtered, pivots)


def is_killing(sigma: GeometricStructure, V: VectorFieldJet, K: Optional[int] = None) -> bool:
    """Independent membership check through the tensor calculus (not the assembled system)."""
    K = V.order if K is None else K
    V = V.truncate(K)
    top = K - 1
    if sigma.kind in ("riemannian", "lightlike"):
        return lie_derivative(V, sigma.g.truncate(K)).truncate(top).is_zero()
    if sigma.kind == "framing":
        return all(lie_bracket(V, X.truncate(K)).truncate(top).is_zero() for X in sigma.frame)
    # sub-Riemannian: need lam, beta with L_V w = lam w and L_V H = w . beta to order top
    omega, H = sigma.omega.truncate(K), sigma.H.truncate(K)
    LW = lie_derivative(V, omega).truncate(top)
    LH = lie_derivative(V, H).truncate(top)
    return _gauge_solvable(omega, LW, LH, top, sigma.dim)


def _gauge_solvable(omega: FormJet, target_w: FormJet, target_h: SymTensorJet, top: int, n: int,
                    base_h: Optional[SymTensorJet] = None) -> bool:
    """Is there (u, beta) with ``target_w = u omega`` and ``target_h - base_h = omega . beta`` to order top?"""
    monos = monomials(n, top)
    w = [c.truncate(top) for c in omega.one_form_components()]
    rows: Dict[tuple, Dict[int, Fraction]] = {}
    col = 0
    for e in monos:
        x = JetPoly.monomial(n, top, e)
        for i in range(n):
            for eo, v in (w[i] * x).coeffs.items():
                rows.setdefault(("W", i, eo), {})[col] = v
        col += 1
    for e in monos:
        x = JetPoly.monomial(n, top, e)
        for a in range(n):
            beta = FormJet.one_form([x if b == a else JetPoly.zero(n, top) for b in range(n)])
            for (i, j), p in sym_product(FormJet.one_form(w), beta).coeffs.items():
                for eo, v in p.coeffs.items():
                    rows.setdefault(("H", i, j, eo), {})[col] = v
            col += 1
    rhs: Dict[tuple, Fraction] = {}
    for i, c in enumerate(target_w.one_form_components()):
        for eo, v in c.truncate(top).coeffs.items():
            rhs[("W", i, eo)] = v
    th = target_h if base_h is None else target_h - base_h
    for (i, j), p in th.coeffs.items():
        for eo, v in p.truncate(top).coeffs.items():
            rhs[("H", i, j, eo)] = v
    keys = sorted(set(rows) | set(rhs), key=repr)
    sol = linalg.solve([rows.get(k, {}) for k in keys], [rhs.get(k, Fraction(0)) for k in keys], col)
    return sol is not None


# ---------------------------------------------------------------- sub-rigidity

@dataclass(frozen=True)
class SubRigidityVerdict:
    ks: int
    k: int
    holds: bool
    witness: Optional[VectorFieldJet]
    dims_audit: Dict[str, int]

    def to_dict(self, with_witness: bool = True) -> dict:
        d = {"ks": self.ks, "k": self.k, "holds": self.holds, "dims_audit": dict(self.dims_audit)}
        if with_witness:
            d["witness"] = None if self.witness is None else self.witness.to_dict()
        return d


def subrigidity_infinitesimal(sigma: GeometricStructure, ks: int, k: int) -> SubRigidityVerdict:
    """Does every Killing ks-jet with vanishing k-jet also have vanishing (k+1)-jet?"""
    if ks <= k:
        raise ValueError("sub-rigidity needs ks > k")
    if k < 0:
        raise ValueError("k must be >= 0")
    if sigma.order < ks:
        raise OrderError(f"structure known to order {sigma.order}; ({ks},{k})-sub-rigidity needs order >= {ks}")
    space = killing_jets(sigma, ks)
    n = sigma.dim
    lo, hi = _prefix(n, k), _prefix(n, k + 1)
    in_wk = [i for i, p in enumerate(space.pivots) if p >= lo]
    offenders = [i for i in in_wk if space.pivots[i] < hi]
    witness = space.basis[offenders[0]] if offenders else None
    audit = {
        "killing_dim": space.dim,
        f"vanishing_{k}_jet": len(in_wk),
        f"vanishing_{k + 1}_jet": len(in_wk) - len(offenders),
    }
    return SubRigidityVerdict(ks, k, not offenders, witness, audit)


# ---------------------------------------------------------------- dimension tables

@dataclass(frozen=True)
class IsoJetDims:
    depth: int
    dims: Dict[int, int]
    filtered: Dict[int, Dict[int, int]]

    @property
    def trend(self) -> str:
        ks = sorted(self.dims)
        if len(ks) < 2:
            return "undetermined"
        return "stabilizing" if self.dims[ks[-1]] == self.dims[ks[-2]] else "growing"

    def to_dict(self) -> dict:
        return {"depth": self.depth, "dims": {str(k): v for k, v in sorted(self.dims.items())},
                "filtered": {str(k): {str(j): v for j, v in sorted(f.items())} for k, f in sorted(self.filtered.items())},
                "trend": self.trend}


DEFAULT_DEPTH = 4


def iso_jet_dims(sigma: GeometricStructure, kmax: int, depth: int = DEFAULT_DEPTH) -> IsoJetDims:
    """Dimensions of the (prolonged) Killing-jet spaces for k = 1..kmax."""
    if sigma.order < kmax + depth:
        raise OrderError(f"structure known to order {sigma.order}; need {kmax + depth}")
    dims, filt = {}, {}
    for k in range(1, kmax + 1):
        sp = killing_jets(sigma, k, depth)
        dims[k] = sp.dim
        filt[k] = dict(sp.filtered_dims)
    return IsoJetDims(depth, dims, filt)


# ---------------------------------------------------------------- map-level checks

@dataclass(frozen=True)
class IsometryJetCheck:
    map: MapJet = field(repr=False)
    k: int
    verdict: bool
    # defect: smallest j with f not in Iso^j, i.e. (first order where f^*sigma deviates) + 1,
    # so that verdict == (defect > k); None when no deviation up to ``checked_to - 1``
    defect: Optional[int]
    component: Optional[str]
    checked_to: int

    def to_dict(self) -> dict:
        return {"k": self.k, "verdict": self.verdict, "defect": self.defect,
                "first_deviation_order": None if self.defect is None else self.defect - 1,
                "component": self.component, "checked_to_order": self.checked_to}


def _first_deviation_tensor(a: SymTensorJet, b: SymTensorJet, label: str, top: int):
    diff = (a - b)
    best = None
    for (i, j), p in sorted(diff.coeffs.items()):
        for e, v in p.items():
            d = sum(e)
            if d <= top and (best is None or d < best[0]):
                best = (d, f"{label}_{i + 1}{j + 1} [{format_monomial(e)}]")
            break
    return best


def check_map_isometry_jet(f: MapJet, sigma: GeometricStructure, k: int) -> IsometryJetCheck:
    """Is ``f`` in ``Iso^k``, i.e. does ``f^* sigma`` agree with ``sigma`` to order ``k - 1``?

    Sub-Riemannian agreement is modulo the gauge ``(u omega, H + omega . beta)``.
    """
    if f.source_dim != sigma.dim or f.target_dim != sigma.dim:
        raise DomainError("map and structure dimensions differ")
    if any(f.base_image):
        raise DomainError("map must fix the center")
    if k < 1:
        raise ValueError("k must be >= 1")
    if f.order < k:
        raise OrderError(f"Iso^{k} membership needs the {k}-jet of the map (have order {f.order})")
    avail = min(f.order - 1, sigma.order)
    if avail < k - 1:
        raise OrderError(f"structure known to order {sigma.order}; need {k - 1}")
    n = sigma.dim
    dev: Optional[Tuple[int, str]] = None
    if sigma.kind in ("riemannian", "lightlike"):
        dev = _first_deviation_tensor(pullback_tensor(f, sigma.g), sigma.g.truncate(avail), "g", avail)
    elif sigma.kind == "framing":
        jac = f.jacobian()
        for l, X in enumerate(sigma.frame):
            for j in range(n):
                pushed = sum((jac[j][c] * X[c] for c in range(n)), JetPoly.zero(n, avail))
                comp = X[j].compose(f.components)
                diff = (pushed - comp).truncate(min(avail, pushed.order, comp.order))
                low = diff.lowest_degree()
                if low is not None and (dev is None or low < dev[0]):
                    e = next(e for e, _ in diff.items() if sum(e) == low)
                    dev = (low, f"X{l + 1}^{j + 1} [{format_monomial(e)}]")
    else:
        fw = pullback_tensor(f, sigma.omega)
        fH = pullback_tensor(f, sigma.H)
        for t in range(0, avail + 1):
            if not _gauge_solvable(sigma.omega.truncate(max(t, 0)) if t else sigma.omega.truncate(0),
                                   fw.truncate(t), fH.truncate(t), t, n, base_h=sigma.H.truncate(t)):
                dev = (t, "omega/H modulo gauge")
                break
    if dev is None:
        return IsometryJetCheck(f, k, True, None, None, avail + 1)
    t, comp = dev
    defect = t + 1
    return IsometryJetCheck(f, k, defect > k, defect, comp, avail + 1)


def max_isometry_order(f: MapJet, sigma: GeometricStructure) -> Optional[int]:
    """Largest j with f in Iso^j (None if f passes at every checkable order)."""
    chk = check_map_isometry_jet(f, sigma, 1)
    return None if chk.defect is None else chk.defect - 1


def map_to_killing_leading_part(f: MapJet) -> VectorFieldJet:
    """``f - id`` as a vector field jet (the first-order perturbation it represents)."""
    n = f.source_dim
    ident = MapJet.identity(n, f.order)
    return VectorFieldJet([a - b for a, b in zip(f.components, ident.components)])
