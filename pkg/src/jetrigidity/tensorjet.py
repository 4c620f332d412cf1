"""Vector fields, differential forms and symmetric 2-tensors with jet coefficients.

Everything is written in the coordinate frame ``d/dx1 .. d/dxn``.  Every
operation that differentiates records the order it loses; nothing is ever
padded with zeros.

Conventions
-----------
* forms store components on strictly increasing index tuples, with
  ``(dx1^dx2)(d/dx1, d/dx2) = 1`` (determinant evaluation);
* symmetric tensors store matrix entries ``T_ij = T_ji``, so the quadratic
  form ``dx dy`` has ``T_12 = 1/2``;
* the symmetric product is ``(a . b)_ij = a_i b_j + a_j b_i``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .jetcore import (
    DimensionError,
    DomainError,
    JetPoly,
    MapJet,
    OrderError,
    jp_compose,
)

Index = Tuple[int, ...]


def perm_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    s = list(seq)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def _scale(p: JetPoly, s) -> JetPoly:
    return p * s if isinstance(s, JetPoly) else p.scale(s)


# ---------------------------------------------------------------- vector fields

class VectorFieldJet:
    """A vector field jet ``sum_k X^k d/dx_k``."""

    __slots__ = ("components", "dim", "order")

    def __init__(self, components: Sequence[JetPoly]):
        comps = tuple(components)
        if not comps:
            raise DimensionError("empty vector field")
        n = comps[0].dim
        if len(comps) != n or any(c.dim != n for c in comps):
            raise DimensionError("vector field needs n components in n variables")
        m = min(c.order for c in comps)
        self.components = tuple(c.truncate(m) for c in comps)
        self.dim = n
        self.order = m

    @classmethod
    def zero(cls, dim: int, order: int) -> "VectorFieldJet":
        return cls([JetPoly.zero(dim, order)] * dim)

    @classmethod
    def coordinate(cls, dim: int, order: int, axis: int, coeff=1) -> "VectorFieldJet":
        comps = [JetPoly.zero(dim, order)] * dim
        comps = list(comps)
        comps[axis] = JetPoly.constant(dim, order, coeff)
        return cls(comps)

    def __getitem__(self, k: int) -> JetPoly:
        return self.components[k]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "VectorFieldJet") -> "VectorFieldJet":
        return VectorFieldJet([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorFieldJet") -> "VectorFieldJet":
        return VectorFieldJet([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorFieldJet([-a for a in self.components])

    def scale(self, s) -> "VectorFieldJet":
        return VectorFieldJet([_scale(a, s) for a in self.components])

    def truncate(self, order: int) -> "VectorFieldJet":
        return VectorFieldJet([a.truncate(order) for a in self.components])

    def at_center(self) -> List[Fraction]:
        return [c.const() for c in self.components]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def agrees_with(self, other: "VectorFieldJet", k: int) -> bool:
        return all(a.agrees_with(b, k) for a, b in zip(self.components, other.components))

    def apply(self, f: JetPoly) -> JetPoly:
        """Directional derivative ``X(f)``; order ``min(X.order, f.order - 1)``."""
        terms = [self.components[k] * f.partial(k) for k in range(self.dim)]
        return _sum(terms)

    def __eq__(self, other):
        return isinstance(other, VectorFieldJet) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"VectorFieldJet(order={self.order}, {list(self.components)})"

    def to_dict(self) -> Dict[str, Dict[str, str]]:
        return {f"d/dx{k + 1}": c.to_dict() for k, c in enumerate(self.components) if not c.is_zero()}

    @classmethod
    def from_dict(cls, data: Mapping, dim: int, order: int) -> "VectorFieldJet":
        comps = [JetPoly.zero(dim, order)] * dim
        comps = list(comps)
        for key, poly in data.items():
            k = _parse_axis(key, ("d/dx", "x"), dim)
            comps[k] = JetPoly.from_dict(poly, dim, order)
        return cls(comps)


def _sum(terms: Iterable[JetPoly]) -> JetPoly:
    terms = list(terms)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def _parse_axis(key: str, prefixes, dim: int) -> int:
    for p in prefixes:
        if key.startswith(p):
            k = int(key[len(p):]) - 1
            if not 0 <= k < dim:
                raise ValueError(f"index in {key!r} out of range")
            return k
    raise ValueError(f"unrecognized key {key!r}")


def lie_bracket(X: VectorFieldJet, Y: VectorFieldJet) -> VectorFieldJet:
    """``[X, Y]^j = X(Y^j) - Y(X^j)``; order ``min(X.order, Y.order) - 1``."""
    if X.dim != Y.dim:
        raise DimensionError("vector fields of different dimensions")
    return VectorFieldJet([X.apply(Y[j]) - Y.apply(X[j]) for j in range(X.dim)])


# ---------------------------------------------------------------- forms

class FormJet:
    """A differential p-form with jet coefficients on increasing index tuples."""

    __slots__ = ("dim", "degree", "order", "coeffs")

    def __init__(self, dim: int, degree: int, order: int, coeffs: Optional[Mapping[Index, JetPoly]] = None):
        if not 0 <= degree:
            raise DimensionError("negative form degree")
        self.dim = dim
        self.degree = degree
        c: Dict[Index, JetPoly] = {}
        m = order
        for idx, p in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(i >= dim or i < 0 for i in idx):
                raise DimensionError(f"bad index {idx} for a {degree}-form in dimension {dim}")
            if p.dim != dim:
                raise DimensionError("coefficient lives in the wrong dimension")
            m = min(m, p.order)
            s = perm_sign(idx)
            if s == 0:
                continue
            key = tuple(sorted(idx))
            c[key] = c[key] + _scale(p, s) if key in c else _scale(p, s)
        self.order = m
        trunc = {k: v.truncate(m) for k, v in c.items()}
        self.coeffs = {k: v for k, v in trunc.items() if not v.is_zero()}

    @classmethod
    def zero(cls, dim: int, degree: int, order: int) -> "FormJet":
        return cls(dim, degree, order, {})

    @classmethod
    def one_form(cls, components: Sequence[JetPoly]) -> "FormJet":
        n = components[0].dim
        return cls(n, 1, min(c.order for c in components), {(i,): c for i, c in enumerate(components)})

    @classmethod
    def function(cls, f: JetPoly) -> "FormJet":
        return cls(f.dim, 0, f.order, {(): f})

    def component(self, idx: Index) -> JetPoly:
        idx = tuple(idx)
        s = perm_sign(idx)
        if s == 0:
            return JetPoly.zero(self.dim, self.order)
        c = self.coeffs.get(tuple(sorted(idx)))
        if c is None:
            return JetPoly.zero(self.dim, self.order)
        return c if s > 0 else -c

    def one_form_components(self) -> List[JetPoly]:
        if self.degree != 1:
            raise DimensionError("not a 1-form")
        return [self.component((i,)) for i in range(self.dim)]

    def _check(self, other: "FormJet"):
        if self.dim != other.dim or self.degree != other.degree:
            raise DimensionError("forms of different dimension or degree")

    def __add__(self, other: "FormJet") -> "FormJet":
        self._check(other)
        m = min(self.order, other.order)
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c[k] + v if k in c else v
        return FormJet(self.dim, self.degree, m, c)

    def __neg__(self):
        return FormJet(self.dim, self.degree, self.order, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "FormJet") -> "FormJet":
        return self + (-other)

    def scale(self, s) -> "FormJet":
        """Multiply by a rational or by a function jet."""
        m = self.order if not isinstance(s, JetPoly) else min(self.order, s.order)
        return FormJet(self.dim, self.degree, m, {k: _scale(v, s) for k, v in self.coeffs.items()})

    def truncate(self, order: int) -> "FormJet":
        if order > self.order:
            raise OrderError(f"cannot raise form order {self.order} to {order}")
        return FormJet(self.dim, self.degree, order, self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def agrees_with(self, other: "FormJet", k: int) -> bool:
        self._check(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.component(i).agrees_with(other.component(i), k) for i in keys)

    def at_center(self) -> Dict[Index, Fraction]:
        return {k: v.const() for k, v in self.coeffs.items() if v.const()}

    def evaluate(self, vectors: Sequence[VectorFieldJet]) -> JetPoly:
        """``alpha(X_1, ..., X_p)`` as a function jet."""
        if len(vectors) != self.degree:
            raise DimensionError(f"a {self.degree}-form eats {self.degree} vectors")
        if self.degree == 0:
            return self.component(())
        total = JetPoly.zero(self.dim, min([self.order] + [v.order for v in vectors]))
        for idx, a in self.coeffs.items():
            mat = [[vectors[j][i] for j in range(self.degree)] for i in idx]
            from .linalg import det
            total = total + a * det(mat)
        return total

    def __eq__(self, other):
        return (isinstance(other, FormJet) and self.dim == other.dim and self.degree == other.degree
                and self.order == other.order and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.dim, self.degree, self.order, frozenset(self.coeffs.items())))

    def __repr__(self):
        return f"FormJet(deg={self.degree}, order={self.order}, {self.to_dict()})"

    def to_dict(self) -> Dict[str, Dict[str, str]]:
        out = {}
        for idx in sorted(self.coeffs):
            key = "^".join(f"dx{i + 1}" for i in idx) if idx else "1"
            out[key] = self.coeffs[idx].to_dict()
        return out

    @classmethod
    def from_dict(cls, data: Mapping, dim: int, order: int, degree: Optional[int] = None) -> "FormJet":
        coeffs: Dict[Index, JetPoly] = {}
        deg = degree
        for key, poly in data.items():
            if key.strip() == "1":
                idx: Index = ()
            else:
                idx = tuple(_parse_axis(tok.strip(), ("dx",), dim) for tok in key.split("^"))
            if deg is None:
                deg = len(idx)
            elif len(idx) != deg:
                raise ValueError(f"mixed form degrees in {sorted(data)}")
            p = JetPoly.from_dict(poly, dim, order)
            coeffs[idx] = coeffs[idx] + p if idx in coeffs else p
        return cls(dim, deg if deg is not None else 1, order, coeffs)


def exterior_derivative(alpha: FormJet) -> FormJet:
    """``d alpha``: degree p+1, order drops by one."""
    if alpha.order < 1:
        raise OrderError("exterior derivative needs a form of order >= 1")
    n = alpha.dim
    out: Dict[Index, JetPoly] = {}
    for idx, a in alpha.coeffs.items():
        for k in range(n):
            if k in idx:
                continue
            s = perm_sign((k,) + idx)
            key = tuple(sorted((k,) + idx))
            term = a.partial(k)
            term = term if s > 0 else -term
            out[key] = out[key] + term if key in out else term
    return FormJet(n, alpha.degree + 1, alpha.order - 1, out)


def wedge(alpha: FormJet, beta: FormJet) -> FormJet:
    if alpha.dim != beta.dim:
        raise DimensionError("wedge of forms in different dimensions")
    n = alpha.dim
    deg = alpha.degree + beta.degree
    m = min(alpha.order, beta.order)
    if deg > n:
        return FormJet.zero(n, deg, m)
    out: Dict[Index, JetPoly] = {}
    for I, a in alpha.coeffs.items():
        for J, b in beta.coeffs.items():
            s = perm_sign(I + J)
            if not s:
                continue
            key = tuple(sorted(I + J))
            term = a * b
            term = term if s > 0 else -term
            out[key] = out[key] + term if key in out else term
    return FormJet(n, deg, m, out)


def wedge_power(alpha: FormJet, d: int) -> FormJet:
    if d < 1:
        raise ValueError("wedge power needs d >= 1")
    out = alpha
    for _ in range(d - 1):
        out = wedge(out, alpha)
    return out


def interior_product(X: VectorFieldJet, alpha: FormJet) -> FormJet:
    """Contraction in the first slot."""
    if alpha.degree == 0:
        raise DimensionError("cannot contract a 0-form")
    if X.dim != alpha.dim:
        raise DimensionError("vector field and form in different dimensions")
    n = alpha.dim
    m = min(X.order, alpha.order)
    out: Dict[Index, JetPoly] = {}
    for idx, a in alpha.coeffs.items():
        for pos, i in enumerate(idx):
            rest = idx[:pos] + idx[pos + 1:]
            term = X[i] * a
            if pos % 2:
                term = -term
            out[rest] = out[rest] + term if rest in out else term
    return FormJet(n, alpha.degree - 1, m, out)


# ---------------------------------------------------------------- symmetric tensors

class SymTensorJet:
    """Symmetric covariant 2-tensor, stored as matrix entries on pairs ``i <= j``."""

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs: Optional[Mapping[Tuple[int, int], JetPoly]] = None):
        self.dim = dim
        m = order
        c: Dict[Tuple[int, int], JetPoly] = {}
        for (i, j), p in (coeffs or {}).items():
            if not (0 <= i < dim and 0 <= j < dim):
                raise DimensionError(f"index ({i}, {j}) out of range")
            if p.dim != dim:
                raise DimensionError("coefficient lives in the wrong dimension")
            key = (min(i, j), max(i, j))
            if key in c:
                raise ValueError(f"entry {key} given twice")
            m = min(m, p.order)
            c[key] = p
        self.order = m
        trunc = {k: v.truncate(m) for k, v in c.items()}
        self.coeffs = {k: v for k, v in trunc.items() if not v.is_zero()}

    @classmethod
    def from_matrix(cls, M: Sequence[Sequence[JetPoly]]) -> "SymTensorJet":
        n = len(M)
        for i in range(n):
            for j in range(i + 1, n):
                if M[i][j] != M[j][i]:
                    raise ValueError("matrix is not symmetric")
        return cls(n, min(p.order for row in M for p in row), {(i, j): M[i][j] for i in range(n) for j in range(i, n)})

    @classmethod
    def diagonal(cls, entries: Sequence[JetPoly]) -> "SymTensorJet":
        n = entries[0].dim
        return cls(n, min(e.order for e in entries), {(i, i): e for i, e in enumerate(entries)})

    @classmethod
    def zero(cls, dim: int, order: int) -> "SymTensorJet":
        return cls(dim, order, {})

    def entry(self, i: int, j: int) -> JetPoly:
        c = self.coeffs.get((min(i, j), max(i, j)))
        return c if c is not None else JetPoly.zero(self.dim, self.order)

    def matrix(self) -> List[List[JetPoly]]:
        return [[self.entry(i, j) for j in range(self.dim)] for i in range(self.dim)]

    def const_matrix(self) -> List[List[Fraction]]:
        return [[self.entry(i, j).const() for j in range(self.dim)] for i in range(self.dim)]

    def _check(self, other):
        if self.dim != other.dim:
            raise DimensionError("tensors of different dimension")

    def __add__(self, other: "SymTensorJet") -> "SymTensorJet":
        self._check(other)
        m = min(self.order, other.order)
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c[k] + v if k in c else v
        return SymTensorJet(self.dim, m, c)

    def __neg__(self):
        return SymTensorJet(self.dim, self.order, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "SymTensorJet") -> "SymTensorJet":
        return self + (-other)

    def scale(self, s) -> "SymTensorJet":
        m = self.order if not isinstance(s, JetPoly) else min(self.order, s.order)
        return SymTensorJet(self.dim, m, {k: _scale(v, s) for k, v in self.coeffs.items()})

    def truncate(self, order: int) -> "SymTensorJet":
        if order > self.order:
            raise OrderError(f"cannot raise tensor order {self.order} to {order}")
        return SymTensorJet(self.dim, order, self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def agrees_with(self, other: "SymTensorJet", k: int) -> bool:
        self._check(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.entry(*key).agrees_with(other.entry(*key), k) for key in keys)

    def evaluate(self, X: VectorFieldJet, Y: VectorFieldJet) -> JetPoly:
        terms = []
        for (i, j), t in self.coeffs.items():
            terms.append(t * X[i] * Y[j])
            if i != j:
                terms.append(t * X[j] * Y[i])
        if not terms:
            return JetPoly.zero(self.dim, min(self.order, X.order, Y.order))
        return _sum(terms)

    def contract(self, X: VectorFieldJet) -> FormJet:
        """The 1-form ``T(X, .)``."""
        n = self.dim
        comps = []
        for j in range(n):
            comps.append(_sum([self.entry(i, j) * X[i] for i in range(n)]))
        return FormJet.one_form(comps)

    def __eq__(self, other):
        return (isinstance(other, SymTensorJet) and self.dim == other.dim
                and self.order == other.order and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.dim, self.order, frozenset(self.coeffs.items())))

    def __repr__(self):
        return f"SymTensorJet(order={self.order}, {self.to_dict()})"

    def to_dict(self, prefix: str = "g") -> Dict[str, Dict[str, str]]:
        sep = "" if self.dim <= 9 else ","
        return {f"{prefix}_{i + 1}{sep}{j + 1}": self.coeffs[(i, j)].to_dict() for (i, j) in sorted(self.coeffs)}

    @classmethod
    def from_dict(cls, data: Mapping, dim: int, order: int) -> "SymTensorJet":
        c: Dict[Tuple[int, int], JetPoly] = {}
        for key, poly in data.items():
            _, _, idx = key.partition("_")
            if "," in idx:
                a, b = idx.split(",")
            elif len(idx) == 2:
                a, b = idx[0], idx[1]
            else:
                raise ValueError(f"bad tensor key {key!r}")
            i, j = int(a) - 1, int(b) - 1
            c[(i, j)] = JetPoly.from_dict(poly, dim, order)
        return cls(dim, order, c)


def sym_product(a: FormJet, b: FormJet) -> SymTensorJet:
    """``(a . b)_ij = a_i b_j + a_j b_i`` for 1-forms."""
    ac, bc = a.one_form_components(), b.one_form_components()
    n = a.dim
    return SymTensorJet(n, min(a.order, b.order),
                        {(i, j): ac[i] * bc[j] + ac[j] * bc[i] for i in range(n) for j in range(i, n)})


def tensor_square(a: FormJet) -> SymTensorJet:
    """``a (x) a`` with entries ``a_i a_j``."""
    ac = a.one_form_components()
    n = a.dim
    return SymTensorJet(n, a.order, {(i, j): ac[i] * ac[j] for i in range(n) for j in range(i, n)})


def from_quadratic_form(dim: int, order: int, terms: Mapping[Tuple[int, int], object]) -> SymTensorJet:
    """Build ``sum c_ij dx_i dx_j`` (as a quadratic form) from ``{(i, j): c}``."""
    c: Dict[Tuple[int, int], JetPoly] = {}
    for (i, j), v in terms.items():
        p = v if isinstance(v, JetPoly) else JetPoly.constant(dim, order, v)
        key = (min(i, j), max(i, j))
        if i != j:
            p = p.scale(Fraction(1, 2))
        c[key] = c[key] + p if key in c else p
    return SymTensorJet(dim, order, c)


# ---------------------------------------------------------------- pullback and Lie derivative

Tensor = Union[SymTensorJet, FormJet]


def _composed(f: MapJet, p: JetPoly) -> JetPoly:
    return jp_compose(p, f.components)


def pullback_tensor(f: MapJet, T: Tensor) -> Tensor:
    """``f^* T``; output order ``min(f.order - 1, T.order)`` (0-forms: ``min(f.order, T.order)``)."""
    if f.target_dim != T.dim:
        raise DimensionError(f"map lands in dimension {f.target_dim}, tensor lives in {T.dim}")
    if any(f.base_image):
        raise DomainError("pullback needs a map fixing the chart center; translate first")
    if isinstance(T, FormJet) and T.degree == 0:
        return FormJet.function(_composed(f, T.component(())))
    if f.order < 1:
        raise OrderError("pullback consumes one derivative of the map; map order must be >= 1")
    n = f.source_dim
    jac = f.jacobian()  # jac[k][i] = d f^k / d x_i
    if isinstance(T, SymTensorJet):
        out: Dict[Tuple[int, int], JetPoly] = {}
        comp = {key: _composed(f, v) for key, v in T.coeffs.items()}
        for i in range(n):
            for j in range(i, n):
                terms = []
                for (k, l), t in comp.items():
                    terms.append(t * jac[k][i] * jac[l][j])
                    if k != l:
                        terms.append(t * jac[l][i] * jac[k][j])
                if terms:
                    out[(i, j)] = _sum(terms)
        m = min(f.order - 1, T.order)
        return SymTensorJet(n, m, {k: v.truncate(m) for k, v in out.items()})
    # p-form: sum_I (a_I o f) df^{i1} ^ ... ^ df^{ip}
    dfs = [FormJet.one_form(jac[k]) for k in range(f.target_dim)]
    m = min(f.order - 1, T.order)
    total = FormJet.zero(n, T.degree, m)
    for idx, a in T.coeffs.items():
        piece = FormJet.function(_composed(f, a))
        for k in idx:
            piece = wedge(piece, dfs[k])
        total = total + piece.truncate(min(piece.order, m))
    return total.truncate(m) if total.order > m else total


def lie_derivative(X: VectorFieldJet, T: Tensor) -> Tensor:
    """Coordinate formula for ``L_X T``; output order ``min(X.order, T.order) - 1``."""
    if X.dim != T.dim:
        raise DimensionError("vector field and tensor in different dimensions")
    if min(X.order, T.order) < 1:
        raise OrderError("Lie derivative needs orders >= 1")
    n = X.dim
    m = min(X.order, T.order) - 1
    dX = [[X[k].partial(i) for i in range(n)] for k in range(n)]  # dX[k][i] = d_i X^k
    if isinstance(T, SymTensorJet):
        out: Dict[Tuple[int, int], JetPoly] = {}
        for i in range(n):
            for j in range(i, n):
                terms = [X.apply(T.entry(i, j))]
                for k in range(n):
                    gkj, gik = T.entry(k, j), T.entry(i, k)
                    if not gkj.is_zero() and not dX[k][i].is_zero():
                        terms.append(gkj * dX[k][i])
                    if not gik.is_zero() and not dX[k][j].is_zero():
                        terms.append(gik * dX[k][j])
                out[(i, j)] = _sum(terms).truncate(m)
        return SymTensorJet(n, m, out)
    if T.degree == 0:
        return FormJet.function(X.apply(T.component(())).truncate(m))
    out_f: Dict[Index, JetPoly] = {}
    for idx, a in T.coeffs.items():
        key = idx
        term = X.apply(a)
        out_f[key] = out_f[key] + term if key in out_f else term
        for pos, i in enumerate(idx):
            for k in range(n):
                if dX[i][k].is_zero():
                    continue
                new = idx[:pos] + (k,) + idx[pos + 1:]
                s = perm_sign(new)
                if not s:
                    continue
                nk = tuple(sorted(new))
                t = a * dX[i][k]
                t = t if s > 0 else -t
                out_f[nk] = out_f[nk] + t if nk in out_f else t
    return FormJet(n, T.degree, m, {k: v.truncate(m) for k, v in out_f.items()})
