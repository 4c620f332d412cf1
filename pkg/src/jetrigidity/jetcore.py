"""Truncated multivariate Taylor polynomials over the rationals, and map jets.

Every jet is centered at the origin of its chart.  Coefficients are
:class:`fractions.Fraction`; nothing in here ever rounds.

Monomials are exponent tuples.  The canonical monomial order is graded
lexicographic with ``x1 > x2 > ... > xn``; it is used for serialization and
for the column order of every linear system built on top of this module.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

Exps = Tuple[int, ...]

DEFAULT_MAX_ORDER = 6


class JetError(ValueError):
    """Base class for structural errors raised by the jet engine."""


class DimensionError(JetError):
    pass


class OrderError(JetError):
    """Raised when an operation would need more jet order than is available."""


class DomainError(JetError):
    pass


class InvertibilityError(JetError):
    pass


def as_scalar(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.  Floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"exact scalar expected, got {type(value).__name__}")


def rational_root(value: Fraction, n: int) -> Optional[Fraction]:
    """Exact n-th root of a rational, or None when it is irrational."""
    value = Fraction(value)
    if n == 1:
        return value
    if value < 0:
        if n % 2 == 0:
            return None
        r = rational_root(-value, n)
        return None if r is None else -r

    def iroot(a: int) -> Optional[int]:
        lo, hi = 0, 1 << (a.bit_length() // n + 1)
        while lo < hi:
            mid = (lo + hi) // 2
            if mid**n < a:
                lo = mid + 1
            else:
                hi = mid
        return lo if lo**n == a else None

    num, den = iroot(value.numerator), iroot(value.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


# ---------------------------------------------------------------- monomials

def monomial_key(exps: Exps):
    """Sort key realizing graded-lex order with x1 > x2 > ... ."""
    return (sum(exps), tuple(-e for e in exps))


@lru_cache(maxsize=None)
def monomials(dim: int, order: int) -> Tuple[Exps, ...]:
    """All exponent tuples of total degree <= order, in canonical order."""
    out = []
    for deg in range(order + 1):
        out.extend(monomials_of_degree(dim, deg))
    return tuple(out)


@lru_cache(maxsize=None)
def monomials_of_degree(dim: int, deg: int) -> Tuple[Exps, ...]:
    if dim == 0:
        return ((),) if deg == 0 else ()
    res = []
    for first in range(deg, -1, -1):
        for rest in monomials_of_degree(dim - 1, deg - first):
            res.append((first,) + rest)
    return tuple(res)


def count_monomials(dim: int, order: int) -> int:
    return math.comb(dim + order, order)


def unit_exps(dim: int, axis: int) -> Exps:
    return tuple(1 if i == axis else 0 for i in range(dim))


def format_monomial(exps: Exps) -> str:
    parts = []
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(f"x{i + 1}")
        elif e > 1:
            parts.append(f"x{i + 1}^{e}")
    return " ".join(parts) if parts else "1"


def parse_monomial(text: str, dim: int) -> Exps:
    """Inverse of :func:`format_monomial`; accepts ``*`` as a separator too."""
    exps = [0] * dim
    text = text.strip()
    if text in ("1", ""):
        return tuple(exps)
    for tok in text.replace("*", " ").split():
        if not tok.startswith("x"):
            raise ValueError(f"bad monomial token {tok!r}")
        var, _, power = tok[1:].partition("^")
        idx = int(var) - 1
        if not 0 <= idx < dim:
            raise ValueError(f"variable x{idx + 1} out of range for dimension {dim}")
        exps[idx] += int(power) if power else 1
    return tuple(exps)


def format_scalar(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------- JetPoly

class JetPoly:
    """A truncated Taylor polynomial in ``dim`` variables, exact to total degree ``order``.

    Instances are immutable.  Absent monomials are zero; zero coefficients are
    never stored, so equality is plain dictionary equality.
    """

    __slots__ = ("dim", "order", "_c", "_hash")

    def __init__(self, dim: int, order: int, coeffs: Optional[Mapping[Exps, object]] = None):
        if dim < 0:
            raise DimensionError("dimension must be non-negative")
        if order < 0:
            raise OrderError("jet order must be non-negative")
        self.dim = dim
        self.order = order
        c: Dict[Exps, Fraction] = {}
        if coeffs:
            for e, v in coeffs.items():
                e = tuple(e)
                if len(e) != dim:
                    raise DimensionError(f"monomial {e} does not have {dim} exponents")
                if sum(e) > order:
                    continue
                v = as_scalar(v)
                if v:
                    c[e] = c.get(e, 0) + v
                    if not c[e]:
                        del c[e]
        self._c = c
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, order: int, coeffs: Dict[Exps, Fraction]) -> "JetPoly":
        obj = cls.__new__(cls)
        obj.dim = dim
        obj.order = order
        obj._c = coeffs
        obj._hash = None
        return obj

    # -- constructors
    @classmethod
    def zero(cls, dim: int, order: int) -> "JetPoly":
        return cls._raw(dim, order, {})

    @classmethod
    def constant(cls, dim: int, order: int, value) -> "JetPoly":
        v = as_scalar(value)
        return cls._raw(dim, order, {(0,) * dim: v} if v else {})

    @classmethod
    def variable(cls, dim: int, order: int, axis: int) -> "JetPoly":
        if not 0 <= axis < dim:
            raise DimensionError(f"axis {axis} out of range")
        if order == 0:
            return cls.zero(dim, 0)
        return cls._raw(dim, order, {unit_exps(dim, axis): Fraction(1)})

    @classmethod
    def monomial(cls, dim: int, order: int, exps: Exps, coeff=1) -> "JetPoly":
        return cls(dim, order, {tuple(exps): coeff})

    # -- access
    @property
    def coeffs(self) -> Dict[Exps, Fraction]:
        return dict(self._c)

    def items(self) -> Iterator[Tuple[Exps, Fraction]]:
        for e in sorted(self._c, key=monomial_key):
            yield e, self._c[e]

    def coeff(self, exps: Exps) -> Fraction:
        return self._c.get(tuple(exps), Fraction(0))

    def const(self) -> Fraction:
        return self._c.get((0,) * self.dim, Fraction(0))

    def is_zero(self) -> bool:
        return not self._c

    def lowest_degree(self) -> Optional[int]:
        return min((sum(e) for e in self._c), default=None)

    def degree_part(self, deg: int) -> "JetPoly":
        return JetPoly._raw(self.dim, self.order, {e: v for e, v in self._c.items() if sum(e) == deg})

    def truncate(self, order: int) -> "JetPoly":
        if order > self.order:
            raise OrderError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return JetPoly._raw(self.dim, order, {e: v for e, v in self._c.items() if sum(e) <= order})

    def agrees_with(self, other: "JetPoly", k: int) -> bool:
        """True iff all coefficients of total degree <= k coincide."""
        _check_dims(self, other)
        for e in set(self._c) | set(other._c):
            if sum(e) <= k and self._c.get(e, 0) != other._c.get(e, 0):
                return False
        return True

    # -- ring structure
    def __eq__(self, other):
        if not isinstance(other, JetPoly):
            return NotImplemented
        return self.dim == other.dim and self.order == other.order and self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self.order, frozenset(self._c.items())))
        return self._hash

    def _coerce(self, other) -> "JetPoly":
        if isinstance(other, JetPoly):
            _check_dims(self, other)
            return other
        return JetPoly.constant(self.dim, self.order, other)

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        m = min(self.order, other.order)
        c = {e: v for e, v in self._c.items() if sum(e) <= m}
        for e, v in other._c.items():
            if sum(e) > m:
                continue
            s = c.get(e, 0) + v
            if s:
                c[e] = s
            else:
                c.pop(e, None)
        return JetPoly._raw(self.dim, m, c)

    __radd__ = __add__

    def __neg__(self):
        return JetPoly._raw(self.dim, self.order, {e: -v for e, v in self._c.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "JetPoly":
        s = as_scalar(s)
        if not s:
            return JetPoly.zero(self.dim, self.order)
        return JetPoly._raw(self.dim, self.order, {e: v * s for e, v in self._c.items()})

    def __mul__(self, other):
        if isinstance(other, JetPoly):
            return jp_multiply(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, JetPoly):
            return self * other.reciprocal()
        return self.scale(Fraction(1) / as_scalar(other))

    def __pow__(self, p: int):
        if not isinstance(p, int) or p < 0:
            raise ValueError("only non-negative integer powers")
        result = JetPoly.constant(self.dim, self.order, 1)
        base = self
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result

    def partial(self, axis: int) -> "JetPoly":
        return jp_partial(self, axis)

    def reciprocal(self) -> "JetPoly":
        """Multiplicative inverse of a unit jet (non-zero constant term)."""
        a0 = self.const()
        if not a0:
            raise InvertibilityError("jet with zero constant term has no reciprocal")
        # 1/(a0 (1 + t)) = (1/a0) sum (-t)^k, t has no constant term
        t = self.scale(1 / a0) - 1
        return _geometric(t, self.order).scale(1 / a0)

    def nth_root(self, n: int) -> "JetPoly":
        """Exact n-th root of a unit jet whose constant term has a rational n-th root."""
        a0 = self.const()
        r0 = rational_root(a0, n) if a0 else None
        if r0 is None:
            raise DomainError(f"constant term {a0} has no rational {n}-th root")
        t = self.scale(1 / a0) - 1
        # binomial series (1 + t)^(1/n)
        acc = JetPoly.constant(self.dim, self.order, 1)
        term = JetPoly.constant(self.dim, self.order, 1)
        coef = Fraction(1)
        a = Fraction(1, n)
        for k in range(1, self.order + 1):
            coef = coef * (a - (k - 1)) / k
            term = term * t
            if term.is_zero():
                break
            acc = acc + term.scale(coef)
        return acc.scale(r0)

    def sqrt(self) -> "JetPoly":
        return self.nth_root(2)

    def compose(self, subs: Sequence["JetPoly"]) -> "JetPoly":
        """Substitute ``subs[i]`` for the i-th variable.  Substitutes must vanish at 0."""
        return jp_compose(self, subs)

    def translate(self, shift: Sequence) -> "JetPoly":
        """Re-expand the polynomial this jet represents about ``shift``.

        Exact when the jet is the full Taylor series of a polynomial of degree
        <= order (e.g. metrics given in closed polynomial form); otherwise the
        result is only the re-expansion of the truncation.
        """
        shift = [as_scalar(s) for s in shift]
        if len(shift) != self.dim:
            raise DimensionError("shift has wrong length")
        subs = [JetPoly.variable(self.dim, self.order, i) + s for i, s in enumerate(shift)]
        out = JetPoly.zero(self.dim, self.order)
        for e, v in self._c.items():
            term = JetPoly.constant(self.dim, self.order, v)
            for i, p in enumerate(e):
                if p:
                    term = term * subs[i] ** p
            out = out + term
        return out

    def embed(self, dim: int, positions: Sequence[int]) -> "JetPoly":
        """View as a jet in ``dim`` variables, variable i going to ``positions[i]``."""
        c = {}
        for e, v in self._c.items():
            ne = [0] * dim
            for i, p in enumerate(e):
                ne[positions[i]] += p
            c[tuple(ne)] = v
        return JetPoly._raw(dim, self.order, c)

    def __call__(self, point: Sequence) -> Fraction:
        """Evaluate the truncated polynomial at a rational point."""
        point = [as_scalar(p) for p in point]
        total = Fraction(0)
        for e, v in self._c.items():
            term = v
            for x, p in zip(point, e):
                if p:
                    term *= x**p
            total += term
        return total

    # -- text
    def to_dict(self) -> Dict[str, str]:
        return {format_monomial(e): format_scalar(v) for e, v in self.items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, object], dim: int, order: int) -> "JetPoly":
        c: Dict[Exps, Fraction] = {}
        for k, v in data.items():
            if isinstance(v, float):
                raise TypeError(f"float coefficient {v!r} refused; use a rational string")
            e = parse_monomial(k, dim)
            c[e] = c.get(e, 0) + as_scalar(v)
        return cls(dim, order, c)

    def __repr__(self):
        if not self._c:
            body = "0"
        else:
            body = " + ".join(
                f"{format_scalar(v)}" + ("" if not any(e) else "*" + format_monomial(e).replace(" ", "*"))
                for e, v in self.items()
            )
        return f"JetPoly({body}; n={self.dim}, order={self.order})"


def _check_dims(a: JetPoly, b: JetPoly):
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _geometric(t: JetPoly, order: int) -> JetPoly:
    # sum_{k} (-t)^k for t without constant term
    acc = JetPoly.constant(t.dim, order, 1)
    term = JetPoly.constant(t.dim, order, 1)
    for _ in range(order):
        term = -(term * t)
        if term.is_zero():
            break
        acc = acc + term
    return acc


def jp_multiply(a: JetPoly, b: JetPoly) -> JetPoly:
    """Product truncated at ``min(a.order, b.order)``."""
    _check_dims(a, b)
    m = min(a.order, b.order)
    out: Dict[Exps, Fraction] = {}
    bd = [(e, sum(e), v) for e, v in b._c.items()]
    for ea, va in a._c.items():
        da = sum(ea)
        if da > m:
            continue
        room = m - da
        for eb, db, vb in bd:
            if db > room:
                continue
            e = tuple(x + y for x, y in zip(ea, eb))
            s = out.get(e, 0) + va * vb
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return JetPoly._raw(a.dim, m, out)


def jp_partial(a: JetPoly, axis: int) -> JetPoly:
    """Formal partial derivative; the order drops by one."""
    if not 0 <= axis < a.dim:
        raise DimensionError(f"axis {axis} out of range for dimension {a.dim}")
    if a.order == 0:
        raise OrderError("cannot differentiate an order-0 jet")
    out = {}
    for e, v in a._c.items():
        p = e[axis]
        if p:
            ne = e[:axis] + (p - 1,) + e[axis + 1:]
            out[ne] = v * p
    return JetPoly._raw(a.dim, a.order - 1, out)


def jp_compose(a: JetPoly, subs: Sequence[JetPoly]) -> JetPoly:
    if len(subs) != a.dim:
        raise DimensionError(f"need {a.dim} substitutes, got {len(subs)}")
    if not subs:
        return a
    target_dim = subs[0].dim
    for s in subs:
        if s.dim != target_dim:
            raise DimensionError("substitutes live in different dimensions")
        if s.const():
            raise DomainError("substitute does not vanish at the chart center")
    m = min([a.order] + [s.order for s in subs])
    subs = [s.truncate(m) for s in subs]
    cache: Dict[Tuple[int, int], JetPoly] = {}

    def power(i: int, p: int) -> JetPoly:
        key = (i, p)
        if key not in cache:
            cache[key] = JetPoly.constant(target_dim, m, 1) if p == 0 else power(i, p - 1) * subs[i]
        return cache[key]

    out: Dict[Exps, Fraction] = {}
    for e, v in a._c.items():
        if sum(e) > m:
            continue
        term = None
        for i, p in enumerate(e):
            if p:
                term = power(i, p) if term is None else term * power(i, p)
                if term.is_zero():
                    break
        items = [((0,) * target_dim, Fraction(1))] if term is None else term._c.items()
        for te, tv in items:
            s = out.get(te, 0) + v * tv
            if s:
                out[te] = s
            else:
                out.pop(te, None)
    return JetPoly._raw(target_dim, m, out)


# ---------------------------------------------------------------- MapJet

class MapJet:
    """Germ of a map between charts, as one JetPoly per target coordinate."""

    __slots__ = ("components", "source_dim", "target_dim", "order")

    def __init__(self, components: Sequence[JetPoly]):
        comps = tuple(components)
        if not comps:
            raise DimensionError("a map jet needs at least one component")
        n = comps[0].dim
        m = min(c.order for c in comps)
        for c in comps:
            if c.dim != n:
                raise DimensionError("components live in different dimensions")
        self.components = tuple(c.truncate(m) for c in comps)
        self.source_dim = n
        self.target_dim = len(comps)
        self.order = m

    @classmethod
    def identity(cls, dim: int, order: int) -> "MapJet":
        return cls([JetPoly.variable(dim, order, i) for i in range(dim)])

    @classmethod
    def from_polys(cls, dim: int, order: int, polys: Sequence[Mapping]) -> "MapJet":
        return cls([JetPoly(dim, order, p) for p in polys])

    @property
    def base_image(self) -> Tuple[Fraction, ...]:
        return tuple(c.const() for c in self.components)

    def linear_part(self) -> List[List[Fraction]]:
        """Jacobian at the center, rows indexed by target coordinate."""
        n = self.source_dim
        return [[c.coeff(unit_exps(n, j)) for j in range(n)] for c in self.components]

    def jacobian(self) -> List[List[JetPoly]]:
        return [[c.partial(j) for j in range(self.source_dim)] for c in self.components]

    def is_diffeo_germ(self) -> bool:
        if self.source_dim != self.target_dim or self.order < 1:
            return False
        from .linalg import det
        return det(self.linear_part()) != 0

    def truncate(self, order: int) -> "MapJet":
        return MapJet([c.truncate(order) for c in self.components])

    def translate_target(self, shift: Sequence) -> "MapJet":
        """Subtract ``shift`` from every component (moves the image chart)."""
        return MapJet([c - as_scalar(s) for c, s in zip(self.components, shift)])

    def __eq__(self, other):
        return isinstance(other, MapJet) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"MapJet({self.source_dim}->{self.target_dim}, order={self.order}, {list(self.components)})"

    def to_list(self) -> List[Dict[str, str]]:
        return [c.to_dict() for c in self.components]


def mapjet_compose(f: MapJet, g: MapJet) -> MapJet:
    """The jet of ``f o g``; ``g`` must send the chart center to the center of ``f``'s chart."""
    if g.target_dim != f.source_dim:
        raise DimensionError(f"cannot compose: g lands in dimension {g.target_dim}, f starts in {f.source_dim}")
    if any(g.base_image):
        raise DomainError(f"chart-center mismatch: g(0) = {g.base_image}, f is centered at 0")
    return MapJet([jp_compose(c, g.components) for c in f.components])


def mapjet_inverse(f: MapJet) -> MapJet:
    """Inverse jet, solved order by order from the linear part."""
    from .linalg import inverse_matrix
    if f.source_dim != f.target_dim:
        raise InvertibilityError("only square map jets can be inverted")
    if any(f.base_image):
        raise DomainError("inverse is only defined for jets fixing the chart center")
    L = f.linear_part()
    try:
        Linv = inverse_matrix(L)
    except ZeroDivisionError:
        raise InvertibilityError("linear part is singular") from None
    n, m = f.source_dim, f.order
    ident = MapJet.identity(n, m)

    def apply_linear(M, comps):
        return [sum((c.scale(M[i][j]) for j, c in enumerate(comps) if M[i][j]), JetPoly.zero(n, m))
                for i in range(n)]

    g = MapJet(apply_linear(Linv, ident.components))
    for _ in range(m):
        resid = [a - b for a, b in zip(mapjet_compose(f, g).components, ident.components)]
        if all(r.is_zero() for r in resid):
            break
        corr = apply_linear(Linv, resid)
        g = MapJet([a - b for a, b in zip(g.components, corr)])
    return g


def jet_agree_up_to(f: MapJet, g: MapJet, k: int) -> bool:
    if f.source_dim != g.source_dim or f.target_dim != g.target_dim:
        raise DimensionError("map jets have different dimensions")
    if k > min(f.order, g.order):
        raise OrderError(f"cannot compare {k}-jets of jets of order {f.order}, {g.order}")
    return all(a.agrees_with(b, k) for a, b in zip(f.components, g.components))


def variables(dim: int, order: int) -> List[JetPoly]:
    """Coordinate functions ``x1..xn`` as jets; handy for writing closed forms."""
    return [JetPoly.variable(dim, order, i) for i in range(dim)]


def exp_jet(p: JetPoly) -> JetPoly:
    """``exp`` of a jet with rational constant term 0 (so all coefficients stay rational)."""
    if p.const():
        raise DomainError("exp needs a jet vanishing at the center to stay rational")
    acc = JetPoly.constant(p.dim, p.order, 1)
    term = JetPoly.constant(p.dim, p.order, 1)
    for k in range(1, p.order + 1):
        term = (term * p).scale(Fraction(1, k))
        if term.is_zero():
            break
        acc = acc + term
    return acc


def iter_multicombinations(n: int, size: int) -> Iterable[Tuple[int, ...]]:
    return itertools.combinations_with_replacement(range(n), size)
