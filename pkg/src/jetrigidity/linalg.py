"""Exact sparse linear algebra over the rationals.

Rows and vectors are ``{column: value}`` dicts.  The elimination kernel runs on
``gmpy2.mpq`` when gmpy2 is importable; setting ``JETRIGIDITY_PURE=1`` forces
the pure-Python :class:`fractions.Fraction` path.  Both paths are exact and
produce identical results; only speed differs (see ``benchmarks/``).

All public functions take and return Fractions.
"""
from __future__ import annotations

import os
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

Row = Dict[int, Fraction]

_PURE = os.environ.get("JETRIGIDITY_PURE", "").strip() not in ("", "0")

try:  # pragma: no cover - exercised through both env settings in the benchmark
    if _PURE:
        raise ImportError
    from gmpy2 import mpq as _mpq

    def _to_q(v):
        return _mpq(v.numerator, v.denominator)

    def _from_q(v):
        return Fraction(int(v.numerator), int(v.denominator))

    BACKEND = "gmpy2"
except ImportError:  # pragma: no cover
    def _to_q(v):
        return v

    def _from_q(v):
        return v

    BACKEND = "fraction"


class _Echelon:
    """Incrementally maintained reduced row-echelon form."""

    def __init__(self):
        self.pivots: Dict[int, dict] = {}

    def reduce(self, row: dict) -> dict:
        piv = self.pivots
        for c in [c for c in row if c in piv]:
            v = row.get(c)
            if not v:
                continue
            for cc, pv in piv[c].items():
                nv = row.get(cc, 0) - v * pv
                if nv:
                    row[cc] = nv
                else:
                    row.pop(cc, None)
        return row

    def insert(self, row: dict) -> Optional[int]:
        """Add a row; returns the new pivot column or None if it was dependent."""
        row = self.reduce(dict(row))
        if not row:
            return None
        p = min(row)
        inv = 1 / row[p]
        row = {c: v * inv for c, v in row.items()}
        for other in self.pivots.values():
            v = other.get(p)
            if v:
                for cc, pv in row.items():
                    nv = other.get(cc, 0) - v * pv
                    if nv:
                        other[cc] = nv
                    else:
                        other.pop(cc, None)
        self.pivots[p] = row
        return p

    def sorted_rows(self) -> List[dict]:
        return [self.pivots[p] for p in sorted(self.pivots)]


def _qrows(rows: Sequence[Row]):
    return [{c: _to_q(v) for c, v in r.items() if v} for r in rows]


def _frow(row) -> Row:
    return {c: _from_q(v) for c, v in sorted(row.items())}


def rref(rows: Sequence[Row]) -> Tuple[List[Row], List[int]]:
    """Reduced row-echelon form; returns the non-zero rows sorted by pivot, and the pivots."""
    ech = _Echelon()
    for r in _qrows(rows):
        ech.insert(r)
    out = ech.sorted_rows()
    return [_frow(r) for r in out], sorted(ech.pivots)


def rank(rows: Sequence[Row]) -> int:
    ech = _Echelon()
    for r in _qrows(rows):
        ech.insert(r)
    return len(ech.pivots)


def nullspace(rows: Sequence[Row], ncols: int) -> List[Row]:
    """Basis of ``{v : row . v = 0 for every row}``, one vector per free column."""
    ech = _Echelon()
    for r in _qrows(rows):
        if any(c >= ncols or c < 0 for c in r):
            raise IndexError("row has entries outside the column range")
        ech.insert(r)
    piv = ech.pivots
    free = [c for c in range(ncols) if c not in piv]
    # column -> pivot rows containing it
    owners: Dict[int, List[Tuple[int, object]]] = {}
    for p, r in piv.items():
        for c, v in r.items():
            if c != p:
                owners.setdefault(c, []).append((p, v))
    basis = []
    for f in free:
        vec = {f: Fraction(1)}
        for p, v in owners.get(f, ()):
            vec[p] = -_from_q(v)
        basis.append(dict(sorted(vec.items())))
    return basis


def canonical_basis(vectors: Sequence[Row]) -> List[Row]:
    """The RREF basis of the span of ``vectors`` (unique for a given subspace)."""
    return rref(vectors)[0]


def solve(rows: Sequence[Row], rhs: Sequence[Fraction], ncols: int) -> Optional[Row]:
    """A particular solution of ``rows . x = rhs`` (free variables zero), or None."""
    aug = ncols
    ech = _Echelon()
    for r, b in zip(_qrows(rows), rhs):
        r = dict(r)
        if b:
            r[aug] = _to_q(Fraction(b))
        ech.insert(r)
    if aug in ech.pivots:
        return None
    sol = {}
    for p, r in ech.pivots.items():
        b = r.get(aug)
        if b:
            sol[p] = _from_q(b)
    return dict(sorted(sol.items()))


def in_span(basis_rref: Sequence[Row], vec: Row) -> bool:
    """Membership test against a basis already in RREF (as returned by :func:`rref`)."""
    ech = _Echelon()
    for r in _qrows(basis_rref):
        ech.insert(r)
    return not ech.reduce({c: _to_q(v) for c, v in vec.items() if v})


def restrict(vec: Row, cols) -> Row:
    return {c: v for c, v in vec.items() if c in cols}


# ---------------------------------------------------------------- small dense helpers

def det(M: Sequence[Sequence]) -> Fraction:
    """Determinant of a small dense matrix of exact entries (Fractions or JetPolys)."""
    n = len(M)
    if n == 0:
        return Fraction(1)
    if hasattr(M[0][0], "partial"):  # JetPoly entries: cofactor expansion
        return _det_generic(M)
    A = [[Fraction(x) for x in row] for row in M]
    sign = 1
    d = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if A[r][i]), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            A[i], A[piv] = A[piv], A[i]
            sign = -sign
        d *= A[i][i]
        for r in range(i + 1, n):
            f = A[r][i] / A[i][i]
            if f:
                for c in range(i, n):
                    A[r][c] -= f * A[i][c]
    return sign * d


def _det_generic(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det_generic(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def inverse_matrix(M: Sequence[Sequence]) -> List[List[Fraction]]:
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for i in range(n):
        piv = next((r for r in range(i, n) if A[r][i]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[i], A[piv] = A[piv], A[i]
        inv = 1 / A[i][i]
        A[i] = [x * inv for x in A[i]]
        for r in range(n):
            if r != i and A[r][i]:
                f = A[r][i]
                A[r] = [x - f * y for x, y in zip(A[r], A[i])]
    return [row[n:] for row in A]


def dense_rank(M: Sequence[Sequence]) -> int:
    return rank([{j: Fraction(v) for j, v in enumerate(row) if v} for row in M])


def dense_nullspace(M: Sequence[Sequence], ncols: int) -> List[List[Fraction]]:
    rows = [{j: Fraction(v) for j, v in enumerate(row) if v} for row in M]
    return [[v.get(j, Fraction(0)) for j in range(ncols)] for v in nullspace(rows, ncols)]


def leading_minors(M: Sequence[Sequence]) -> List[Fraction]:
    return [det([row[:k] for row in M[:k]]) for k in range(1, len(M) + 1)]


def is_positive_definite(M: Sequence[Sequence]) -> bool:
    """Sylvester's criterion, exact."""
    return all(m > 0 for m in leading_minors(M))


def is_positive_semidefinite(M: Sequence[Sequence]) -> bool:
    """All principal minors non-negative (exact; fine for the small sizes used here)."""
    import itertools
    n = len(M)
    for size in range(1, n + 1):
        for idx in itertools.combinations(range(n), size):
            if det([[M[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True
