"""Cartan prolongations of linear Lie algebras and the finite-type test."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .jetcore import as_scalar, iter_multicombinations

Matrix = List[List[Fraction]]


class AlgebraError(ValueError):
    pass


def _flat(M: Sequence[Sequence]) -> Dict[int, Fraction]:
    n = len(M)
    return {i * n + j: Fraction(v) for i, row in enumerate(M) for j, v in enumerate(row) if v}


def _unit(n: int, i: int, j: int) -> Matrix:
    M = [[Fraction(0)] * n for _ in range(n)]
    M[i][j] = Fraction(1)
    return M


def _bracket(A: Matrix, B: Matrix) -> Matrix:
    n = len(A)
    AB = [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    BA = [[sum(B[i][k] * A[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return [[AB[i][j] - BA[i][j] for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class MatrixAlgebra:
    """A linear subspace of gl_n given by a basis of n x n matrices."""

    n: int
    basis: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for M in self.basis:
            if len(M) != self.n or any(len(r) != self.n for r in M):
                raise AlgebraError(f"basis matrices must be {self.n}x{self.n}")
        if linalg.rank([_flat(M) for M in self.basis]) != len(self.basis):
            raise AlgebraError("basis matrices are linearly dependent")

    @classmethod
    def from_matrices(cls, mats: Sequence[Sequence[Sequence]], name: str = "") -> "MatrixAlgebra":
        if not mats:
            raise AlgebraError("empty basis; give n explicitly via MatrixAlgebra(n, ())")
        n = len(mats[0])
        basis = tuple(tuple(tuple(as_scalar(v) for v in row) for row in M) for M in mats)
        return cls(n, basis, name)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, M: Sequence[Sequence]) -> bool:
        rows, _ = linalg.rref([_flat(B) for B in self.basis])
        return linalg.in_span(rows, _flat(M))

    def is_closed(self) -> bool:
        """Closure under the commutator (advisory)."""
        rows, _ = linalg.rref([_flat(B) for B in self.basis])
        mats = [[list(r) for r in B] for B in self.basis]
        return all(linalg.in_span(rows, _flat(_bracket(A, B))) for a, A in enumerate(mats) for B in mats[a + 1:])

    def annihilator(self) -> List[Dict[int, Fraction]]:
        """Linear functionals on gl_n (as flat index dicts) vanishing on the span."""
        return linalg.nullspace([_flat(B) for B in self.basis], self.n * self.n)

    def to_list(self) -> List[List[List[str]]]:
        return [[[str(v) for v in row] for row in M] for M in self.basis]


def orthogonal(n: int) -> MatrixAlgebra:
    mats = []
    for i in range(n):
        for j in range(i + 1, n):
            M = _unit(n, i, j)
            M[j][i] = Fraction(-1)
            mats.append(M)
    return MatrixAlgebra(n, tuple(tuple(map(tuple, M)) for M in mats), f"o({n})")


def general_linear(n: int) -> MatrixAlgebra:
    mats = [_unit(n, i, j) for i in range(n) for j in range(n)]
    return MatrixAlgebra(n, tuple(tuple(map(tuple, M)) for M in mats), f"gl({n})")


def conformal(n: int) -> MatrixAlgebra:
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    mats = [list(map(list, M)) for M in orthogonal(n).basis] + [ident]
    return MatrixAlgebra(n, tuple(tuple(map(tuple, M)) for M in mats), f"co({n})")


def subriemannian(n: int) -> MatrixAlgebra:
    """Block matrices ``[[A, u], [0, b]]`` with ``A`` in o(n-1): preserve the hyperplane and its metric."""
    if n < 2:
        raise AlgebraError("subriemannian(n) needs n >= 2")
    mats = []
    for B in orthogonal(n - 1).basis:
        M = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n - 1):
            for j in range(n - 1):
                M[i][j] = B[i][j]
        mats.append(M)
    mats += [_unit(n, i, n - 1) for i in range(n - 1)]
    mats.append(_unit(n, n - 1, n - 1))
    return MatrixAlgebra(n, tuple(tuple(map(tuple, M)) for M in mats), f"subriemannian({n})")


def lightlike(n: int) -> MatrixAlgebra:
    """Block matrices ``[[b, u], [0, A]]`` with ``A`` in o(n-1): preserve the kernel line and the quotient metric."""
    if n < 2:
        raise AlgebraError("lightlike(n) needs n >= 2")
    mats = [_unit(n, 0, 0)]
    mats += [_unit(n, 0, j) for j in range(1, n)]
    for B in orthogonal(n - 1).basis:
        M = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n - 1):
            for j in range(n - 1):
                M[i + 1][j + 1] = B[i][j]
        mats.append(M)
    return MatrixAlgebra(n, tuple(tuple(map(tuple, M)) for M in mats), f"lightlike({n})")


def dual_algebra(h: MatrixAlgebra) -> MatrixAlgebra:
    """Image under the automorphism ``X -> -X^T`` of gl_n."""
    n = h.n
    mats = [[[-M[j][i] for j in range(n)] for i in range(n)] for M in h.basis]
    return MatrixAlgebra(n, tuple(tuple(map(tuple, M)) for M in mats), f"dual({h.name})" if h.name else "")


_NAMED = {"o": orthogonal, "gl": general_linear, "co": conformal,
          "subriemannian": subriemannian, "lightlike": lightlike}
NAMED_ALGEBRAS = tuple(sorted(_NAMED))


def named_algebra(spec: str) -> MatrixAlgebra:
    """Parse ``"o(3)"``, ``"gl(2)"``, ``"co(3)"``, ``"subriemannian(3)"``, ``"lightlike(3)"``."""
    m = re.fullmatch(r"\s*([a-z]+)\s*\(\s*(\d+)\s*\)\s*", spec)
    if not m or m.group(1) not in _NAMED:
        raise AlgebraError(f"unknown algebra {spec!r}; known: {', '.join(f'{k}(n)' for k in NAMED_ALGEBRAS)}")
    n = int(m.group(2))
    if n < 1:
        raise AlgebraError("n must be positive")
    return _NAMED[m.group(1)](n)


# ---------------------------------------------------------------- prolongation

@dataclass(frozen=True)
class ProlongationSpace:
    """Symmetric (k+1)-linear maps R^n x ... x R^n -> R^n with every partial evaluation in the algebra.

    A basis element is a dict ``{(i, S): value}``: ``i`` the output index, ``S`` a sorted
    (k+1)-multiset of input slots.
    """

    algebra: MatrixAlgebra = field(repr=False)
    k: int
    dim: int
    basis: Tuple[Dict[Tuple[int, Tuple[int, ...]], Fraction], ...] = field(repr=False)

    def slice(self, element, J: Sequence[int]) -> Matrix:
        """The matrix ``v -> A(v, e_J)`` for a fixed k-multiset ``J``."""
        n = self.algebra.n
        return [[element.get((i, tuple(sorted(tuple(J) + (j,)))), Fraction(0)) for j in range(n)] for i in range(n)]

    def verify(self) -> bool:
        """Re-check that every partial evaluation of every basis element lies in the algebra."""
        n = self.algebra.n
        for A in self.basis:
            for J in iter_multicombinations(n, self.k):
                if not self.algebra.contains(self.slice(A, J)):
                    return False
        return True

    def to_dict(self) -> dict:
        return {"algebra": self.algebra.name, "k": self.k, "dim": self.dim}


def prolongation(h: MatrixAlgebra, k: int) -> ProlongationSpace:
    if k < 1:
        raise ValueError("prolongation level must be >= 1")
    n = h.n
    sets = list(iter_multicombinations(n, k + 1))
    index = {(i, S): c for c, (i, S) in enumerate((i, S) for S in sets for i in range(n))}
    ann = h.annihilator()
    rows = []
    for J in iter_multicombinations(n, k):
        for phi in ann:
            row: Dict[int, Fraction] = {}
            for flat, v in phi.items():
                i, j = divmod(flat, n)
                c = index[(i, tuple(sorted(J + (j,))))]
                row[c] = row.get(c, 0) + v
            row = {c: v for c, v in row.items() if v}
            if row:
                rows.append(row)
    null = linalg.nullspace(rows, len(index))
    basis_rows = linalg.canonical_basis(null)
    keys = {c: key for key, c in index.items()}
    basis = tuple({keys[c]: v for c, v in r.items()} for r in basis_rows)
    return ProlongationSpace(h, k, len(basis), basis)


def prolongation_dims(h: MatrixAlgebra, kmax: int) -> Dict[int, int]:
    return {k: prolongation(h, k).dim for k in range(1, kmax + 1)}


def finite_type_order(h: MatrixAlgebra, kmax: int) -> Optional[int]:
    """Smallest ``k <= kmax`` with a vanishing prolongation, or None.

    The next level is computed too and must also vanish.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    for k in range(1, kmax + 1):
        if prolongation(h, k).dim == 0:
            if prolongation(h, k + 1).dim != 0:  # pragma: no cover - impossible for linear algebras
                raise AssertionError(f"prolongation vanishes at {k} but not at {k + 1}")
            return k
    return None
