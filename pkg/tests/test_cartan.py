import itertools
import math

import pytest
import sympy as sp

from jetrigidity.cartan import (
    AlgebraError,
    MatrixAlgebra,
    conformal,
    dual_algebra,
    finite_type_order,
    general_linear,
    lightlike,
    named_algebra,
    orthogonal,
    prolongation,
    prolongation_dims,
    subriemannian,
)


def sympy_prolongation_dim(h: MatrixAlgebra, k: int) -> int:
    """Brute-force oracle: symbolic symmetric tensors, membership through a sympy annihilator."""
    n = h.n
    B = sp.Matrix([[sp.Rational(v.numerator, v.denominator) for row in M for v in row] for M in h.basis])
    ann = B.nullspace() if h.dim else [sp.eye(n * n).col(i) for i in range(n * n)]
    T = {}
    unknowns = []
    for i in range(n):
        for S in itertools.combinations_with_replacement(range(n), k + 1):
            s = sp.Symbol(f"t_{i}_{'_'.join(map(str, S))}")
            T[(i, S)] = s
            unknowns.append(s)
    eqs = []
    for J in itertools.combinations_with_replacement(range(n), k):
        vec = [T[(i, tuple(sorted(J + (j,))))] for i in range(n) for j in range(n)]
        for a in ann:
            eqs.append(sum(a[c] * vec[c] for c in range(n * n)))
    eqs = [e for e in eqs if e != 0]
    if not eqs:
        return len(unknowns)
    M, _ = sp.linear_eq_to_matrix(eqs, unknowns)
    return len(unknowns) - M.rank()


@pytest.mark.parametrize("n", [2, 3])
def test_orthogonal_has_type_one(n):
    assert prolongation(orthogonal(n), 1).dim == 0
    assert finite_type_order(orthogonal(n), 3) == 1


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_gl_prolongation_is_unconstrained(n, k):
    assert prolongation(general_linear(n), k).dim == n * math.comb(n + k, k + 1)


def test_conformal_has_type_two():
    assert prolongation_dims(conformal(3), 3) == {1: 3, 2: 0, 3: 0}
    assert finite_type_order(conformal(3), 4) == 2


@pytest.mark.parametrize("name,k", [("o(3)", 1), ("co(3)", 1), ("co(3)", 2), ("subriemannian(3)", 1),
                                    ("subriemannian(3)", 2), ("lightlike(3)", 1), ("lightlike(3)", 2)])
def test_dims_match_sympy_oracle(name, k):
    h = named_algebra(name)
    assert prolongation(h, k).dim == sympy_prolongation_dim(h, k)


def test_subriemannian_and_lightlike_have_infinite_type():
    sub = prolongation_dims(subriemannian(3), 5)
    light = prolongation_dims(lightlike(3), 5)
    assert all(v > 0 for v in sub.values()) and all(v > 0 for v in light.values())
    assert finite_type_order(subriemannian(3), 5) is None
    assert finite_type_order(lightlike(3), 5) is None


def test_computed_subriemannian_lightlike_dims():
    """The two algebras are exchanged by X -> -X^T but their prolongations differ."""
    assert list(prolongation_dims(subriemannian(3), 5).values()) == [4, 4, 4, 4, 4]
    assert list(prolongation_dims(lightlike(3), 5).values()) == [6, 10, 15, 21, 28]
    dual = dual_algebra(subriemannian(3))
    # the dual is conjugate to the lightlike algebra, so its prolongations agree with it
    assert prolongation_dims(dual, 3) == prolongation_dims(lightlike(3), 3)


def test_prolongation_basis_rechecks():
    for h in (conformal(3), subriemannian(3), lightlike(3)):
        for k in (1, 2):
            assert prolongation(h, k).verify()


def test_monotone_vanishing():
    for h in (orthogonal(3), conformal(3), orthogonal(4)):
        dims = prolongation_dims(h, 3)
        for k in range(1, 3):
            if dims[k] == 0:
                assert dims[k + 1] == 0


def test_algebra_helpers():
    assert orthogonal(3).is_closed() and subriemannian(3).is_closed() and lightlike(3).is_closed()
    assert named_algebra(" gl( 2 ) ").dim == 4
    with pytest.raises(AlgebraError):
        named_algebra("sp(4)")
    with pytest.raises(AlgebraError):
        MatrixAlgebra.from_matrices([[[1, 0], [0, 0]], [[2, 0], [0, 0]]])
    assert conformal(2).contains([[1, 2], [-2, 1]])
    assert not orthogonal(2).contains([[1, 0], [0, 0]])
