import numpy as np
import pytest

from pencilred.errors import ContainmentError, InputError, InvarianceError
from pencilred.subspace import (
    Subspace,
    Tolerance,
    complement,
    gap,
    induced_operator,
    intersect_basis,
    kernel_basis,
    numerical_rank,
    preimage_basis,
    quotient_basis,
    range_basis,
    sum_basis,
)


def span(*cols, n=None):
    M = np.array(cols, dtype=float).T
    return range_basis(M)


def test_tolerance_validation():
    with pytest.raises(InputError):
        Tolerance(rel=0)
    with pytest.raises(InputError):
        Tolerance(abs_floor=-1)
    assert Tolerance(1e-10, 1e-3).threshold(1.0, 5) == 1e-3


def test_subspace_checks_orthonormality():
    with pytest.raises(InputError):
        Subspace(2, np.array([[1.0], [1.0]]))
    S = Subspace(2, np.array([[1.0], [0.0]]))
    assert S.dim == 1
    with pytest.raises(AttributeError):
        S.basis = None
    with pytest.raises(ValueError):
        S.basis[0, 0] = 2.0


def test_rank_range_kernel():
    M = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert numerical_rank(M) == 1
    assert range_basis(M).dim == 1
    K = kernel_basis(M)
    assert K.dim == 1
    assert np.allclose(M @ K.basis, 0)
    assert kernel_basis(np.zeros((0, 3))).dim == 3
    assert range_basis(np.zeros((3, 0))).dim == 0


def test_preimage_uses_operator_scale():
    # M maps almost entirely into T; noise in the projection must not count as rank
    rng = np.random.default_rng(0)
    T = range_basis(rng.standard_normal((5, 3)))
    M = T.basis @ rng.standard_normal((3, 4)) * 1e8
    P = preimage_basis(M, T)
    assert P.dim == 4


def test_sum_and_intersection_dimension_formula():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(1, 8))
        S = range_basis(rng.standard_normal((n, int(rng.integers(0, n + 1)))))
        shared = S.basis[:, : min(S.dim, 1)]
        extra = rng.standard_normal((n, int(rng.integers(0, n + 1))))
        T = range_basis(np.hstack([shared, extra]))
        s, i = sum_basis(S, T), intersect_basis(S, T)
        assert S.dim + T.dim == s.dim + i.dim
        assert S.residual_of(i.basis) < 1e-8 and T.residual_of(i.basis) < 1e-8


def test_quotient_and_complement():
    W = span([1, 0, 0], [0, 1, 0])
    V = span([1, 1, 0])
    Q = quotient_basis(W, V)
    assert Q.dim == 1
    assert abs(Q.basis[:, 0] @ np.array([1, 1, 0])) < 1e-12
    with pytest.raises(ContainmentError):
        quotient_basis(V, W)
    assert complement(W).dim == 1
    assert complement(Subspace.zero(3)).dim == 3


def test_gap():
    a = span([1, 0])
    b = span([1, 1e-3])
    assert 0 < gap(a, b) < 2e-3
    assert gap(a, Subspace.zero(2)) == 1.0


def test_induced_operator_restriction_and_quotient():
    M = np.array([[1.0, 2.0], [0.0, 3.0]])
    X = span([1, 0])
    r = induced_operator(M, X, X)
    assert np.allclose(r.matrix, [[1.0]])
    with pytest.raises(InvarianceError):
        induced_operator(M, span([0, 1]), span([0, 1]))
    q = induced_operator(M, complement(X), complement(X), sub=(X, X))
    assert np.allclose(q.matrix, [[3.0]])
