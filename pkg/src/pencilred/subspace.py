"""Rank-revealing subspace primitives.

Every subspace is stored through an orthonormal basis.  Quotient spaces are
represented by orthogonal complements, so an operator induced on a quotient
is just the compression ``C_Y^H M C_X`` between the complement bases.

Rank decisions use the SVD with the threshold
``max(abs_floor, rel * scale * dim)`` where ``scale`` defaults to the
largest singular value of the matrix being tested and ``dim`` to its larger
dimension.  Callers that chain several decisions pass a fixed ``scale`` so
that projected or restricted operators are judged against the size of the
operator they came from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContainmentError, InputError, InvarianceError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    rel: float = 1e-10
    abs_floor: float = 0.0

    def __post_init__(self):
        if not self.rel > 0:
            raise InputError(f"relative tolerance must be positive, got {self.rel}")
        if self.abs_floor < 0:
            raise InputError(f"absolute floor must be nonnegative, got {self.abs_floor}")

    def threshold(self, scale: float, dim: int) -> float:
        return max(self.abs_floor, self.rel * float(scale) * max(int(dim), 1))


DEFAULT_TOL = Tolerance()


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a 2-D inexact array, rejecting non-finite entries."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.issubdtype(M.dtype, np.inexact):
        M = M.astype(float)
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _result_dtype(*arrays) -> np.dtype:
    return np.result_type(float, *[a.dtype for a in arrays])


class Subspace:
    """A subspace of ``K^ambient_dim`` held by an orthonormal basis.

    The zero subspace has a basis with zero columns.
    """

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, basis=None, *, check: bool = True):
        ambient_dim = int(ambient_dim)
        if ambient_dim < 0:
            raise InputError("ambient dimension must be nonnegative")
        if basis is None:
            basis = np.zeros((ambient_dim, 0))
        basis = np.asarray(basis)
        if not np.issubdtype(basis.dtype, np.inexact):
            basis = basis.astype(float)
        if basis.ndim != 2 or basis.shape[0] != ambient_dim:
            raise InputError(
                f"basis shape {basis.shape} incompatible with ambient dimension {ambient_dim}"
            )
        k = basis.shape[1]
        if k > ambient_dim:
            raise InputError("subspace dimension exceeds ambient dimension")
        if check and k:
            gram = basis.conj().T @ basis
            err = np.max(np.abs(gram - np.eye(k)))
            if err > 10 * _EPS * max(ambient_dim, 1) * max(k, 1):
                raise InputError(f"basis columns are not orthonormal (error {err:.3g})")
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "basis", _readonly(basis))

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((n, 0)), check=False)

    @classmethod
    def full(cls, n: int, dtype=float) -> "Subspace":
        return cls(n, np.eye(n, dtype=dtype), check=False)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual_of(self, vectors) -> float:
        """Spectral norm of the part of ``vectors`` orthogonal to this subspace."""
        V = np.asarray(vectors)
        if V.size == 0:
            return 0.0
        R = V - self.basis @ (self.basis.conj().T @ V)
        return _norm2(R)

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


class InducedMap(NamedTuple):
    matrix: np.ndarray
    residual: float


def _norm2(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _svd_full(M: np.ndarray):
    m, n = M.shape
    if M.size == 0:
        dtype = _result_dtype(M)
        return np.eye(m, dtype=dtype), np.zeros(0), np.eye(n, dtype=dtype)
    return np.linalg.svd(M, full_matrices=True)


def singular_values(M) -> np.ndarray:
    M = np.asarray(M)
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def _rank_from(s: np.ndarray, shape, tol: Tolerance, scale, dim) -> int:
    if s.size == 0:
        return 0
    if scale is None:
        scale = s[0]
    if dim is None:
        dim = max(shape)
    thr = tol.threshold(scale, dim)
    return int(np.count_nonzero(s > thr))


def numerical_rank(M, tol: Tolerance = DEFAULT_TOL, *, scale=None, dim=None) -> int:
    M = as_matrix(M)
    return _rank_from(singular_values(M), M.shape, tol, scale, dim)


def range_basis(M, tol: Tolerance = DEFAULT_TOL, *, scale=None, dim=None) -> Subspace:
    """Orthonormal basis of the column space of ``M`` at numerical rank."""
    M = as_matrix(M)
    U, s, _ = _svd_full(M)
    r = _rank_from(s, M.shape, tol, scale, dim)
    return Subspace(M.shape[0], U[:, :r], check=False)


def kernel_basis(M, tol: Tolerance = DEFAULT_TOL, *, scale=None, dim=None) -> Subspace:
    """Orthonormal basis of ``{u : M u = 0}`` at numerical rank."""
    M = as_matrix(M)
    _, s, Vh = _svd_full(M)
    r = _rank_from(s, M.shape, tol, scale, dim)
    return Subspace(M.shape[1], Vh[r:].conj().T, check=False)


def preimage_basis(M, T: Subspace, tol: Tolerance = DEFAULT_TOL, *, scale=None, dim=None) -> Subspace:
    """``{u : M u in span(T)}``, computed as the kernel of ``(I - P_T) M``.

    The rank threshold is scaled by ``||M||`` rather than by the norm of the
    projected product, otherwise rounding noise in ``(I - P_T) M`` would be
    counted as rank whenever ``M`` maps almost entirely into ``T``.
    """
    M = as_matrix(M)
    if M.shape[0] != T.ambient_dim:
        raise InputError(
            f"operator has {M.shape[0]} rows but target lives in dimension {T.ambient_dim}"
        )
    if scale is None:
        scale = _norm2(M)
    PM = M - T.basis @ (T.basis.conj().T @ M)
    return kernel_basis(PM, tol, scale=scale, dim=dim)


def _check_same_ambient(S: Subspace, T: Subspace):
    if S.ambient_dim != T.ambient_dim:
        raise InputError(f"ambient dimensions differ: {S.ambient_dim} vs {T.ambient_dim}")


def sum_basis(S: Subspace, T: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    _check_same_ambient(S, T)
    return range_basis(np.hstack([S.basis, T.basis]), tol, scale=1.0)


def intersect_basis(S: Subspace, T: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Intersection from the kernel of ``[S_basis, T_basis]``.

    Its dimension is forced to ``dim S + dim T - dim(S + T)`` using the same
    rank decision as :func:`sum_basis`, so the dimension formula holds
    exactly on the returned values.
    """
    _check_same_ambient(S, T)
    n, ds, dt = S.ambient_dim, S.dim, T.dim
    M = np.hstack([S.basis, T.basis])
    _, s, Vh = _svd_full(M)
    r = _rank_from(s, M.shape, tol, 1.0, None)
    q = ds + dt - r
    if q <= 0:
        return Subspace.zero(n)
    coeffs = Vh[r:].conj().T[:ds]
    V = S.basis @ coeffs
    U, _, _ = np.linalg.svd(V, full_matrices=False)
    return Subspace(n, U[:, :q], check=False)


def quotient_basis(ambient: Subspace, V: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement of ``V`` inside ``ambient`` (represents ``ambient / V``)."""
    _check_same_ambient(ambient, V)
    thr = tol.threshold(1.0, ambient.ambient_dim)
    res = ambient.residual_of(V.basis)
    if res > thr:
        raise ContainmentError(f"subspace is not contained in the ambient space (residual {res:.3g})")
    a, v = ambient.dim, V.dim
    if v > a:
        raise ContainmentError("subspace has larger dimension than the ambient space")
    if a == v:
        return Subspace.zero(ambient.ambient_dim)
    C = ambient.basis.conj().T @ V.basis
    U, _, _ = _svd_full(C)
    return Subspace(ambient.ambient_dim, ambient.basis @ U[:, v:], check=False)


def complement(V: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement of ``V`` in its ambient space."""
    n = V.ambient_dim
    if V.dim == 0:
        return Subspace.full(n, dtype=_result_dtype(V.basis))
    U, _, _ = _svd_full(V.basis)
    return Subspace(n, U[:, V.dim:], check=False)


def gap(S: Subspace, T: Subspace) -> float:
    """Distance between two subspaces: ``||P_S - P_T||_2``, or 1 when dimensions differ."""
    _check_same_ambient(S, T)
    if S.dim != T.dim:
        return 1.0
    if S.dim == 0:
        return 0.0
    return _norm2(S.projector() - T.projector())


def induced_operator(
    M,
    dom: Subspace,
    target: Subspace,
    tol: Tolerance = DEFAULT_TOL,
    *,
    sub: tuple[Subspace, Subspace] | None = None,
    scale=None,
    dim=None,
) -> InducedMap:
    """Matrix of the operator induced by ``M`` in the bases of ``dom`` and ``target``.

    Without ``sub`` this is the restriction of ``M`` to ``dom`` with values in
    ``target``; the residual measures how far ``M dom`` leaves ``target``.

    With ``sub = (X', Y')`` it is the quotient map ``X/X' -> Y/Y'`` where
    ``dom`` and ``target`` are the complement representatives of the two
    quotients; the residual then measures the failure of ``M X' in Y'``.

    Raises :class:`InvarianceError` when the residual exceeds the threshold.
    """
    M = as_matrix(M)
    if M.shape[1] != dom.ambient_dim or M.shape[0] != target.ambient_dim:
        raise InputError(
            f"operator shape {M.shape} incompatible with spaces "
            f"({target.ambient_dim}, {dom.ambient_dim})"
        )
    if scale is None:
        scale = _norm2(M)
    if dim is None:
        dim = max(M.shape)
    if sub is None:
        image = M @ dom.basis
        residual = target.residual_of(image)
        matrix = target.basis.conj().T @ image
    else:
        Xs, Ys = sub
        _check_same_ambient(Xs, dom)
        _check_same_ambient(Ys, target)
        residual = Ys.residual_of(M @ Xs.basis)
        matrix = target.basis.conj().T @ (M @ dom.basis)
    limit = tol.threshold(scale, dim) + 64 * _EPS * float(scale)
    if residual > limit:
        raise InvarianceError(
            f"operator does not preserve the subspace: residual {residual:.3g} > {limit:.3g}"
        )
    return InducedMap(matrix, residual)
