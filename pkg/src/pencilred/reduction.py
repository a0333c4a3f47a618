"""Observation and control reductions of a pencil.

Observation reduction restricts ``(E, A)`` to ``U1 = A^{-1}(range E)`` and
``W1 = range E``; its pivot is the map induced by ``A`` on the quotients
``U/U1 -> W/W1``.  Control reduction passes to the quotients ``U/ker E`` and
``W/A ker E``; its pivot is ``A`` restricted from ``ker E`` to ``A ker E``.

Both steps are stored uniformly: ``reduced = codom_map^H (E, A) dom_map``,
where ``dom_map`` and ``codom_map`` have orthonormal columns.  For the
observation step they embed the subspaces; for the control step they are the
complement representatives of the quotients, so ``dom_map^H`` is the
projection ``U -> U/ker E``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import InputError, PreconditionFailed, ToleranceError
from .pencil import Pencil
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    complement,
    gap,
    induced_operator,
    intersect_basis,
    kernel_basis,
    preimage_basis,
    range_basis,
    singular_values,
    sum_basis,
)

OBS = "observation"
CTRL = "control"

_KIND_ALIASES = {"obs": OBS, "observation": OBS, "o": OBS, "ctrl": CTRL, "control": CTRL, "c": CTRL}

# a pivot whose smallest singular value is within this factor of the
# threshold is reported as marginal
MARGINAL_FACTOR = 10.0


def normalize_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[kind.lower()]
    except (KeyError, AttributeError):
        raise InputError(f"unknown reduction kind {kind!r}") from None


@dataclass(frozen=True)
class PencilScale:
    """Norms and size of the pencil that started a chain.

    Every rank decision inside a chain is taken against these, so a singular
    value discarded at one step stays discarded later on.
    """

    e: float
    a: float
    dim: int

    @classmethod
    def of(cls, p: Pencil) -> "PencilScale":
        e, a = p.norms()
        return cls(e, a, max(p.m, p.n, 1))

    def threshold_e(self, tol: Tolerance) -> float:
        return tol.threshold(self.e, self.dim)

    def threshold_a(self, tol: Tolerance) -> float:
        return tol.threshold(self.a, self.dim)


def _scale(p: Pencil, scale: PencilScale | None) -> PencilScale:
    return PencilScale.of(p) if scale is None else scale


@dataclass(frozen=True, eq=False)
class ReductionStep:
    kind: str
    parent_shape: tuple[int, int]
    dom_map: np.ndarray
    codom_map: np.ndarray
    reduced: Pencil
    pivot: np.ndarray
    pivot_dom: Subspace
    pivot_codom: Subspace
    pivot_sigma_min: float
    pivot_rank: int
    pivot_invertible: bool
    marginal: bool
    residuals: dict = field(default_factory=dict)

    @property
    def trivial(self) -> bool:
        """True when the step changes nothing (the parent was already irreducible in this sense)."""
        return self.reduced.shape == self.parent_shape

    @property
    def pivot_kernel_dim(self) -> int:
        return self.pivot.shape[1] - self.pivot_rank

    @property
    def pivot_cokernel_dim(self) -> int:
        return self.pivot.shape[0] - self.pivot_rank

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "parent_shape": list(self.parent_shape),
            "reduced_shape": list(self.reduced.shape),
            "pivot_shape": list(self.pivot.shape),
            "pivot_rank": self.pivot_rank,
            "pivot_sigma_min": None if np.isinf(self.pivot_sigma_min) else self.pivot_sigma_min,
            "pivot_invertible": self.pivot_invertible,
            "marginal": self.marginal,
        }


def _pivot_stats(pivot: np.ndarray, thr: float):
    s = singular_values(pivot)
    rank = int(np.count_nonzero(s > thr))
    sigma_min = float(s[-1]) if s.size else float("inf")
    invertible = pivot.shape[0] == pivot.shape[1] and rank == pivot.shape[0]
    marginal = bool(s.size) and thr < sigma_min <= MARGINAL_FACTOR * thr
    return sigma_min, rank, invertible, marginal


def observation_reduce(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> ReductionStep:
    sc = _scale(p, scale)
    W1 = range_basis(p.E, tol, scale=sc.e, dim=sc.dim)
    U1 = preimage_basis(p.A, W1, tol, scale=sc.a, dim=sc.dim)
    E1 = induced_operator(p.E, U1, W1, tol, scale=sc.e, dim=sc.dim)
    A1 = induced_operator(p.A, U1, W1, tol, scale=sc.a, dim=sc.dim)
    Cu, Cw = complement(U1), complement(W1)
    piv = induced_operator(p.A, Cu, Cw, tol, sub=(U1, W1), scale=sc.a, dim=sc.dim)
    # E always lands in W1, so its quotient map vanishes
    e_quotient = float(np.linalg.norm(Cw.basis.conj().T @ p.E @ Cu.basis, 2)) if Cu.dim and Cw.dim else 0.0
    thr = sc.threshold_a(tol)
    sigma_min, rank, invertible, marginal = _pivot_stats(piv.matrix, thr)
    if rank != piv.matrix.shape[1]:
        raise ToleranceError(
            f"observation pivot lost injectivity (rank {rank} < {piv.matrix.shape[1]})"
        )
    return ReductionStep(
        kind=OBS,
        parent_shape=p.shape,
        dom_map=U1.basis,
        codom_map=W1.basis,
        reduced=Pencil(E1.matrix, A1.matrix),
        pivot=piv.matrix,
        pivot_dom=Cu,
        pivot_codom=Cw,
        pivot_sigma_min=sigma_min,
        pivot_rank=rank,
        pivot_invertible=invertible,
        marginal=marginal,
        residuals={"E": E1.residual, "A": A1.residual, "pivot": piv.residual, "E_quotient": e_quotient},
    )


def control_reduce(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> ReductionStep:
    sc = _scale(p, scale)
    K = kernel_basis(p.E, tol, scale=sc.e, dim=sc.dim)
    AK = range_basis(p.A @ K.basis, tol, scale=sc.a, dim=sc.dim)
    Cu, Cw = complement(K), complement(AK)
    E1 = induced_operator(p.E, Cu, Cw, tol, sub=(K, AK), scale=sc.e, dim=sc.dim)
    A1 = induced_operator(p.A, Cu, Cw, tol, sub=(K, AK), scale=sc.a, dim=sc.dim)
    piv = induced_operator(p.A, K, AK, tol, scale=sc.a, dim=sc.dim)
    thr = sc.threshold_a(tol)
    sigma_min, rank, invertible, marginal = _pivot_stats(piv.matrix, thr)
    if rank != piv.matrix.shape[0]:
        raise ToleranceError(
            f"control pivot is not onto A ker E (rank {rank} < {piv.matrix.shape[0]})"
        )
    return ReductionStep(
        kind=CTRL,
        parent_shape=p.shape,
        dom_map=Cu.basis,
        codom_map=Cw.basis,
        reduced=Pencil(E1.matrix, A1.matrix),
        pivot=piv.matrix,
        pivot_dom=K,
        pivot_codom=AK,
        pivot_sigma_min=sigma_min,
        pivot_rank=rank,
        pivot_invertible=invertible,
        marginal=marginal,
        residuals={"E": E1.residual, "A": A1.residual, "pivot": piv.residual},
    )


def reduce(p: Pencil, kind: str, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> ReductionStep:
    kind = normalize_kind(kind)
    return observation_reduce(p, tol, scale) if kind == OBS else control_reduce(p, tol, scale)


def kernel_dim(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> int:
    sc = _scale(p, scale)
    return kernel_basis(p.E, tol, scale=sc.e, dim=sc.dim).dim


def range_dim(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> int:
    sc = _scale(p, scale)
    return range_basis(p.E, tol, scale=sc.e, dim=sc.dim).dim


def is_observation_irreducible(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale=None) -> bool:
    return range_dim(p, tol, scale) == p.m


def is_control_irreducible(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale=None) -> bool:
    return kernel_dim(p, tol, scale) == 0


def is_irreducible(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale=None) -> bool:
    """``E`` injective with full range."""
    return is_control_irreducible(p, tol, scale) and is_observation_irreducible(p, tol, scale)


class ReductionChain(Sequence):
    """Sequence of steps plus the composed maps back to the original spaces."""

    def __init__(self, original: Pencil, steps: list[ReductionStep]):
        self.original = original
        self.steps = list(steps)
        dom = np.eye(original.n, dtype=original.E.dtype)
        codom = np.eye(original.m, dtype=original.E.dtype)
        for st in self.steps:
            dom = dom @ st.dom_map
            codom = codom @ st.codom_map
        self.dom_map = dom
        self.codom_map = codom

    def __getitem__(self, i):
        return self.steps[i]

    def __len__(self):
        return len(self.steps)

    @property
    def final(self) -> Pencil:
        return self.steps[-1].reduced if self.steps else self.original

    @property
    def kinds(self) -> list[str]:
        return [st.kind for st in self.steps]

    @property
    def pivots_invertible(self) -> bool:
        return all(st.pivot_invertible for st in self.steps)


def reduce_chain(
    p: Pencil,
    policy: Iterable[str] | str = ("obs",),
    max_steps: int | None = None,
    tol: Tolerance = DEFAULT_TOL,
    scale: PencilScale | None = None,
) -> ReductionChain:
    """Apply reductions in ``policy`` order until the system is irreducible.

    A string policy (``"obs"``, ``"ctrl"``) repeats that kind.  A sequence is
    cycled when ``max_steps`` exceeds its length.  ``max_steps`` defaults to
    ``len(policy)`` for sequences and to ``m + n + 1`` for a repeated kind.
    """
    if isinstance(policy, str):
        kinds = [normalize_kind(policy)]
        default_steps = p.m + p.n + 1
    else:
        kinds = [normalize_kind(k) for k in policy]
        default_steps = len(kinds)
    if max_steps is None:
        max_steps = default_steps
    if max_steps < 0:
        raise InputError("max_steps must be nonnegative")
    sc = _scale(p, scale)
    steps: list[ReductionStep] = []
    current = p
    for i in range(max_steps):
        if not kinds or is_irreducible(current, tol, sc):
            break
        step = reduce(current, kinds[i % len(kinds)], tol, sc)
        steps.append(step)
        current = step.reduced
    return ReductionChain(p, steps)


def irreducible_core(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> ReductionChain:
    """Alternate nontrivial observation and control reductions until irreducible."""
    sc = _scale(p, scale)
    steps: list[ReductionStep] = []
    current = p
    for _ in range(p.m + p.n + 2):
        if not is_observation_irreducible(current, tol, sc):
            step = observation_reduce(current, tol, sc)
        elif not is_control_irreducible(current, tol, sc):
            step = control_reduce(current, tol, sc)
        else:
            break
        steps.append(step)
        current = step.reduced
    else:
        raise ToleranceError("reduction did not terminate")
    return ReductionChain(p, steps)


# -- normality and index-one predicates ------------------------------------

@dataclass(frozen=True)
class NormalityDiagnostics:
    sum_gap: float
    int_gap: float
    normal: bool
    ak_in_range: bool

    def to_dict(self) -> dict:
        return {
            "sum_gap": self.sum_gap,
            "int_gap": self.int_gap,
            "normal": self.normal,
            "ak_in_range": self.ak_in_range,
        }


@dataclass(frozen=True)
class PencilSubspaces:
    """The subspaces every reduction is built from, computed once."""

    range_E: Subspace
    ker_E: Subspace
    A_ker_E: Subspace
    U1: Subspace
    ker_E1: Subspace
    A_ker_E1: Subspace


def pencil_subspaces(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> PencilSubspaces:
    sc = _scale(p, scale)
    rE = range_basis(p.E, tol, scale=sc.e, dim=sc.dim)
    kE = kernel_basis(p.E, tol, scale=sc.e, dim=sc.dim)
    AK = range_basis(p.A @ kE.basis, tol, scale=sc.a, dim=sc.dim)
    U1 = preimage_basis(p.A, rE, tol, scale=sc.a, dim=sc.dim)
    # ker E1 = ker E restricted to U1
    kE1_coords = kernel_basis(p.E @ U1.basis, tol, scale=sc.e, dim=sc.dim)
    kE1 = Subspace(p.n, U1.basis @ kE1_coords.basis, check=False)
    AK1 = range_basis(p.A @ kE1.basis, tol, scale=sc.a, dim=sc.dim)
    return PencilSubspaces(rE, kE, AK, U1, kE1, AK1)


def normality_check(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> NormalityDiagnostics:
    """Evaluate both normality identities as gaps between independently built subspaces.

    Sum identity: ``range E + A ker E`` (sum of bases) against the range of
    the stacked matrix ``[E, A K]``.  Intersection identity:
    ``range E ∩ A ker E`` against ``A ker E1``.
    """
    sc = _scale(p, scale)
    S = pencil_subspaces(p, tol, sc)
    lhs_sum = sum_basis(S.range_E, S.A_ker_E, tol)
    stacked = np.hstack([p.E / max(sc.e, 1e-300), p.A @ S.ker_E.basis / max(sc.a, 1e-300)])
    rhs_sum = range_basis(stacked, tol, scale=1.0, dim=sc.dim)
    inter = intersect_basis(S.range_E, S.A_ker_E, tol)
    sum_gap = gap(lhs_sum, rhs_sum)
    int_gap = gap(inter, S.A_ker_E1)
    limit = tol.threshold(1.0, sc.dim) * 1e3
    ak_in = S.range_E.residual_of(S.A_ker_E.basis) <= tol.threshold(1.0, sc.dim) * 1e3
    return NormalityDiagnostics(sum_gap, int_gap, sum_gap <= limit and int_gap <= limit, ak_in)


@dataclass(frozen=True)
class IndexOneResult:
    index_one: bool
    criteria: dict

    def __bool__(self):
        return self.index_one


def control_index_one(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> IndexOneResult:
    """``range E ∩ A ker E = 0``, cross-checked against injectivity of the control-reduced ``E``."""
    sc = _scale(p, scale)
    S = pencil_subspaces(p, tol, sc)
    inter = intersect_basis(S.range_E, S.A_ker_E, tol)
    by_intersection = inter.dim == 0
    step = control_reduce(p, tol, sc)
    by_injectivity = is_control_irreducible(step.reduced, tol, sc)
    if by_intersection != by_injectivity:
        raise ToleranceError(
            "index-one criteria disagree: intersection says "
            f"{by_intersection}, injectivity of reduced E says {by_injectivity}"
        )
    return IndexOneResult(
        by_intersection,
        {"intersection_zero": by_intersection, "reduced_E_injective": by_injectivity,
         "intersection_dim": inter.dim},
    )


def variational_index_one_check(D, A, tol: Tolerance = DEFAULT_TOL) -> IndexOneResult:
    """Index-one check for ``E = D^H D`` with a coercive ``A``.

    Raises :class:`PreconditionFailed` when ``A`` is not coercive; the check
    is then skipped rather than falsified.
    """
    D = np.asarray(D)
    A = np.asarray(A)
    if D.ndim != 2 or A.ndim != 2 or A.shape[0] != A.shape[1] or D.shape[1] != A.shape[0]:
        raise InputError(f"incompatible shapes D {D.shape}, A {A.shape}")
    E = D.conj().T @ D
    sym = (A + A.conj().T) / 2
    eig = np.linalg.eigvalsh(sym) if sym.size else np.zeros(0)
    scale = float(np.linalg.norm(A, 2)) if A.size else 0.0
    if eig.size and not eig[0] > tol.threshold(scale, A.shape[0]):
        raise PreconditionFailed(f"A is not coercive (smallest symmetric eigenvalue {eig[0]:.3g})")
    result = control_index_one(Pencil(E, A), tol)
    if not result.index_one:
        raise ToleranceError("E = D^H D with coercive A failed the index-one test")
    return IndexOneResult(True, dict(result.criteria, coercivity_margin=float(eig[0]) if eig.size else None))


def yagi_bound(p: Pencil, tol: Tolerance = DEFAULT_TOL) -> float:
    """Least ``beta >= 0`` with ``Re <E u, A u> <= beta ||E u||^2`` for all ``u``.

    Returns ``inf`` when no such constant exists.  A finite bound forces
    control index one, which is asserted.
    """
    if not p.is_square:
        raise InputError("the inequality needs a square pencil")
    E, A = p.E, p.A
    sc = PencilScale.of(p)
    K = kernel_basis(E, tol, scale=sc.e, dim=sc.dim)
    C = complement(K)
    n = p.n
    if C.dim == 0:
        return 0.0
    F = (E.conj().T @ A + A.conj().T @ E) / 2
    # cross term <E x, A k> must vanish for the form to be bounded on u = x + k
    cross = (A @ K.basis).conj().T @ (E @ C.basis)
    if cross.size and np.linalg.norm(cross, 2) > tol.threshold(max(sc.e * sc.a, 1e-300), n):
        return float("inf")
    Fc = C.basis.conj().T @ F @ C.basis
    Gc = C.basis.conj().T @ (E.conj().T @ E) @ C.basis
    Fc = (Fc + Fc.conj().T) / 2
    Gc = (Gc + Gc.conj().T) / 2
    top = float(scipy.linalg.eigh(Fc, Gc, eigvals_only=True)[-1])
    beta = max(0.0, top)
    if not control_index_one(p, tol).index_one:
        raise ToleranceError("finite inequality constant without control index one")
    return beta
