"""Defect sequences of a pencil and the checks built on them.

``alpha_k`` counts algebraic variables, ``beta_obs_k`` empty equations and
``beta_ctrl_k`` absent variables, each read off the k-th reduced system of
the corresponding chain.  The first entry of each sequence is always
reported; later entries only while the system is still reducible in that
sense, so sequences carry no padding zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InputError, ToleranceError
from .pencil import Pencil
from .reduction import (
    PencilScale,
    control_reduce,
    irreducible_core,
    is_control_irreducible,
    is_observation_irreducible,
    kernel_dim,
    observation_reduce,
)
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    complement,
    induced_operator,
    numerical_rank,
    quotient_basis,
    range_basis,
)


@dataclass(frozen=True)
class DefectProfile:
    alpha: tuple[int, ...]
    beta_obs: tuple[int, ...]
    beta_ctrl: tuple[int, ...]
    steps_obs: int
    steps_ctrl: int
    regular: bool
    termination: str = "exhausted"
    marginal: tuple[str, ...] = field(default=())

    def stripped(self) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        return strip_zeros(self.alpha), strip_zeros(self.beta_obs), strip_zeros(self.beta_ctrl)

    def same_invariants(self, other: "DefectProfile") -> bool:
        return self.stripped() == other.stripped()

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "beta_obs": list(self.beta_obs),
            "beta_ctrl": list(self.beta_ctrl),
            "steps_obs": self.steps_obs,
            "steps_ctrl": self.steps_ctrl,
            "regular": self.regular,
            "termination": self.termination,
            "marginal": list(self.marginal),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DefectProfile":
        return cls(
            tuple(d["alpha"]), tuple(d["beta_obs"]), tuple(d["beta_ctrl"]),
            d["steps_obs"], d["steps_ctrl"], d["regular"], d.get("termination", "exhausted"),
            tuple(d.get("marginal", ())),
        )


def strip_zeros(seq) -> tuple[int, ...]:
    seq = list(seq)
    while seq and seq[-1] == 0:
        seq.pop()
    return tuple(seq)


def _scale(p, scale):
    return PencilScale.of(p) if scale is None else scale


def alpha_defect(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> int:
    """Kernel dimension of the map ``[E]: U/U1 -> W1/W2`` induced by ``E``.

    Cross-checked against ``dim ker E - dim ker E1``.
    """
    sc = _scale(p, scale)
    step = observation_reduce(p, tol, sc)
    U1 = Subspace(p.n, step.dom_map, check=False)
    W1 = Subspace(p.m, step.codom_map, check=False)
    W2 = range_basis(p.E @ U1.basis, tol, scale=sc.e, dim=sc.dim)
    target = quotient_basis(W1, W2, tol)
    dom = complement(U1)
    E_bracket = induced_operator(p.E, dom, target, tol, sub=(U1, W2), scale=sc.e, dim=sc.dim)
    alpha = dom.dim - numerical_rank(E_bracket.matrix, tol, scale=sc.e, dim=sc.dim)
    via_kernels = kernel_dim(p, tol, sc) - kernel_dim(step.reduced, tol, sc)
    if alpha != via_kernels:
        raise ToleranceError(
            f"constraint defect {alpha} disagrees with kernel difference {via_kernels}"
        )
    return alpha


def beta_obs_defect(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> int:
    return observation_reduce(p, tol, scale).pivot_cokernel_dim


def beta_ctrl_defect(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> int:
    return control_reduce(p, tol, scale).pivot_kernel_dim


def defect_profile(
    p: Pencil,
    tol: Tolerance = DEFAULT_TOL,
    max_steps: int | None = None,
    scale: PencilScale | None = None,
) -> DefectProfile:
    sc = _scale(p, scale)
    if max_steps is None:
        max_steps = min(p.m, p.n) + 1
    if max_steps < 1:
        raise InputError("max_steps must be at least 1")
    marginal: list[str] = []
    termination = "exhausted"

    alpha, beta_obs = [], []
    current = p
    steps_obs = 0
    while True:
        alpha.append(alpha_defect(current, tol, sc))
        step = observation_reduce(current, tol, sc)
        beta_obs.append(step.pivot_cokernel_dim)
        if step.marginal:
            marginal.append(f"observation pivot {steps_obs + 1}")
        if is_observation_irreducible(current, tol, sc):
            break
        steps_obs += 1
        current = step.reduced
        if is_observation_irreducible(current, tol, sc):
            break
        if steps_obs >= max_steps:
            termination = "max_steps"
            break

    beta_ctrl = []
    current = p
    steps_ctrl = 0
    while True:
        step = control_reduce(current, tol, sc)
        beta_ctrl.append(step.pivot_kernel_dim)
        if step.marginal:
            marginal.append(f"control pivot {steps_ctrl + 1}")
        if is_control_irreducible(current, tol, sc):
            break
        steps_ctrl += 1
        current = step.reduced
        if is_control_irreducible(current, tol, sc):
            break
        if steps_ctrl >= max_steps:
            termination = "max_steps"
            break

    regular = p.is_square and not any(beta_obs) and not any(beta_ctrl)
    return DefectProfile(
        tuple(alpha), tuple(beta_obs), tuple(beta_ctrl), steps_obs, steps_ctrl,
        regular, termination, tuple(marginal),
    )


def shift_law_check(p: Pencil, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Observation reduction drops ``alpha`` and ``beta_obs`` by one index and keeps
    ``beta_ctrl``; control reduction drops ``alpha`` and ``beta_ctrl`` and keeps ``beta_obs``.
    Sequences are compared up to trailing zeros."""
    sc = PencilScale.of(p)
    big = p.m + p.n + 2
    a, bo, bc = defect_profile(p, tol, big, sc).stripped()
    oa, obo, obc = defect_profile(observation_reduce(p, tol, sc).reduced, tol, big, sc).stripped()
    ca, cbo, cbc = defect_profile(control_reduce(p, tol, sc).reduced, tol, big, sc).stripped()
    obs_ok = oa == strip_zeros(a[1:]) and obo == strip_zeros(bo[1:]) and obc == bc
    ctrl_ok = ca == strip_zeros(a[1:]) and cbc == strip_zeros(bc[1:]) and cbo == bo
    return obs_ok and ctrl_ok


def core_eigenvalues(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> np.ndarray | None:
    """Eigenvalues ``lambda`` with ``lambda E + A`` singular on the irreducible core.

    Returns ``None`` when the core is not square with invertible ``E``.
    """
    core = irreducible_core(p, tol, scale).final
    if not core.is_square:
        return None
    if core.n == 0:
        return np.zeros(0, dtype=complex)
    try:
        M = -np.linalg.solve(core.E, core.A)
    except np.linalg.LinAlgError:
        return None
    return np.sort_complex(np.linalg.eigvals(M).astype(complex))


def match_multisets(a: np.ndarray, b: np.ndarray, atol: float = 1e-6) -> bool:
    """Optimal one-to-one matching of two complex multisets within ``atol * max(1, |z|)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    if a.size == 0:
        return True
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    limit = atol * np.maximum(1.0, np.maximum(np.abs(a[rows]), np.abs(b[cols])))
    return bool(np.all(cost[rows, cols] <= limit))


def invariants_equal(p: Pencil, q: Pencil, tol: Tolerance = DEFAULT_TOL, atol: float = 1e-6) -> bool:
    """Necessary condition for equivalence: equal defects and equal core spectra.

    Equal results do not certify that the pencils are equivalent.
    """
    pp, pq = defect_profile(p, tol), defect_profile(q, tol)
    if not pp.same_invariants(pq):
        return False
    if p.shape != q.shape:
        return False
    ep, eq = core_eigenvalues(p, tol), core_eigenvalues(q, tol)
    for prof, ev in ((pp, ep), (pq, eq)):
        if prof.regular and ev is None:
            raise ToleranceError("regular pencil whose irreducible core has singular E")
    if ep is None or eq is None:
        return ep is None and eq is None
    return match_multisets(ep, eq, atol)
