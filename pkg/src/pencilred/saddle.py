"""Saddle-point pencils, the inf-sup constant and packaged discretized examples."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .commutativity import exact_sequence_sums, mixed_chains
from .errors import InputError, ToleranceError
from .pencil import Pencil
from .reduction import PencilScale, control_reduce, observation_reduce
from .subspace import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    complement,
    kernel_basis,
    singular_values,
)


def _spd_check(M: np.ndarray, name: str, tol: Tolerance):
    if M.shape[0] != M.shape[1]:
        raise InputError(f"{name} must be square, got {M.shape}")
    if M.size == 0:
        return
    scale = float(np.linalg.norm(M, 2))
    if np.linalg.norm(M - M.conj().T, 2) > tol.threshold(scale, M.shape[0]):
        raise InputError(f"{name} is not symmetric")
    w = np.linalg.eigvalsh((M + M.conj().T) / 2)
    if not w[0] > tol.threshold(scale, M.shape[0]):
        raise InputError(f"{name} is not positive definite (smallest eigenvalue {w[0]:.3g})")


@dataclass(frozen=True, eq=False)
class SaddleSpec:
    """``A0`` on X, ``B: X -> M*`` and the Gram matrices of X and M (identity by default)."""

    A0: np.ndarray
    B: np.ndarray
    RX: np.ndarray | None = None
    RM: np.ndarray | None = None

    def __post_init__(self):
        A0 = as_matrix(self.A0, "A0")
        B = as_matrix(self.B, "B")
        nx = A0.shape[0]
        if A0.shape != (nx, nx):
            raise InputError(f"A0 must be square, got {A0.shape}")
        if B.shape[1] != nx:
            raise InputError(f"B has {B.shape[1]} columns but X has dimension {nx}")
        RX = np.eye(nx) if self.RX is None else as_matrix(self.RX, "RX")
        RM = np.eye(B.shape[0]) if self.RM is None else as_matrix(self.RM, "RM")
        if RX.shape != (nx, nx) or RM.shape != (B.shape[0], B.shape[0]):
            raise InputError("Gram matrix shapes do not match X and M")
        _spd_check(RX, "RX", DEFAULT_TOL)
        _spd_check(RM, "RM", DEFAULT_TOL)
        for name, val in (("A0", A0), ("B", B), ("RX", RX), ("RM", RM)):
            object.__setattr__(self, name, val)

    @property
    def dim_X(self) -> int:
        return self.A0.shape[0]

    @property
    def dim_M(self) -> int:
        return self.B.shape[0]

    @classmethod
    def from_dict(cls, d: dict) -> "SaddleSpec":
        try:
            return cls(
                np.array(d["A0"], dtype=float).reshape(len(d["A0"]), -1),
                np.array(d["B"], dtype=float).reshape(len(d["B"]), -1),
                None if d.get("RX") is None else np.array(d["RX"], dtype=float),
                None if d.get("RM") is None else np.array(d["RM"], dtype=float),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad saddle specification: {exc}") from None

    def to_dict(self) -> dict:
        return {"A0": self.A0, "B": self.B, "RX": self.RX, "RM": self.RM}

    @classmethod
    def load(cls, path) -> "SaddleSpec":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from None
        if not isinstance(d, dict):
            raise InputError(f"{path}: expected a JSON object")
        return cls.from_dict(d)


def build_saddle_pencil(s: SaddleSpec) -> Pencil:
    """``E = [[RX, 0], [0, 0]]``, ``A = [[A0, B^T], [B, 0]]`` on ``X x M``.

    ``B^T`` is the dual map ``M -> X*``; the Gram matrix of M does not enter
    the operators, only the norm in which the inf-sup constant is measured.
    """
    nx, nm = s.dim_X, s.dim_M
    E = np.zeros((nx + nm, nx + nm))
    E[:nx, :nx] = s.RX
    A = np.block([[s.A0, s.B.T], [s.B, np.zeros((nm, nm))]])
    return Pencil(E, A)


def _inv_sqrt(M: np.ndarray) -> np.ndarray:
    if M.size == 0:
        return M
    w, V = np.linalg.eigh((M + M.T) / 2)
    return (V / np.sqrt(w)) @ V.T


@dataclass(frozen=True)
class InfSupResult:
    beta: float
    satisfied: bool
    pivot_sigma_min_obs: float
    pivot_sigma_min_ctrl: float
    obs_pivot_invertible: bool = True
    ctrl_pivot_invertible: bool = True

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "satisfied": self.satisfied,
            "pivot_sigma_min_obs": self.pivot_sigma_min_obs,
            "pivot_sigma_min_ctrl": self.pivot_sigma_min_ctrl,
            "obs_pivot_invertible": self.obs_pivot_invertible,
            "ctrl_pivot_invertible": self.ctrl_pivot_invertible,
        }


def inf_sup_constant(s: SaddleSpec, tol: Tolerance = DEFAULT_TOL) -> InfSupResult:
    """``beta = inf_mu sup_v <B^T mu, v> / (|mu|_M |v|_X)``, from singular values
    of the whitened ``RX^{-1/2} B^T RM^{-1/2}``, compared with both pivots.

    Raises :class:`ToleranceError` when the three criteria disagree.
    """
    nx, nm = s.dim_X, s.dim_M
    if nm == 0:
        beta = float("inf")
        thr = 0.0
    else:
        W = _inv_sqrt(s.RX) @ s.B.T @ _inv_sqrt(s.RM)
        sv = singular_values(W)
        beta = 0.0 if nm > nx else float(sv[-1])
        thr = tol.threshold(float(sv[0]) if sv.size else 0.0, max(nx, nm))
    satisfied = bool(beta > thr)
    p = build_saddle_pencil(s)
    sc = PencilScale.of(p)
    obs = observation_reduce(p, tol, sc)
    ctrl = control_reduce(p, tol, sc)
    if not (satisfied == obs.pivot_invertible == ctrl.pivot_invertible):
        raise ToleranceError(
            f"inf-sup criteria disagree: beta {beta:.3g} ({satisfied}), observation pivot "
            f"{obs.pivot_invertible}, control pivot {ctrl.pivot_invertible}"
        )
    return InfSupResult(
        beta, satisfied, obs.pivot_sigma_min, ctrl.pivot_sigma_min,
        obs.pivot_invertible, ctrl.pivot_invertible,
    )


@dataclass(frozen=True, eq=False)
class SaddleLadder:
    dims: dict
    bases: dict
    expected: dict
    exact_sequences: dict

    @property
    def consistent(self) -> bool:
        return all(self.dims[k] == v for k, v in self.expected.items()) and not any(
            self.exact_sequences.values()
        )

    def to_dict(self) -> dict:
        return {"dims": self.dims, "expected": self.expected,
                "exact_sequences": self.exact_sequences, "consistent": self.consistent}


def saddle_reduction_ladder(s: SaddleSpec, tol: Tolerance = DEFAULT_TOL) -> SaddleLadder:
    """Every space produced by one observation and one control step, in both orders.

    With ``k = dim ker B`` the predicted dimensions are ``dim U*1 = k + dim M``
    and ``k`` for all four doubly reduced spaces.  Raises
    :class:`ToleranceError` on a mismatch.
    """
    p = build_saddle_pencil(s)
    sc = PencilScale.of(p)
    ch = mixed_chains(p, tol, sc)
    kerB = kernel_basis(s.B, tol, scale=float(np.linalg.norm(s.B, 2)) if s.B.size else 0.0,
                        dim=max(s.B.shape + (1,)))
    k = kerB.dim
    bases = {
        "U_obs": ch.obs.dom_map,
        "W_obs": ch.obs.codom_map,
        "ker_E": ch.ctrl.pivot_dom.basis,
        "A_ker_E": ch.ctrl.pivot_codom.basis,
        "U_obs_ctrl": ch.oc_dom,
        "W_obs_ctrl": ch.oc_codom,
        "U_ctrl": ch.ctrl.dom_map,
        "W_ctrl": ch.ctrl.codom_map,
        "U_ctrl_obs": ch.co_dom,
        "W_ctrl_obs": ch.co_codom,
    }
    dims = {key: int(B.shape[1]) for key, B in bases.items()}
    dims["ker_B"] = k
    expected = {
        "U_obs": k + s.dim_M,
        "U_obs_ctrl": k,
        "W_obs_ctrl": k,
        "U_ctrl_obs": k,
        "W_ctrl_obs": k,
        "ker_E": s.dim_M,
    }
    ladder = SaddleLadder(dims, bases, expected, exact_sequence_sums(p, tol, ch))
    if not ladder.consistent:
        bad = {key: (dims[key], v) for key, v in expected.items() if dims[key] != v}
        raise ToleranceError(f"saddle ladder mismatch (found, expected): {bad}")
    return ladder


@dataclass(frozen=True, eq=False)
class SaddleSolution:
    solution: np.ndarray | None
    verdict: dict
    residual: float | None = None

    def to_dict(self) -> dict:
        d = {"verdict": self.verdict}
        if self.solution is not None:
            d["solution"] = self.solution
            d["residual"] = self.residual
        return d


def solve_saddle(s: SaddleSpec, f, tol: Tolerance = DEFAULT_TOL) -> SaddleSolution:
    """Decide invertibility of the saddle operator two ways and solve along the chain.

    The operator is invertible exactly when the inf-sup condition holds and
    ``A0`` compressed to ``ker B`` is invertible.  The solve first fixes the
    component off ``ker B`` from the constraint, then the ``ker B`` component,
    then recovers the multiplier through the transpose of ``B``.
    """
    p = build_saddle_pencil(s)
    nx, nm = s.dim_X, s.dim_M
    f = np.asarray(f, dtype=float)
    if f.shape != (nx + nm,):
        raise InputError(f"right-hand side has shape {f.shape}, expected ({nx + nm},)")
    a_scale = float(np.linalg.norm(p.A, 2)) if p.A.size else 0.0
    thr = tol.threshold(a_scale, nx + nm)
    sv = singular_values(p.A)
    direct_sigma = float(sv[-1]) if sv.size else float("inf")
    direct = bool(direct_sigma > thr)

    infsup = inf_sup_constant(s, tol)
    b_scale = float(np.linalg.norm(s.B, 2)) if s.B.size else 0.0
    kerB = kernel_basis(s.B, tol, scale=b_scale, dim=max(s.B.shape + (1,)))
    i = kerB.basis
    K0 = i.T @ s.A0 @ i
    sk = singular_values(K0)
    kernel_sigma = float(sk[-1]) if sk.size else float("inf")
    kernel_ok = bool(kernel_sigma > tol.threshold(a_scale, max(nx, 1)))
    failed = []
    if not infsup.satisfied:
        failed.append("inf-sup")
    if not kernel_ok:
        failed.append("A0 on ker B")
    verdict = {
        "invertible": direct,
        "direct_sigma_min": direct_sigma,
        "inf_sup": infsup.satisfied,
        "beta": infsup.beta,
        "kernel_block_sigma_min": kernel_sigma,
        "failed": failed,
        "criteria_agree": direct == (infsup.satisfied and kernel_ok),
    }
    if not verdict["criteria_agree"]:
        raise ToleranceError(f"saddle invertibility criteria disagree: {verdict}")
    if not direct:
        return SaddleSolution(None, verdict)

    f1, f2 = f[:nx], f[nx:]
    Cx = complement(kerB).basis
    BC = s.B @ Cx
    w = np.linalg.solve(BC, f2) if nm else np.zeros(0)
    z = np.linalg.solve(K0, i.T @ (f1 - s.A0 @ Cx @ w)) if i.shape[1] else np.zeros(0)
    x = Cx @ w + i @ z
    mu = np.linalg.solve(BC.T, Cx.T @ (f1 - s.A0 @ x)) if nm else np.zeros(0)
    u = np.concatenate([x, mu])
    res = float(np.linalg.norm(p.A @ u - f))
    return SaddleSolution(u, verdict, res)


# -- packaged examples -------------------------------------------------------

def example_multiplication_discrete(
    n_left: int, n_J: int, n_right: int, h: float = 1.0, staggered: bool = True
) -> tuple[Pencil, dict]:
    """Finite-difference model of ``E u' + A u`` with ``E`` multiplication by the
    indicator of the complement of an interval J and ``A`` a first derivative.

    ``staggered=True`` puts ``u`` on N nodes and both operators into the N + 1
    cells (``E`` averages the masked nodal values, ``A`` differences them with
    zero ends).  This pencil is control-reducible once with an invertible pivot,
    after which ``E`` is injective but not onto, so an observation reduction
    follows.  ``staggered=False`` gives the square variant ``E = diag(mask)``.

    The metadata lists the predicted structure; all of it is derived from the
    construction, not computed by the reduction engine.
    """
    for name, v in (("n_left", n_left), ("n_J", n_J), ("n_right", n_right)):
        if int(v) != v or v < 0:
            raise InputError(f"{name} must be a nonnegative integer")
    N = n_left + n_J + n_right
    if N < 1:
        raise InputError("the grid needs at least one node")
    if not h > 0:
        raise InputError("h must be positive")
    mask = np.ones(N)
    mask[n_left:n_left + n_J] = 0.0
    if staggered:
        A = (np.eye(N + 1, N) - np.eye(N + 1, N, k=-1)) / h
        E = (np.eye(N + 1, N) + np.eye(N + 1, N, k=-1)) / 2 * mask
        meta = {
            "staggered": True,
            "nodes": N,
            "kernel_E": n_J,
            "control_pivot_shape": [n_J, n_J],
            "control_pivot_invertible": True,
            "after_control_shape": [N + 1 - n_J, N - n_J],
            "after_control_E_injective": True,
            "after_control_cokernel_E": 1,
            "observation_pivot_shape": [1, 1],
            "observation_pivot_invertible": True,
            "regular": False,
        }
    else:
        A = (np.eye(N) - np.eye(N, k=-1)) / h
        E = np.diag(mask)
        meta = {
            "staggered": False,
            "nodes": N,
            "kernel_E": n_J,
            "irreducible": n_J == 0,
        }
    return Pencil(E, A), meta


def example_mixed_poisson(n: int) -> SaddleSpec:
    """1-D mixed Poisson: flux on ``n + 1`` nodes (P1), potential on ``n`` cells (P0).

    ``A0`` is the P1 mass matrix, ``B`` the cellwise divergence, ``RM`` the
    P0 mass and ``RX`` the discrete H(div) Gram matrix ``A0 + B^T RM^{-1} B``.
    """
    if int(n) != n or n < 2:
        raise InputError("n must be an integer >= 2")
    h = 1.0 / n
    A0 = np.zeros((n + 1, n + 1))
    for c in range(n):
        A0[c:c + 2, c:c + 2] += h / 6 * np.array([[2.0, 1.0], [1.0, 2.0]])
    B = np.zeros((n, n + 1))
    B[np.arange(n), np.arange(n)] = -1.0
    B[np.arange(n), np.arange(n) + 1] = 1.0
    RM = h * np.eye(n)
    RX = A0 + B.T @ B / h
    return SaddleSpec(A0, B, RX, RM)
