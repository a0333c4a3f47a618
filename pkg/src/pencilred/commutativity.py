"""Canonical identification of the two mixed reductions.

Reducing by observation then control, or by control then observation, gives
two systems related by the natural maps

* ``JU: U1/ker E1 -> (U/ker E)``, ``u + ker E1 -> u + ker E``,
* ``JW: W1/A ker E1 -> (W/A ker E)``, ``w + A ker E1 -> w + A ker E``,

whose images are the observation-reduced spaces of the control-reduced
system.  With orthonormal representatives both maps are compressions
between embedded bases, hence have norm at most one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ToleranceError
from .pencil import Pencil
from .reduction import (
    PencilScale,
    ReductionStep,
    control_reduce,
    observation_reduce,
    pencil_subspaces,
)
from .subspace import DEFAULT_TOL, Tolerance, intersect_basis, numerical_rank, singular_values


@dataclass(frozen=True, eq=False)
class MixedChains:
    obs: ReductionStep
    obs_ctrl: ReductionStep
    ctrl: ReductionStep
    ctrl_obs: ReductionStep

    # bases of the doubly reduced spaces, embedded in the original U and W
    @property
    def oc_dom(self) -> np.ndarray:
        return self.obs.dom_map @ self.obs_ctrl.dom_map

    @property
    def oc_codom(self) -> np.ndarray:
        return self.obs.codom_map @ self.obs_ctrl.codom_map

    @property
    def co_dom(self) -> np.ndarray:
        return self.ctrl.dom_map @ self.ctrl_obs.dom_map

    @property
    def co_codom(self) -> np.ndarray:
        return self.ctrl.codom_map @ self.ctrl_obs.codom_map


def mixed_chains(p: Pencil, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None) -> MixedChains:
    sc = PencilScale.of(p) if scale is None else scale
    obs = observation_reduce(p, tol, sc)
    ctrl = control_reduce(p, tol, sc)
    return MixedChains(
        obs=obs,
        obs_ctrl=control_reduce(obs.reduced, tol, sc),
        ctrl=ctrl,
        ctrl_obs=observation_reduce(ctrl.reduced, tol, sc),
    )


def _natural_map(source: np.ndarray, quotient_rep: np.ndarray, target_coords: np.ndarray):
    """Matrix of ``x -> class of x in the quotient``, expressed in ``target_coords``.

    ``source`` embeds the domain, ``quotient_rep`` is the complement basis of
    the quotient, ``target_coords`` the basis of the image subspace inside the
    quotient coordinates.  Returns the matrix and the residual of the image
    outside the target subspace.
    """
    coords = quotient_rep.conj().T @ source
    J = target_coords.conj().T @ coords
    residual = coords - target_coords @ J
    res = float(np.linalg.norm(residual, 2)) if residual.size else 0.0
    return J, res


def _check_iso(J: np.ndarray, name: str, tol: Tolerance, dim: int):
    s = singular_values(J)
    if J.shape[0] != J.shape[1]:
        raise ToleranceError(f"{name} is not square: {J.shape}")
    if s.size and not s[-1] > tol.threshold(1.0, dim):
        raise ToleranceError(f"{name} is numerically singular (sigma_min {s[-1]:.3g})")


def build_JU(p: Pencil, tol: Tolerance = DEFAULT_TOL, chains: MixedChains | None = None) -> np.ndarray:
    ch = mixed_chains(p, tol) if chains is None else chains
    J, _ = _natural_map(ch.oc_dom, ch.ctrl.dom_map, ch.ctrl_obs.dom_map)
    _check_iso(J, "JU", tol, max(p.shape + (1,)))
    return J


def build_JW(p: Pencil, tol: Tolerance = DEFAULT_TOL, chains: MixedChains | None = None) -> np.ndarray:
    ch = mixed_chains(p, tol) if chains is None else chains
    J, _ = _natural_map(ch.oc_codom, ch.ctrl.codom_map, ch.ctrl_obs.codom_map)
    _check_iso(J, "JW", tol, max(p.shape + (1,)))
    return J


@dataclass(frozen=True, eq=False)
class CommutativityCertificate:
    JU: np.ndarray
    JW: np.ndarray
    norm_JU: float
    norm_JW: float
    sigma_min_JU: float
    sigma_min_JW: float
    image_residual_JU: float
    image_residual_JW: float
    intertwine_residual_E: float
    intertwine_residual_A: float
    residual_bound: float
    equivalent: bool
    pivot_equivalences_hold: bool
    pivots: dict
    exact_sequences: dict

    def to_dict(self) -> dict:
        return {
            "JU": self.JU,
            "JW": self.JW,
            "norm_JU": self.norm_JU,
            "norm_JW": self.norm_JW,
            "sigma_min_JU": self.sigma_min_JU,
            "sigma_min_JW": self.sigma_min_JW,
            "image_residual_JU": self.image_residual_JU,
            "image_residual_JW": self.image_residual_JW,
            "intertwine_residual_E": self.intertwine_residual_E,
            "intertwine_residual_A": self.intertwine_residual_A,
            "residual_bound": self.residual_bound,
            "equivalent": self.equivalent,
            "pivot_equivalences_hold": self.pivot_equivalences_hold,
            "pivots": self.pivots,
            "exact_sequences": self.exact_sequences,
        }


def _sigma_min(J: np.ndarray) -> float:
    if J.shape[0] != J.shape[1]:
        return 0.0
    s = singular_values(J)
    return float(s[-1]) if s.size else float("inf")


def _norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def commute_check(p: Pencil, tol: Tolerance = DEFAULT_TOL, residual_rtol: float = 1e-8) -> CommutativityCertificate:
    """Build both mixed chains, the maps JU and JW, and test that they intertwine.

    Never raises on mathematical failure; everything is recorded.
    """
    sc = PencilScale.of(p)
    ch = mixed_chains(p, tol, sc)
    JU, res_u = _natural_map(ch.oc_dom, ch.ctrl.dom_map, ch.ctrl_obs.dom_map)
    JW, res_w = _natural_map(ch.oc_codom, ch.ctrl.codom_map, ch.ctrl_obs.codom_map)
    oc, co = ch.obs_ctrl.reduced, ch.ctrl_obs.reduced
    if JU.shape == (co.n, oc.n) and JW.shape == (co.m, oc.m):
        res_E = _norm(JW @ oc.E - co.E @ JU)
        res_A = _norm(JW @ oc.A - co.A @ JU)
    else:
        res_E = res_A = float("inf")
    bound = residual_rtol * (sc.e + sc.a)
    iso_thr = tol.threshold(1.0, sc.dim)
    smin_u, smin_w = _sigma_min(JU), _sigma_min(JW)
    equivalent = (
        smin_u > iso_thr
        and smin_w > iso_thr
        and res_u <= bound + iso_thr
        and res_w <= bound + iso_thr
        and res_E <= bound
        and res_A <= bound
    )
    pivots = {
        "obs": ch.obs.pivot_invertible,
        "ctrl_obs": ch.ctrl_obs.pivot_invertible,
        "ctrl": ch.ctrl.pivot_invertible,
        "obs_ctrl": ch.obs_ctrl.pivot_invertible,
        "ker_ctrl": ch.ctrl.pivot_kernel_dim,
        "ker_obs_ctrl": ch.obs_ctrl.pivot_kernel_dim,
    }
    pivot_ok = (
        pivots["obs"] == pivots["ctrl_obs"]
        and pivots["ctrl"] == pivots["obs_ctrl"]
        and pivots["ker_ctrl"] == pivots["ker_obs_ctrl"]
    )
    return CommutativityCertificate(
        JU=JU,
        JW=JW,
        norm_JU=_norm(JU),
        norm_JW=_norm(JW),
        sigma_min_JU=smin_u,
        sigma_min_JW=smin_w,
        image_residual_JU=res_u,
        image_residual_JW=res_w,
        intertwine_residual_E=res_E,
        intertwine_residual_A=res_A,
        residual_bound=bound,
        equivalent=bool(equivalent),
        pivot_equivalences_hold=bool(pivot_ok),
        pivots=pivots,
        exact_sequences=exact_sequence_sums(p, tol, ch),
    )


def exact_sequence_sums(p: Pencil, tol: Tolerance = DEFAULT_TOL, chains: MixedChains | None = None) -> dict:
    """Alternating dimension sums along every row and column of the two
    interwoven diagrams, plus the kernel/cokernel sequence of ``E``.

    Each entry is zero when the corresponding sequence is exact.  Dimensions
    are taken from independently computed subspaces and pivots.
    """
    sc = PencilScale.of(p)
    ch = mixed_chains(p, tol, sc) if chains is None else chains
    S = pencil_subspaces(p, tol, sc)
    m, n = p.shape
    r = S.range_E.dim
    k, k1 = S.ker_E.dim, S.ker_E1.dim
    s = S.U1.dim
    j = S.A_ker_E.dim
    j_cap = intersect_basis(S.A_ker_E, S.range_E, tol).dim
    ctrl, obs = ch.ctrl, ch.obs
    oc, co = ch.obs_ctrl, ch.ctrl_obs
    dim_U1c = oc.reduced.n
    dim_W1c = oc.reduced.m
    dim_Uc = ctrl.reduced.n
    dim_Wc = ctrl.reduced.m
    coker_Ec = dim_Wc - numerical_rank(ctrl.reduced.E, tol, scale=sc.e, dim=sc.dim)
    beta_obs = obs.pivot_cokernel_dim
    beta_co = co.pivot_cokernel_dim
    ker_c = ctrl.pivot_kernel_dim
    ker_oc = oc.pivot_kernel_dim

    def alt(*dims):
        return int(sum((-1) ** i * d for i, d in enumerate(dims)))

    return {
        "kernel_cokernel": alt(k1, k, m - r, coker_Ec),
        "U_row_kernels": alt(k1, k, j - j_cap),
        "U_row_spaces": alt(s, n, m - r, beta_obs),
        "U_row_reduced": alt(dim_U1c, dim_Uc, coker_Ec, beta_co),
        "U_col_1": alt(k1, s, dim_U1c),
        "U_col_2": alt(k, n, dim_Uc),
        "U_col_3": alt(j - j_cap, m - r, coker_Ec),
        "U_col_4": alt(beta_obs, beta_co),
        "W_row_pivot_kernels": alt(ker_oc, ker_c),
        "W_row_kernels": alt(k1, k, k - k1),
        "W_row_spaces": alt(r, m, m - r),
        "W_row_reduced": alt(dim_W1c, dim_Wc, coker_Ec),
        "W_col_1": alt(ker_oc, k1, r, dim_W1c),
        "W_col_2": alt(ker_c, k, m, dim_Wc),
        "W_col_3": alt(k - k1, m - r, coker_Ec),
    }
