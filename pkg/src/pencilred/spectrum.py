"""Resolvent sets, spectra and linear solves organised along reduction chains."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .defects import defect_profile
from .errors import InputError, PreconditionFailed, ToleranceError
from .pencil import Pencil
from .reduction import (
    OBS,
    PencilScale,
    ReductionStep,
    control_reduce,
    irreducible_core,
    is_irreducible,
    observation_reduce,
)
from .subspace import DEFAULT_TOL, Subspace, Tolerance, complement, numerical_rank, singular_values


@dataclass(frozen=True)
class ResolventSample:
    lam: complex
    sigma_min: float
    member: bool
    reason: str = ""

    def to_dict(self) -> dict:
        d = {"lambda": self.lam, "sigma_min": self.sigma_min, "member": self.member}
        if self.reason:
            d["reason"] = self.reason
        return d


def _norm(M) -> float:
    return float(np.linalg.norm(M, 2)) if np.size(M) else 0.0


def membership_threshold(
    p: Pencil, lam: complex, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None
) -> float:
    sc = PencilScale.of(p) if scale is None else scale
    return tol.threshold(abs(lam) * sc.e + sc.a, sc.dim)


def resolvent_member(
    p: Pencil, lam, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None
) -> ResolventSample:
    """Is ``lam E + A`` invertible?  Non-square pencils are never members.

    Inside a reduction chain pass the root pencil's ``scale``: a reduced
    pencil made of rounding noise must not be judged against its own norms.
    """
    lam = complex(lam)
    M = lam * p.E + p.A
    s = singular_values(M)
    if not p.is_square:
        smin = 0.0 if min(p.shape) < max(p.shape) else float(s[-1])
        return ResolventSample(lam, smin, False, "non-square")
    if p.n == 0:
        return ResolventSample(lam, float("inf"), True)
    smin = float(s[-1])
    return ResolventSample(lam, smin, bool(smin > membership_threshold(p, lam, tol, scale)))


def sample_lambdas(p: Pencil, count: int = 5, seed=None, include_zero: bool = True) -> list[complex]:
    """Uniform points in a disk of radius ``(||A|| + 1) / max(sigma_min^+(E), 1)``, plus 0.

    ``sigma_min^+`` is the smallest nonzero singular value of ``E``.
    """
    rng = np.random.default_rng(seed)
    s = singular_values(p.E)
    s = s[s > DEFAULT_TOL.threshold(s[0], max(p.shape))] if s.size else s
    smin = float(s[-1]) if s.size else 1.0
    radius = (p.norms()[1] + 1.0) / max(smin, 1.0)
    r = radius * np.sqrt(rng.uniform(size=count))
    theta = rng.uniform(0, 2 * np.pi, size=count)
    lams = [complex(x) for x in r * np.exp(1j * theta)]
    return ([0j] if include_zero else []) + lams


def resolvent_invariance_check(
    p: Pencil, step: ReductionStep, lambdas, tol: Tolerance = DEFAULT_TOL, scale: PencilScale | None = None
) -> bool:
    """An invertible pivot preserves the resolvent set, a singular one empties it."""
    sc = PencilScale.of(p) if scale is None else scale
    for lam in lambdas:
        parent = resolvent_member(p, lam, tol, sc).member
        if step.pivot_invertible:
            if parent != resolvent_member(step.reduced, lam, tol, sc).member:
                return False
        elif parent:
            return False
    return True


def resolvent_nonempty_check(p: Pencil, lambdas, tol: Tolerance = DEFAULT_TOL) -> bool:
    """If some sample lies in the resolvent set, ``A`` is injective on ``ker E``."""
    if any(resolvent_member(p, lam, tol).member for lam in lambdas):
        return control_reduce(p, tol).pivot_kernel_dim == 0
    return True


# -- five lemma ------------------------------------------------------------

@dataclass(frozen=True)
class FiveLemmaRecord:
    S_injective: bool
    S_surjective: bool
    sub_injective: bool
    sub_surjective: bool
    quot_injective: bool
    quot_surjective: bool
    implications: tuple[bool, bool, bool, bool, bool, bool]

    @property
    def all_hold(self) -> bool:
        return all(self.implications)


def five_lemma_predicates(S, Xsub: Subspace, Ysub: Subspace, tol: Tolerance = DEFAULT_TOL) -> FiveLemmaRecord:
    """Injectivity/surjectivity of ``S``, its restriction ``S'`` to ``Xsub -> Ysub``
    and its quotient ``[S]``, and the six implications linking them."""
    S = np.asarray(S)
    m, n = S.shape
    if Xsub.ambient_dim != n or Ysub.ambient_dim != m:
        raise InputError("subspaces do not match the operator shape")
    scale = _norm(S)
    dim = max(m, n, 1)
    thr = tol.threshold(scale, dim)
    if Ysub.residual_of(S @ Xsub.basis) > thr + 64 * np.finfo(float).eps * scale:
        raise InputError("S does not map Xsub into Ysub")
    Cx, Cy = complement(Xsub), complement(Ysub)
    Sp = Ysub.basis.conj().T @ S @ Xsub.basis
    Sq = Cy.basis.conj().T @ S @ Cx.basis

    def props(M):
        r = numerical_rank(M, tol, scale=scale, dim=dim) if M.size else 0
        return r == M.shape[1], r == M.shape[0]

    si, ss = props(S)
    pi, ps = props(Sp)
    qi, qs = props(Sq)
    imp = (
        (not si) or pi,
        (not ss) or qs,
        (not (ss and qi)) or ps,
        (not (ps and si)) or qi,
        (not (qs and ps)) or ss,
        (not (qi and pi)) or si,
    )
    return FiveLemmaRecord(si, ss, pi, ps, qi, qs, tuple(bool(x) for x in imp))


# -- solving A u = f along a chain -----------------------------------------

@dataclass
class SolveCertificate:
    method: str
    pivot_sigma_min: list = field(default_factory=list)
    step_kinds: list = field(default_factory=list)
    pivots_invertible: bool = True
    final_invertible: bool = True
    residual: float = 0.0
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "pivot_sigma_min": [None if np.isinf(s) else s for s in self.pivot_sigma_min],
            "step_kinds": self.step_kinds,
            "pivots_invertible": self.pivots_invertible,
            "final_invertible": self.final_invertible,
            "residual": self.residual,
            "warnings": self.warnings,
        }


def _solve_along(parents: list[Pencil], steps: list[ReductionStep], i: int, f: np.ndarray, final_thr: float):
    if i == len(steps):
        A = parents[i].A
        if A.size == 0:
            return np.zeros(A.shape[1], dtype=f.dtype)
        s = singular_values(A)
        if A.shape[0] != A.shape[1] or not s[-1] > final_thr:
            raise np.linalg.LinAlgError("final reduced operator is singular")
        return np.linalg.solve(A, f)
    p, st = parents[i], steps[i]
    Cu, Cw = st.pivot_dom.basis, st.pivot_codom.basis
    if st.kind == OBS:
        U1, W1 = st.dom_map, st.codom_map
        y = np.linalg.solve(st.pivot, Cw.conj().T @ f) if st.pivot.size else np.zeros(Cu.shape[1], dtype=f.dtype)
        rhs = W1.conj().T @ (f - p.A @ (Cu @ y))
        x = _solve_along(parents, steps, i + 1, rhs, final_thr)
        return U1 @ x + Cu @ y
    # control step: pivot_dom = ker E, pivot_codom = A ker E, dom/codom maps are the complements
    K, AK = Cu, Cw
    C, D = st.dom_map, st.codom_map
    x = _solve_along(parents, steps, i + 1, D.conj().T @ f, final_thr)
    rhs = AK.conj().T @ (f - p.A @ (C @ x))
    z = np.linalg.solve(st.pivot, rhs) if st.pivot.size else np.zeros(K.shape[1], dtype=f.dtype)
    return C @ x + K @ z


def solve_linear(A_op, f, E_aux=None, tol: Tolerance = DEFAULT_TOL):
    """Solve ``A_op u = f`` by block elimination along the reduction chain of ``(E_aux, A_op)``.

    When every pivot and the final reduced operator are invertible the chain
    solve is exact.  A singular pivot makes the chain uninformative, and the
    routine falls back to a direct solve (or least squares) with a warning.
    """
    A_op = np.asarray(A_op)
    E_aux = np.zeros_like(A_op, dtype=float) if E_aux is None else np.asarray(E_aux)
    p = Pencil(E_aux, A_op)
    if not p.is_square:
        raise InputError(f"A_op must be square, got {p.shape}")
    f = np.asarray(f)
    if f.ndim != 1 or f.shape[0] != p.m:
        raise InputError(f"right-hand side has shape {f.shape}, expected ({p.m},)")
    f = f.astype(np.result_type(f.dtype, p.A.dtype, float))
    sc = PencilScale.of(p)
    chain = irreducible_core(p, tol, sc)
    cert = SolveCertificate(
        method="chain",
        pivot_sigma_min=[st.pivot_sigma_min for st in chain],
        step_kinds=list(chain.kinds),
        pivots_invertible=chain.pivots_invertible,
    )
    u = None
    if chain.pivots_invertible:
        parents = [p] + [st.reduced for st in chain]
        try:
            u = _solve_along(parents, list(chain), 0, f, sc.threshold_a(tol))
        except np.linalg.LinAlgError:
            cert.final_invertible = False
    if u is None:
        s = singular_values(p.A)
        direct_ok = p.n == 0 or s[-1] > sc.threshold_a(tol)
        if direct_ok:
            cert.method = "direct"
            msg = "a pivot is singular; the reduced criterion is unavailable, solved directly"
            u = np.linalg.solve(p.A, f)
        else:
            cert.method = "lstsq"
            msg = "A_op is singular; returning a least-squares solution"
            u = np.linalg.lstsq(p.A, f, rcond=None)[0]
        cert.warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    cert.residual = _norm((p.A @ u - f)[:, None])
    return u, cert


# -- regular pencils: ODE extraction and spectrum ----------------------------

@dataclass(frozen=True, eq=False)
class OdeExtract:
    ode_matrix: np.ndarray
    state_embedding: np.ndarray
    constraints: list
    E_core: np.ndarray
    A_core: np.ndarray

    def to_dict(self) -> dict:
        return {
            "ode_matrix": self.ode_matrix,
            "state_embedding": self.state_embedding,
            "constraints": self.constraints,
        }


def _require_regular(p: Pencil, tol: Tolerance):
    prof = defect_profile(p, tol)
    if prof.regular:
        return
    if not p.is_square:
        raise PreconditionFailed(f"pencil is not square: {p.shape}")
    for name, seq in (("beta_obs", prof.beta_obs), ("beta_ctrl", prof.beta_ctrl)):
        for k, b in enumerate(seq, 1):
            if b:
                raise PreconditionFailed(f"pencil is not regular: {name}[{k}] = {b}")
    raise PreconditionFailed("pencil is not regular")


def reduce_to_ode(p: Pencil, tol: Tolerance = DEFAULT_TOL, max_steps: int | None = None) -> OdeExtract:
    """Observation-reduce a regular pencil until ``E`` is invertible.

    For ``E u' + A u = f`` each step splits ``u = U1 x + C y``; the part
    ``y = pivot^{-1} Cw^H f`` is algebraic and recorded as a constraint.  The
    remaining state obeys ``x' = ode_matrix x + E_core^{-1} (projected f)``.
    """
    _require_regular(p, tol)
    sc = PencilScale.of(p)
    if max_steps is None:
        max_steps = p.n + 1
    embed = np.eye(p.n, dtype=p.E.dtype)
    codom = np.eye(p.m, dtype=p.E.dtype)
    current = p
    constraints = []
    for k in range(max_steps + 1):
        if is_irreducible(current, tol, sc):
            break
        if k == max_steps:
            raise ToleranceError("observation chain exceeded max_steps on a regular pencil")
        st = observation_reduce(current, tol, sc)
        if not st.pivot_invertible:
            raise ToleranceError("regular pencil produced a singular observation pivot")
        constraints.append({
            "step": k + 1,
            "kept": embed @ st.dom_map,
            "eliminated": embed @ st.pivot_dom.basis,
            "pivot_inverse": np.linalg.inv(st.pivot) if st.pivot.size else st.pivot.T,
            "rhs_projection": (codom @ st.pivot_codom.basis).conj().T,
        })
        embed = embed @ st.dom_map
        codom = codom @ st.codom_map
        current = st.reduced
    Ec, Ac = current.E, current.A
    ode = -np.linalg.solve(Ec, Ac) if Ec.size else np.zeros((0, 0), dtype=Ec.dtype)
    return OdeExtract(ode, embed, constraints, Ec, Ac)


def core_spectrum(p: Pencil, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """The finite ``lam`` with ``lam E + A`` singular, from the irreducible core only."""
    ode = reduce_to_ode(p, tol)
    if ode.ode_matrix.size == 0:
        return np.zeros(0, dtype=complex)
    return np.sort_complex(np.linalg.eigvals(ode.ode_matrix).astype(complex))
