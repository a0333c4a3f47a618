import warnings

import numpy as np
import pytest

from corpus import P1, P2, P3, P4, P5
from pencilred.errors import PreconditionFailed
from pencilred.pencil import Pencil, parse_blocks, synthesize
from pencilred.reduction import PencilScale, control_reduce, irreducible_core, observation_reduce, reduce_chain
from pencilred.saddle import SaddleSpec, build_saddle_pencil
from pencilred.spectrum import (
    core_spectrum,
    five_lemma_predicates,
    reduce_to_ode,
    resolvent_invariance_check,
    resolvent_member,
    resolvent_nonempty_check,
    sample_lambdas,
    solve_linear,
)
from pencilred.subspace import Subspace, range_basis


def test_membership_examples():
    s = resolvent_member(P2, -1)
    assert not s.member and s.sigma_min < 1e-12
    assert all(resolvent_member(P1, lam).member for lam in (0, 1, -3.5, 2j))
    s = resolvent_member(P4, 0.3)
    assert not s.member and s.reason == "non-square"
    assert resolvent_member(Pencil.empty(), 1).member


def test_invariance_examples():
    # det(lam E + A) = 1 for P3, so every lambda is in the resolvent set
    lams = [0, -1, 2j]
    assert all(resolvent_member(P3, lam).member for lam in lams)
    assert resolvent_invariance_check(P3, observation_reduce(P3), lams)
    ch = reduce_chain(P5, ["obs", "obs"])
    lams = sample_lambdas(P5, count=19, seed=0)
    sc = PencilScale.of(P5)
    assert resolvent_invariance_check(P5, ch[0], lams, scale=sc)
    assert not any(resolvent_member(P5, lam).member for lam in lams)
    zero = Pencil([[0.0]], [[0.0]])
    assert not control_reduce(zero).pivot_invertible
    assert resolvent_invariance_check(zero, control_reduce(zero), lams)


def test_nonempty_resolvent_forces_injective_pivot():
    for p in (P1, P2, P3, P4, P5):
        assert resolvent_nonempty_check(p, sample_lambdas(p, seed=2))


def test_sample_lambdas():
    lams = sample_lambdas(P2, count=5, seed=0)
    assert lams[0] == 0 and len(lams) == 6
    assert all(abs(z) <= 3.0 + 1e-12 for z in lams)
    assert lams == sample_lambdas(P2, count=5, seed=0)


def test_five_lemma_examples():
    X = Subspace(2, np.eye(2)[:, :1])
    r = five_lemma_predicates(np.eye(2), X, X)
    assert r.all_hold and r.S_injective and r.quot_surjective
    r = five_lemma_predicates(np.diag([1.0, 0.0]), X, X)
    assert r.sub_injective and r.sub_surjective and not r.quot_injective and r.all_hold


def test_solve_linear():
    u, cert = solve_linear(np.eye(3), np.eye(3)[0], np.random.default_rng(0).standard_normal((3, 3)))
    assert np.allclose(u, np.eye(3)[0]) and cert.method == "chain"
    A = np.array([[2.0, 1.0], [0.0, 3.0]])
    u, cert = solve_linear(A, [1.0, 1.0], np.zeros((2, 2)))
    assert len(cert.step_kinds) == 1 and cert.pivot_sigma_min[0] > 0
    assert np.allclose(A @ u, [1, 1])
    p = build_saddle_pencil(SaddleSpec(np.eye(2), [[1.0, 0.0]]))
    u, cert = solve_linear(p.A, [1.0, 0.0, 0.0], p.E)
    assert cert.method == "chain"
    assert np.allclose(u, np.linalg.solve(p.A, [1.0, 0.0, 0.0]), atol=1e-10)


def test_solve_linear_fallbacks():
    with pytest.warns(RuntimeWarning):
        u, cert = solve_linear(np.zeros((2, 2)), [1.0, 0.0])
    assert cert.method == "lstsq"
    # singular pivot but invertible operator: direct solve
    E = np.zeros((2, 2))
    E[0, 0] = 1.0
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u, cert = solve_linear(A, [1.0, 2.0], E)
    assert np.allclose(A @ u, [1, 2])


def test_chain_solve_matches_dense():
    rng = np.random.default_rng(4)
    for i in range(40):
        p = synthesize(parse_blocks("J(2,0.7),N(3),J(1,-2)"), scramble=True, seed=i)
        f = rng.standard_normal(p.m)
        u, cert = solve_linear(p.A, f, p.E)
        assert cert.method == "chain"
        ref = np.linalg.solve(p.A, f)
        assert np.linalg.norm(u - ref) <= 1e-8 * np.linalg.norm(ref)


def test_reduce_to_ode():
    o = reduce_to_ode(Pencil(np.diag([1.0, 0.0]), np.eye(2)))
    assert np.allclose(o.ode_matrix, [[-1.0]]) and len(o.constraints) == 1
    o = reduce_to_ode(P3)
    assert o.ode_matrix.shape == (0, 0) and len(o.constraints) == 2
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    o = reduce_to_ode(Pencil(np.eye(2), A))
    assert np.allclose(o.ode_matrix, -A) and not o.constraints
    with pytest.raises(PreconditionFailed):
        reduce_to_ode(P4)
    with pytest.raises(PreconditionFailed, match="beta"):
        reduce_to_ode(Pencil(np.zeros((2, 2)), np.diag([1.0, 0.0])))


def test_core_spectrum():
    ev = core_spectrum(synthesize(parse_blocks("J(2,3)")))
    assert np.allclose(ev, [-3, -3])
    assert core_spectrum(P3).size == 0
    assert np.allclose(np.sort(core_spectrum(P2).real), [-2, -1])


def test_spectrum_matches_membership():
    rng = np.random.default_rng(8)
    for i in range(30):
        p = synthesize(parse_blocks("J(1,0.5),J(2,-1.25),N(2)"), scramble=True, seed=i)
        ev = core_spectrum(p)
        assert np.allclose(np.sort_complex(ev), np.sort_complex([-0.5, 1.25, 1.25]), atol=1e-6)
        for lam in sample_lambdas(p, count=20, seed=i, include_zero=False):
            near = np.min(np.abs(ev - lam)) < 1e-6
            assert resolvent_member(p, lam).member != near
        for lam in ev[:1]:
            assert not resolvent_member(p, lam).member
