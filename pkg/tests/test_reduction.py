import numpy as np
import pytest

from corpus import P1, P2, P3, P4, P5
from pencilred.errors import PreconditionFailed
from pencilred.pencil import Pencil, parse_blocks, synthesize
from pencilred.reduction import (
    control_index_one,
    control_reduce,
    irreducible_core,
    is_irreducible,
    normality_check,
    observation_reduce,
    reduce_chain,
    variational_index_one_check,
    yagi_bound,
)


def test_observation_hand_pencils():
    st = observation_reduce(P2)
    assert st.reduced.shape == (2, 2) and st.pivot.shape == (0, 0) and st.pivot_invertible
    st = observation_reduce(P1)
    assert st.reduced.shape == (0, 0) and np.allclose(np.abs(st.pivot), 1) and st.pivot_invertible
    st = observation_reduce(P3)
    assert st.reduced.shape == (1, 1) and st.pivot_invertible
    assert np.allclose(st.reduced.E, 0) and np.allclose(np.abs(st.reduced.A), 1)
    assert np.allclose(np.abs(st.dom_map[:, 0]), [1, 0])


def test_control_hand_pencils():
    st = control_reduce(P4)
    assert st.pivot_dom.dim == 1 and st.pivot_codom.dim == 1 and st.pivot_invertible
    assert st.reduced.shape == (0, 1)
    st = control_reduce(Pencil([[0.0]], [[0.0]]))
    assert st.pivot.shape == (0, 1) and not st.pivot_invertible


def test_irreducibility():
    assert is_irreducible(P2)
    assert not is_irreducible(P1) and not is_irreducible(P4) and not is_irreducible(P5)
    assert is_irreducible(Pencil.empty())


def test_chains():
    ch = reduce_chain(P3, ["obs", "obs"])
    assert len(ch) == 2 and ch.final.shape == (0, 0)
    ch = reduce_chain(P5, ["obs", "obs"])
    assert ch[0].pivot_invertible and not ch[1].pivot_invertible
    assert ch[1].pivot.shape == (1, 0)
    core = irreducible_core(synthesize(parse_blocks("J(2,1),N(2)"), scramble=True, seed=1))
    assert core.final.shape == (2, 2) and is_irreducible(core.final)
    assert reduce_chain(P2, "obs").final is P2


def test_normality():
    assert normality_check(P4).normal
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = Pencil(rng.standard_normal((4, 2)) @ rng.standard_normal((2, 5)), rng.standard_normal((4, 5)))
        assert normality_check(p).normal


def test_control_index_one():
    assert not control_index_one(P3).index_one
    assert control_index_one(P1).index_one
    assert control_index_one(Pencil(np.diag([1.0, 0]), np.eye(2))).index_one


def test_variational_criterion():
    D = np.array([[1.0, 0.0, 0.0]])
    assert variational_index_one_check(D, np.eye(3) + 0.1 * np.ones((3, 3)))
    with pytest.raises(PreconditionFailed):
        variational_index_one_check(D, -np.eye(3))


def test_yagi_bound():
    assert yagi_bound(P3) == float("inf")
    assert yagi_bound(Pencil(np.eye(2), np.eye(2))) == pytest.approx(1.0)
    assert yagi_bound(Pencil(np.eye(2), -np.eye(2))) == 0.0
