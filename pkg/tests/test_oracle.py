"""Exact rational reductions against the floating-point engine on small pencils."""

import numpy as np
import pytest
import sympy as sp

import exact_oracle
from corpus import HAND
from pencilred.defects import defect_profile
from pencilred.pencil import Pencil, parse_blocks, synthesize


@pytest.mark.parametrize("name", sorted(HAND))
def test_hand_profiles(name):
    p = HAND[name]
    a, bo, bc, reg = exact_oracle.profile(p.E, p.A)
    prof = defect_profile(p)
    assert (prof.alpha, prof.beta_obs, prof.beta_ctrl, prof.regular) == (a, bo, bc, reg)


def test_known_values():
    assert exact_oracle.profile([[0]], [[1]])[0] == (1,)
    assert exact_oracle.profile([[0, 1], [0, 0]], np.eye(2))[0] == (0, 1)
    assert exact_oracle.det_pencil([[0, 1], [0, 0]], np.eye(2)) == 1
    assert 1 in exact_oracle.profile([[1, 0]], [[0, 1]])[2]
    assert exact_oracle.profile([[1], [0]], [[0], [1]])[1][1] == 1


@pytest.mark.parametrize("blocks", ["N(3)", "J(2,2),N(1)", "L(1)", "LT(1)", "L(0),J(1,1)", "LT(0),N(2)", "L(2),LT(1)"])
def test_integer_block_pencils(blocks):
    p = synthesize(parse_blocks(blocks))
    a, bo, bc, reg = exact_oracle.profile(p.E, p.A)
    prof = defect_profile(p)
    assert prof.stripped() == tuple(tuple(np.trim_zeros(np.array(s, int), "b")) for s in (a, bo, bc))
    assert prof.regular == reg
    if p.is_square:
        assert (exact_oracle.det_pencil(p.E, p.A) != 0) == reg


def test_random_integer_pencils():
    rng = np.random.default_rng(5)
    for _ in range(30):
        m, n = rng.integers(1, 4, size=2)
        E = rng.integers(-1, 2, size=(m, n)) * (rng.random((m, n)) < 0.5)
        A = rng.integers(-1, 2, size=(m, n))
        a, bo, bc, reg = exact_oracle.profile(E, A)
        prof = defect_profile(Pencil(E.astype(float), A.astype(float)))
        assert prof.regular == reg
        assert prof.stripped() == tuple(tuple(np.trim_zeros(np.array(x, int), "b")) for x in (a, bo, bc))
        if m == n:
            assert reg == (sp.simplify(exact_oracle.det_pencil(E, A)) != 0)
