import numpy as np

from corpus import HAND, P3, P4, random_corpus
from pencilred.commutativity import build_JU, build_JW, commute_check, exact_sequence_sums
from pencilred.pencil import Pencil
from pencilred.saddle import SaddleSpec, build_saddle_pencil


def test_identity_when_E_invertible():
    p = Pencil(np.eye(3), np.arange(9.0).reshape(3, 3))
    assert np.allclose(np.abs(build_JU(p)), np.eye(3))
    JW = build_JW(p)
    assert np.allclose(JW.T @ JW, np.eye(3))


def test_empty_maps():
    p = Pencil(np.diag([1.0, 0.0]), [[0.0, 1.0], [1.0, 0.0]])
    assert build_JU(p).shape == (0, 0)
    assert commute_check(p).equivalent


def test_saddle_JW_invertible():
    p = build_saddle_pencil(SaddleSpec(np.eye(3), [[1.0, 0.0, 0.0]]))
    JW = build_JW(p)
    assert JW.shape == (2, 2)
    assert np.linalg.svd(JW, compute_uv=False)[-1] > 0.5


def test_hand_pencils():
    for name, p in HAND.items():
        c = commute_check(p)
        assert c.equivalent and c.pivot_equivalences_hold, name
    c = commute_check(P3)
    assert all(c.pivots[k] for k in ("obs", "ctrl_obs", "ctrl", "obs_ctrl"))
    c = commute_check(P4)
    assert c.pivots["obs"] and c.pivots["ctrl_obs"]


def test_random_pencils_and_exact_sequences():
    for p in random_corpus(60, seed=11, max_dim=8):
        c = commute_check(p)
        assert c.equivalent
        assert c.norm_JU <= 1 + 1e-10 and c.norm_JW <= 1 + 1e-10
        assert not any(c.exact_sequences.values()), c.exact_sequences


def test_exact_sequence_keys():
    sums = exact_sequence_sums(P3)
    assert "kernel_cokernel" in sums and len(sums) == 15
    assert not any(sums.values())
