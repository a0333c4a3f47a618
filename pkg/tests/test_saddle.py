import numpy as np
import pytest

from pencilred.defects import defect_profile
from pencilred.errors import InputError
from pencilred.reduction import PencilScale, control_reduce, is_control_irreducible, normality_check, observation_reduce
from pencilred.saddle import (
    SaddleSpec,
    build_saddle_pencil,
    example_mixed_poisson,
    example_multiplication_discrete,
    inf_sup_constant,
    saddle_reduction_ladder,
    solve_saddle,
)

S21 = SaddleSpec(np.eye(2), [[1.0, 0.0]])


def test_spec_validation():
    with pytest.raises(InputError):
        SaddleSpec(np.eye(2), [[1.0, 0.0, 0.0]])
    with pytest.raises(InputError):
        SaddleSpec(np.eye(2), [[1.0, 0.0]], RX=-np.eye(2))
    s = SaddleSpec.from_dict({"A0": [[1, 0], [0, 1]], "B": [[1, 0]]})
    assert np.array_equal(s.RM, np.eye(1))


def test_assembly():
    p = build_saddle_pencil(S21)
    assert np.array_equal(p.E, np.diag([1.0, 1.0, 0.0]))
    assert np.array_equal(p.A, [[1, 0, 1], [0, 1, 0], [1, 0, 0]])
    assert not defect_profile(build_saddle_pencil(SaddleSpec(np.eye(2), np.zeros((1, 2))))).regular


def test_inf_sup_examples():
    r = inf_sup_constant(S21)
    assert r.beta == pytest.approx(1.0) and r.satisfied
    r = inf_sup_constant(SaddleSpec(np.eye(2), np.zeros((1, 2))))
    assert r.beta == 0 and not r.satisfied
    r = inf_sup_constant(SaddleSpec(np.eye(2), [[1.0, 0.0], [1.0, 0.0]]))
    assert r.beta < 1e-12 and not r.satisfied


def test_inf_sup_with_gram_matrices():
    # scaling the M norm by 4 halves the constant
    s = SaddleSpec(np.eye(2), [[1.0, 0.0]], RM=4 * np.eye(1))
    assert inf_sup_constant(s).beta == pytest.approx(0.5)


def test_ladder():
    lad = saddle_reduction_ladder(S21)
    assert lad.dims["ker_B"] == 1 and lad.dims["U_obs"] == 2 and lad.dims["U_obs_ctrl"] == 1
    lad = saddle_reduction_ladder(SaddleSpec(np.eye(2), [[1.0, 2.0], [0.0, 1.0]]))
    assert lad.dims["ker_B"] == 0 and lad.dims["U_obs"] == 2
    rng = np.random.default_rng(0)
    B = rng.standard_normal((3, 7))
    lad = saddle_reduction_ladder(SaddleSpec(rng.standard_normal((7, 7)), B))
    assert lad.dims["U_obs_ctrl"] == 4


def test_solve_examples():
    p = build_saddle_pencil(S21)
    r = solve_saddle(S21, [1.0, 0.0, 0.0])
    assert np.allclose(r.solution, np.linalg.solve(p.A, [1, 0, 0]), atol=1e-10)
    r = solve_saddle(SaddleSpec(np.diag([1.0, 0.0]), [[1.0, 0.0]]), [1.0, 0.0, 0.0])
    assert r.solution is None and r.verdict["inf_sup"] and r.verdict["failed"] == ["A0 on ker B"]
    r = solve_saddle(SaddleSpec(np.eye(2), np.zeros((1, 2))), [1.0, 0.0, 0.0])
    assert r.solution is None and "inf-sup" in r.verdict["failed"]


def test_mixed_poisson():
    s = example_mixed_poisson(4)
    assert normality_check(build_saddle_pencil(s)).normal
    assert inf_sup_constant(s).satisfied
    s2 = example_mixed_poisson(2)
    f = np.arange(5.0)
    r = solve_saddle(s2, f)
    assert np.allclose(r.solution, np.linalg.solve(build_saddle_pencil(s2).A, f), atol=1e-10)
    assert np.allclose(solve_saddle(s2, np.zeros(5)).solution, 0)
    with pytest.raises(InputError):
        example_mixed_poisson(1)


def _check_metadata(p, meta):
    sc = PencilScale.of(p)
    c = control_reduce(p, scale=sc)
    assert c.pivot_dom.dim == meta["kernel_E"]
    assert list(c.pivot.shape) == meta["control_pivot_shape"]
    assert c.pivot_invertible == meta["control_pivot_invertible"]
    assert list(c.reduced.shape) == meta["after_control_shape"]
    assert is_control_irreducible(c.reduced, scale=sc) == meta["after_control_E_injective"]
    coker = c.reduced.m - np.linalg.matrix_rank(c.reduced.E)
    assert coker == meta["after_control_cokernel_E"]
    o = observation_reduce(c.reduced, scale=sc)
    assert list(o.pivot.shape) == meta["observation_pivot_shape"]
    assert o.pivot_invertible == meta["observation_pivot_invertible"]
    assert defect_profile(p).regular == meta["regular"]


@pytest.mark.parametrize("sizes", [(2, 2, 2), (2, 0, 2), (3, 4, 1), (1, 5, 1), (4, 3, 6)])
def test_multiplication_example(sizes):
    p, meta = example_multiplication_discrete(*sizes, h=0.25)
    assert p.shape == (sum(sizes) + 1, sum(sizes))
    _check_metadata(p, meta)


def test_multiplication_square_variant():
    p, meta = example_multiplication_discrete(2, 0, 2, staggered=False)
    assert np.array_equal(p.E, np.eye(4)) and meta["irreducible"]
    p, meta = example_multiplication_discrete(2, 2, 2, staggered=False)
    assert control_reduce(p).pivot_dom.dim == 2
    with pytest.raises(InputError):
        example_multiplication_discrete(0, 0, 0)
