import json

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from corpus import random_blocks
from pencilred.commutativity import commute_check
from pencilred.defects import defect_profile, shift_law_check
from pencilred.io import canonical_dumps, input_digest, pencil_from_dict, pencil_to_dict
from pencilred.pencil import apply_equivalence, random_equivalence, random_pencil, synthesize
from pencilred.reduction import PencilScale, irreducible_core, normality_check
from pencilred.spectrum import resolvent_invariance_check, sample_lambdas

seeds = st.integers(0, 2**31 - 1)
cfg = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def gaussian(seed):
    rng = np.random.default_rng(seed)
    m, n = (int(x) for x in rng.integers(1, 9, size=2))
    r = min(m, n)
    return random_pencil(rng, m, n, int(rng.integers(0, r + 1)), int(rng.integers(0, r + 1)))


def kron(seed, square=False):
    rng = np.random.default_rng(seed)
    return synthesize(random_blocks(rng, 4, 3, square), scramble=True, seed=seed)


@cfg
@given(seeds, st.booleans())
def test_defects_invariant_under_equivalence(seed, use_blocks):
    p = kron(seed) if use_blocks else gaussian(seed)
    q = apply_equivalence(p, random_equivalence(p.m, p.n, seed + 1))
    assert defect_profile(p).stripped() == defect_profile(q).stripped()


@cfg
@given(seeds)
def test_shift_laws(seed):
    assert shift_law_check(kron(seed))


@cfg
@given(seeds)
def test_commutativity_and_normality(seed):
    p = gaussian(seed)
    c = commute_check(p)
    assert c.equivalent and c.pivot_equivalences_hold
    assert normality_check(p).normal


@cfg
@given(seeds)
def test_chain_resolvent_invariance(seed):
    p = kron(seed, square=True)
    sc = PencilScale.of(p)
    lams = sample_lambdas(p, count=8, seed=seed, include_zero=False)
    cur = p
    for step in irreducible_core(p, scale=sc):
        assert resolvent_invariance_check(cur, step, lams, scale=sc)
        cur = step.reduced


@cfg
@given(seeds)
def test_json_round_trip(seed):
    p = gaussian(seed)
    q = pencil_from_dict(json.loads(canonical_dumps(pencil_to_dict(p))))
    assert q == p and input_digest(q) == input_digest(p)
