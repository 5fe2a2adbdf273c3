import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from detent import ConditionPair, check_permitted, condition_in, condition_out, condition_pair, enumerate_pmf
from detent.conditioning import eliminate_one, exclude_update, include_update
from detent.errors import NotPermitted, PivotTooSmall, UsageError


def _proj(on_empty, seed, size=6, rank=3):
    return on_empty(oracles.random_projection(size, rank, np.random.default_rng(seed)))


def test_pair_validation():
    with pytest.raises(UsageError):
        ConditionPair((1, 2), (2,))
    with pytest.raises(UsageError):
        ConditionPair((1, 1), ())
    cp = ConditionPair.from_sample(np.array([True, False, True, False]), within=[0, 1, 2])
    assert cp.C == (0, 2) and cp.D == (1,)


def test_eliminate_one_drops_rank(on_empty):
    k = _proj(on_empty, 1)
    e = eliminate_one(k, 0)
    assert e.rank() == 2
    assert np.allclose(e.matrix[0], 0, atol=1e-12)


def test_pivot_guard(on_empty):
    k = on_empty(np.diag([1.0, 0.0]))
    with pytest.raises(PivotTooSmall):
        eliminate_one(k, 1)


def test_condition_in_out_shapes(on_empty):
    k = _proj(on_empty, 2)
    a = condition_in(k, [0])
    b = condition_out(k, [1])
    assert a.matrix[0, 0] == pytest.approx(1.0)
    assert b.matrix[1, 1] == pytest.approx(0.0, abs=1e-12)
    assert a.rank() == b.rank() == 3


def test_not_permitted(on_empty):
    k = on_empty(np.diag([1.0, 0.0, 1.0]))
    with pytest.raises(NotPermitted) as exc:
        condition_pair(k, ConditionPair((1,), ()))
    assert exc.value.min_eigenvalue == pytest.approx(0.0)
    with pytest.raises(NotPermitted):
        condition_pair(k, ConditionPair((), (0,)))
    rep = check_permitted(k, ConditionPair((0,), (1,)))
    assert rep.permitted


def test_contractions_rejected(on_empty):
    k = on_empty(np.eye(3) / 2)
    with pytest.raises(UsageError):
        condition_in(k, [0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 8))
def test_conditional_law_matches_bruteforce(seed, size):
    from detent import GroundSet, validate_kernel
    from detent.graph import empty_graph

    rng = np.random.default_rng(seed)
    rank = int(rng.integers(1, size))
    k = validate_kernel(oracles.random_projection(size, rank, rng), GroundSet(empty_graph(size)))
    pmf = oracles.dpp_pmf(k.matrix, tol=1e-14)
    # choose a positive-probability configuration and condition on part of it
    atoms = list(pmf)
    a = set(atoms[int(rng.integers(len(atoms)))])
    within = rng.choice(size, size=int(rng.integers(1, size)), replace=False).tolist()
    cp = ConditionPair(tuple(x for x in within if x in a), tuple(x for x in within if x not in a))
    got = condition_pair(k, cp)
    assert oracles.tv(enumerate_pmf(got).as_dict(), oracles.conditional_law(pmf, cp.C, cp.D)) < 1e-9
    other = condition_pair(k, cp, order="out-first")
    assert np.max(np.abs(got.matrix - other.matrix)) < 1e-9
    assert got.is_projection and got.rank() == rank


def test_schur_updates_match_conditional_marginals(on_empty):
    t = on_empty(oracles.random_contraction(4, np.random.default_rng(3)))
    pmf = oracles.dpp_pmf(t.matrix)
    for j, include in itertools.product(range(4), (True, False)):
        m = include_update(t.matrix.copy(), j) if include else exclude_update(t.matrix.copy(), j)
        law = oracles.conditional_law(pmf, [j] if include else [], [] if include else [j])
        for e in range(4):
            want = sum(p for a, p in law.items() if e in a)
            assert m[e, e] == pytest.approx(want, abs=1e-10)
