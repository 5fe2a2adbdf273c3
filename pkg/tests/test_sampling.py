import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from detent import enumerate_pmf, inclusion_probability, sample_dpp, sample_many, transfer_current, wilson_ust
from detent.errors import Disconnected, GroundSetTooLarge, KernelDrift
from detent.graph import build_graph, generate_family
from detent.sampling import clip_probability, wilson_many


def test_single_draw_matches_batch():
    k = transfer_current(generate_family("complete", 4))
    batch = sample_many(k, 30, seed=11)
    for d in range(30):
        assert np.array_equal(sample_dpp(k, 11, draw=d).subset, batch[d])


def test_batch_start_offset(on_empty):
    t = on_empty(oracles.random_contraction(5, np.random.default_rng(1)))
    full = sample_many(t, 20, seed=3)
    assert np.array_equal(sample_many(t, 5, seed=3, start=10), full[10:15])
    assert np.array_equal(sample_dpp(t, 3, draw=12).subset, full[12])


def test_projection_draws_have_fixed_size():
    k = transfer_current(generate_family("torus2d", 3))
    x = sample_many(k, 200, seed=0)
    assert set(x.sum(axis=1).tolist()) == {8}


def test_trace_records_every_step():
    k = transfer_current(generate_family("cycle", 4))
    d = sample_dpp(k, 5, trace=True)
    assert [i for i, _ in d.trace] == list(range(4))
    assert all(0 <= p <= 1 for _, p in d.trace)
    assert len(d.elements) == 3


def test_sampled_trees_are_spanning_trees():
    g = generate_family("torus2d", 3)
    trees = set(oracles.spanning_trees(g.vertex_count, g.edges))
    x = sample_many(transfer_current(g), 100, seed=2)
    for row in x:
        assert tuple(np.flatnonzero(row).tolist()) in trees


def test_clip_probability():
    assert clip_probability(np.array([-1e-13, 1 + 1e-13, 0.3])).tolist() == [0.0, 1.0, 0.3]
    with pytest.raises(KernelDrift):
        clip_probability(np.array([1.1]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_enumerate_pmf_matches_minor_formula(seed, size):
    from detent import GroundSet, validate_kernel
    from detent.graph import empty_graph

    t = validate_kernel(oracles.random_contraction(size, np.random.default_rng(seed)), GroundSet(empty_graph(size)))
    got = enumerate_pmf(t).as_dict()
    assert oracles.tv(got, oracles.dpp_pmf(t.matrix)) < 1e-9
    assert math.fsum(got.values()) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_inclusion_probability_is_principal_minor(seed, size):
    from detent import GroundSet, validate_kernel
    from detent.graph import empty_graph

    rng = np.random.default_rng(seed)
    t = validate_kernel(oracles.random_contraction(size, rng), GroundSet(empty_graph(size)))
    F = sorted(rng.choice(size, size=int(rng.integers(1, size + 1)), replace=False).tolist())
    pmf = oracles.dpp_pmf(t.matrix)
    want = math.fsum(p for a, p in pmf.items() if set(F) <= set(a))
    assert inclusion_probability(t, F) == pytest.approx(want, abs=1e-10)


def test_enumeration_size_guard():
    k = transfer_current(generate_family("torus2d", 4))
    with pytest.raises(GroundSetTooLarge):
        enumerate_pmf(k)


def test_wilson_weighted_law():
    g = build_graph([(0, 1, 2.0), (1, 2, 1.0), (0, 2, 0.5), (2, 3, 1.0), (1, 3, 3.0)], 3)
    law, _ = oracles.tree_law(4, g.edges, [w for _, _, w in g.edges])
    trees = wilson_many(g, 40_000, seed=4)
    emp = {}
    for t in trees:
        emp[t] = emp.get(t, 0) + 1 / len(trees)
    assert oracles.tv(emp, law) < 0.02
    assert wilson_ust(g, 4, draw=7) == trees[7]


def test_wilson_disconnected():
    with pytest.raises(Disconnected):
        wilson_ust(build_graph([(0, 1), (2, 3)], 1), 0)
