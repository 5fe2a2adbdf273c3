import numpy as np
from hypothesis import given, settings, strategies as st

from detent import rng


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**63), st.lists(st.integers(0, 2**40), min_size=1, max_size=20), st.integers(1, 30))
def test_batch_equals_single(seed, draws, n):
    batch = rng.uniforms(seed, draws, n)
    for i, d in enumerate(draws):
        assert np.array_equal(batch[i], rng.uniforms(seed, [d], n)[0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 20))
def test_uniforms_at_matches_columns(seed, n):
    full = rng.uniforms(seed, [3, 5], n)
    cols = list(range(0, n, 2))
    assert np.array_equal(rng.uniforms_at(seed, [3, 5], cols), full[:, cols])


def test_streams_and_seeds_differ():
    a = rng.uniforms(1, [0], 8, stream=rng.SAMPLE)
    assert not np.array_equal(a, rng.uniforms(1, [0], 8, stream=rng.ORDER))
    assert not np.array_equal(a, rng.uniforms(2, [0], 8, stream=rng.SAMPLE))


def test_uniform_range_and_moments():
    u = rng.uniforms(9, np.arange(2000), 50)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1 / 12) < 0.002


def test_generator_reproducible():
    assert rng.generator(4, 7).random() == rng.generator(4, 7).random()
    assert rng.generator(4, 7).random() != rng.generator(4, 8).random()
