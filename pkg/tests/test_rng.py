import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latent_geometry_search.utils.parallel import parallel_map
from latent_geometry_search.utils.rng import SplitMix64


def test_known_first_output():
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF


def test_same_seed_same_stream():
    a, b = SplitMix64(42), SplitMix64(42)
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]
    assert SplitMix64(1).next_u64() != SplitMix64(2).next_u64()


def test_seed_wraps_to_64_bits():
    assert SplitMix64(-1).state == (1 << 64) - 1
    assert SplitMix64(1 << 64).next_u64() == SplitMix64(0).next_u64()


def test_uniform_range():
    values = SplitMix64(7).uniform_array(2000)
    assert np.all((values >= 0.0) & (values < 1.0))
    assert 0.45 < values.mean() < 0.55
    shifted = SplitMix64(7).uniform_array(2000, -2.0, 2.0)
    np.testing.assert_allclose(shifted, -2.0 + 4.0 * values)


def test_normal_moments():
    values = SplitMix64(3).normal_array(4000)
    assert np.all(np.isfinite(values))
    assert abs(values.mean()) < 0.1
    assert 0.9 < values.std() < 1.1


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**64 - 1), n=st.integers(min_value=0, max_value=40))
def test_permutation_is_a_permutation(seed, n):
    order = SplitMix64(seed).permutation(n)
    assert sorted(order.tolist()) == list(range(n))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), bound=st.integers(min_value=1, max_value=1000))
def test_randbelow_in_range(seed, bound):
    assert 0 <= SplitMix64(seed).randbelow(bound) < bound


def test_sample_is_distinct():
    chosen = SplitMix64(5).sample(list("abcdefgh"), 5)
    assert len(chosen) == len(set(chosen)) == 5
    assert set(chosen) <= set("abcdefgh")
    assert SplitMix64(5).sample(list("abcdefgh"), 5) == chosen
    assert sorted(SplitMix64(5).sample(range(4), 4)) == [0, 1, 2, 3]


def test_bad_arguments():
    with pytest.raises(ValueError):
        SplitMix64(0).randbelow(0)
    with pytest.raises(ValueError):
        SplitMix64(0).sample([1, 2], 3)


def test_parallel_map_keeps_order():
    items = [4.0, 9.0, 16.0, 25.0]
    assert parallel_map(math.sqrt, items, workers=1) == [2.0, 3.0, 4.0, 5.0]
    assert parallel_map(math.sqrt, items, workers=2) == [2.0, 3.0, 4.0, 5.0]
    assert parallel_map(math.sqrt, [], workers=2) == []
