from __future__ import annotations

import math

import numpy as np
import pytest

from core.errors import EmptySetError
from core.synthgen import compose_world, sample_lognormal, sample_many, spawn_seeds
from core.types import CitationSet, LognormalSpec


def test_same_seed_gives_identical_counts():
    spec = LognormalSpec(1.7, 1.1, 1000, 42)
    first, second = sample_lognormal(spec), sample_lognormal(spec)
    assert first.counts.tobytes() == second.counts.tobytes()


def test_different_seeds_differ():
    a = sample_lognormal(LognormalSpec(1.7, 1.1, 1000, 1))
    b = sample_lognormal(LognormalSpec(1.7, 1.1, 1000, 2))
    assert not np.array_equal(a.counts, b.counts)


def test_vanishing_sigma_gives_ones():
    cset = sample_lognormal(LognormalSpec(0.0, 1e-9, 5, 3))
    assert cset.counts.tolist() == [1, 1, 1, 1, 1]


def test_counts_are_non_negative_integers():
    cset = sample_lognormal(LognormalSpec(-2.0, 2.0, 5000, 9))
    assert cset.counts.dtype == np.int64
    assert cset.counts.min() >= 0
    assert np.count_nonzero(cset.counts == 0) > 0


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_field_mean_and_mode(field_world, seed):
    cset = field_world(seed)
    assert cset.counts.mean() == pytest.approx(9.03, abs=0.15)
    assert int(np.argmax(np.bincount(cset.counts))) == 2


def test_field_top_percentile_threshold(field_world):
    counts = np.sort(field_world(1).counts)[::-1]
    threshold = counts[int(0.01 * counts.size) - 1]
    assert 53 <= threshold <= 59


def test_mean_converges_to_lognormal_mean():
    mu, sigma = 3.0, 0.5
    cset = sample_lognormal(LognormalSpec(mu, sigma, 1_000_000, 5))
    assert cset.counts.mean() == pytest.approx(math.exp(mu + sigma ** 2 / 2), rel=0.01)


def test_compose_world_with_background():
    s1 = sample_lognormal(LognormalSpec(2.4, 1.1, 500, 1), label="s1")
    s7 = sample_lognormal(LognormalSpec(1.5, 0.9, 500, 2), label="s7")
    world = compose_world([s1, s7], extra=LognormalSpec(1.7, 1.1, 150_000, 3))
    assert world.size == 151_000
    assert world.label == "WORLD"


def test_compose_world_single_set_is_identical():
    a = CitationSet("A", np.array([4, 0, 9]))
    world = compose_world([a])
    assert world.size == 3
    assert sorted(world.counts.tolist()) == [0, 4, 9]


def test_compose_world_is_multiset_union():
    s1 = CitationSet("s1", np.array([5, 5, 1]))
    s7 = CitationSet("s7", np.array([5, 2]))
    world = compose_world([s1, s7])
    assert world.size == 5
    assert np.bincount(world.counts).tolist() == [0, 1, 1, 0, 0, 3]


def test_compose_world_needs_papers():
    with pytest.raises(EmptySetError):
        compose_world([])


def test_spawned_seeds_are_stable_and_distinct():
    seeds = spawn_seeds(20180101, 3)
    assert seeds == spawn_seeds(20180101, 3)
    assert len(set(seeds)) == 3
    assert all(0 <= s < 2 ** 64 for s in seeds)


def test_sample_many_labels_and_sizes():
    sets = sample_many([("a", 1.0, 1.0, 10), ("b", 2.0, 0.5, 20)], seed=4)
    assert [(s.label, s.size) for s in sets] == [("a", 10), ("b", 20)]
