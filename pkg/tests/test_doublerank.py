from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import rankdata

from config import DEFAULT_GRID
from core.doublerank import (
    check_grid,
    global_ranks,
    paper_percentiles,
    percentile_series,
    prepare_world,
    series_from_shares,
)
from core.errors import BadCountsError, BadGridError, NonMonotoneError, NotSubsetError
from core.fitkit import clean_series, fit_lr
from core.indicators import ep_from_alpha
from core.types import CitationSet

SEEDS = tuple(range(1, 11))


def _set(label, *counts):
    return CitationSet(label, np.array(counts))


def test_global_ranks_without_ties():
    assert global_ranks(_set("L", 9, 3), _set("W", 9, 7, 3, 1)) == [(1, 1.0), (2, 3.0)]


def test_global_ranks_use_midranks():
    assert global_ranks(_set("L", 5), _set("W", 5, 5, 5)) == [(1, 2.0)]


def test_midranks_match_rankdata():
    rng = np.random.default_rng(3)
    world = CitationSet("W", rng.integers(0, 30, size=400))
    local = CitationSet("L", world.counts[::7].copy())
    expected = rankdata(-world.counts.astype(float), method="average")
    lookup = {int(c): r for c, r in zip(world.counts, expected)}
    ranks = [g for _, g in global_ranks(local, world)]
    assert ranks == pytest.approx(sorted(lookup[int(c)] for c in local.counts))


def test_not_subset():
    with pytest.raises(NotSubsetError):
        global_ranks(_set("L", 5, 5), _set("W", 5, 3))
    with pytest.raises(NotSubsetError):
        percentile_series(_set("L", 8), _set("W", 5, 3), DEFAULT_GRID)


def test_series_top_paper_in_top_percentile():
    world = CitationSet("W", np.concatenate(([9], np.zeros(99, dtype=int))))
    series = percentile_series(_set("L", 9, 0), world, (1.0, 50.0, 100.0))
    assert series.n_local[0] == 1
    assert series.n_local[-1] == 2


def test_self_ranking_tracks_the_percentile():
    world = CitationSet("W", np.arange(1, 1001))
    series = percentile_series(world, world, DEFAULT_GRID)
    assert series.n_local.tolist() == pytest.approx([10 * x for x in DEFAULT_GRID])


def test_scale_invariance():
    rng = np.random.default_rng(8)
    world = CitationSet("W", rng.integers(0, 50, size=2000))
    local = CitationSet("L", world.counts[:300].copy())
    base = percentile_series(local, world, DEFAULT_GRID)
    scaled = percentile_series(
        CitationSet("L", local.counts * 7), CitationSet("W", world.counts * 7), DEFAULT_GRID
    )
    assert scaled.n_local.tolist() == base.n_local.tolist()
    assert global_ranks(local, world) == global_ranks(
        CitationSet("L", local.counts * 7), CitationSet("W", world.counts * 7)
    )


def test_prepared_world_is_reusable():
    world = _set("W", 9, 7, 3, 1, 1)
    prepared = prepare_world(world)
    assert prepare_world(prepared) is prepared
    assert paper_percentiles(_set("L", 1), prepared).tolist() == pytest.approx([90.0])


@pytest.mark.parametrize("grid", [(), (0.0, 10.0), (10.0, 5.0), (50.0, 101.0)])
def test_bad_grid(grid):
    with pytest.raises(BadGridError):
        check_grid(grid)


@pytest.mark.parametrize("seed", SEEDS)
def test_institution_top_paper_ranks(institution_sets, seed):
    s1, s7, world = institution_sets(seed)
    prepared = prepare_world(world)
    top_s1 = global_ranks(s1, prepared)[0][1]
    top_s7 = global_ranks(s7, prepared)[0][1]
    assert 1 <= top_s1 <= 500
    assert 30 <= top_s7 <= 10_000
    assert top_s1 < top_s7


@pytest.mark.parametrize("seed", SEEDS[:3])
def test_institution_series_shape(institution_sets, seed):
    s1, _, world = institution_sets(seed)
    series = percentile_series(s1, world, DEFAULT_GRID)
    assert np.all(np.diff(series.shares) >= 0)
    assert series.n_local[-1] == 500
    assert series.world_size == 151_000


@pytest.mark.parametrize("seed", SEEDS)
def test_world_against_itself_gives_tenth(institution_sets, seed):
    _, _, world = institution_sets(seed)
    series = clean_series(percentile_series(world, world, DEFAULT_GRID), 10)
    fit = fit_lr(series, exclude=(100.0,))
    assert ep_from_alpha(fit.alpha) == pytest.approx(0.1, abs=0.03)


def test_usa_shares_make_a_valid_series(national_shares):
    series = series_from_shares(national_shares["USA"])
    assert len(series) == 6
    assert series.synthetic_counts
    assert series.n_local[-1] == pytest.approx(100.0)


def test_shares_out_of_order_are_sorted():
    series = series_from_shares([(50, 60.0), (1, 2.0), (100, 100.0)])
    assert series.x.tolist() == [1.0, 50.0, 100.0]


def test_decreasing_shares_rejected():
    with pytest.raises(NonMonotoneError):
        series_from_shares({1: 2.0, 5: 1.0})


def test_shares_with_known_size():
    series = series_from_shares({1: 1.0, 100: 100.0}, local_size=200)
    assert series.n_local.tolist() == pytest.approx([2.0, 200.0])
    assert not series.synthetic_counts


def test_shares_outside_range_rejected():
    with pytest.raises(BadCountsError):
        series_from_shares({1: -1.0, 100: 100.0})
