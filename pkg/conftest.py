"""Shared pytest fixtures: published share tables and seeded synthetic sets."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from config import SYNTH_BACKGROUND, SYNTH_LOCALS  # noqa: E402
from core.synthgen import compose_world, sample_lognormal, spawn_seeds  # noqa: E402
from core.types import CitationSet, LognormalSpec  # noqa: E402

SHARE_PERCENTILES = (1.0, 5.0, 10.0, 25.0, 50.0, 100.0)

# all sciences, 2012: empirical share of national papers in the world top-x%
NATIONAL_SHARES: Dict[str, Tuple[float, ...]] = {
    "USA": (1.94, 8.33, 15.40, 33.68, 59.29, 100.00),
    "EU": (1.29, 6.30, 12.33, 29.37, 55.01, 100.00),
    "China": (0.81, 4.12, 8.34, 21.92, 46.62, 100.00),
    "Japan": (0.82, 4.03, 8.18, 22.17, 47.84, 100.00),
}

NATIONAL_FITTED: Dict[str, Tuple[float, ...]] = {
    "USA": (1.99, 8.15, 14.96, 33.39, 61.29, 112.48),
    "EU": (1.32, 6.19, 12.05, 29.08, 56.62, 110.23),
    "China": (0.79, 4.18, 8.57, 22.10, 45.25, 92.67),
    "Japan": (0.79, 4.18, 8.58, 22.21, 45.60, 93.63),
}


@pytest.fixture
def national_shares() -> Dict[str, List[Tuple[float, float]]]:
    return {region: list(zip(SHARE_PERCENTILES, shares)) for region, shares in NATIONAL_SHARES.items()}


@pytest.fixture
def national_fitted() -> Dict[str, Tuple[float, ...]]:
    return dict(NATIONAL_FITTED)


@pytest.fixture
def shares_csv(tmp_path: Path) -> Path:
    lines = ["group,percentile,share"]
    for region, shares in NATIONAL_SHARES.items():
        lines += [f"{region},{x:g},{s}" for x, s in zip(SHARE_PERCENTILES, shares)]
    path = tmp_path / "national_shares.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def make_institution_sets(seed: int) -> Tuple[CitationSet, CitationSet, CitationSet]:
    """(s1, s7, world) where the world adds a 150,000-paper background to both groups."""

    seeds = spawn_seeds(seed, len(SYNTH_LOCALS) + 1)
    s1, s7 = (
        sample_lognormal(LognormalSpec(mu, sigma, n, child), label=label)
        for (label, mu, sigma, n), child in zip(SYNTH_LOCALS, seeds)
    )
    mu, sigma, n = SYNTH_BACKGROUND
    world = compose_world([s1, s7], extra=LognormalSpec(mu, sigma, n, seeds[-1]))
    return s1, s7, world


@pytest.fixture(scope="session")
def institution_sets() -> Callable[[int], Tuple[CitationSet, CitationSet, CitationSet]]:
    cache: Dict[int, Tuple[CitationSet, CitationSet, CitationSet]] = {}

    def build(seed: int) -> Tuple[CitationSet, CitationSet, CitationSet]:
        if seed not in cache:
            cache[seed] = make_institution_sets(seed)
        return cache[seed]

    return build


@pytest.fixture(scope="session")
def field_world() -> Callable[[int], CitationSet]:
    """150,000 papers with mu=1.7, sigma=1.0, one sample per seed."""

    cache: Dict[int, CitationSet] = {}

    def build(seed: int) -> CitationSet:
        if seed not in cache:
            cache[seed] = sample_lognormal(LognormalSpec(1.7, 1.0, 150_000, seed), label="field")
        return cache[seed]

    return build
