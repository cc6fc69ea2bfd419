"""Synthetic lognormal citation sets and world composition."""

from __future__ import annotations

import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np

from config import WORLD_LABEL
from core.errors import EmptySetError
from core.types import CitationSet, LognormalSpec

logger = logging.getLogger(__name__)


def sample_lognormal(spec: LognormalSpec, label: str = "synthetic") -> CitationSet:
    """Draw ``spec.n_papers`` counts, each round(exp(mu + sigma * z)).

    The generator is private to the call and seeded from ``spec.seed``.
    """

    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal(spec.n_papers)
    counts = np.rint(np.exp(spec.mu + spec.sigma * z))
    counts = np.maximum(counts, 0).astype(np.int64)
    logger.debug(
        "sampled %s: mu=%g sigma=%g n=%d seed=%d mean=%.3f",
        label, spec.mu, spec.sigma, spec.n_papers, spec.seed, counts.mean(),
    )
    return CitationSet(label=label, counts=counts)


def compose_world(
    locals_: Sequence[CitationSet],
    extra: Optional[LognormalSpec] = None,
    label: str = WORLD_LABEL,
) -> CitationSet:
    """Multiset union of the local sets plus an optional background sample."""

    parts: List[np.ndarray] = [s.counts for s in locals_]
    if extra is not None:
        parts.append(sample_lognormal(extra, label=f"{label}-background").counts)
    if not parts or sum(p.size for p in parts) == 0:
        raise EmptySetError("world composition needs at least one paper")
    world = np.concatenate(parts)
    logger.debug("composed %s from %d parts: %d papers", label, len(parts), world.size)
    return CitationSet(label=label, counts=world)


def spawn_seeds(seed: int, count: int) -> List[int]:
    """Independent 64-bit child seeds derived from one experiment seed."""

    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def sample_many(specs: Iterable[tuple], seed: int) -> List[CitationSet]:
    """Sample ``(label, mu, sigma, n_papers)`` recipes with seeds spawned from ``seed``."""

    recipes = list(specs)
    seeds = spawn_seeds(seed, len(recipes))
    return [
        sample_lognormal(LognormalSpec(mu, sigma, n, child), label=label)
        for (label, mu, sigma, n), child in zip(recipes, seeds)
    ]
