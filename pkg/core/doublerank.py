"""Local-in-global ranking and the percentile-based double-rank series."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import DEFAULT_GRID
from core.errors import BadCountsError, BadGridError, NonMonotoneError, NotSubsetError
from core.types import CitationSet, PercentileSeries

logger = logging.getLogger(__name__)

_PCT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PreparedWorld:
    """World counts sorted once, shared by every local evaluation."""

    label: str
    ascending: np.ndarray

    @property
    def size(self) -> int:
        return int(self.ascending.size)

    def multiplicity(self, values: np.ndarray) -> np.ndarray:
        left = np.searchsorted(self.ascending, values, side="left")
        right = np.searchsorted(self.ascending, values, side="right")
        return right - left

    def midranks(self, values: np.ndarray) -> np.ndarray:
        """Descending-order rank averaged over the block of papers tied at each value."""

        left = np.searchsorted(self.ascending, values, side="left")
        right = np.searchsorted(self.ascending, values, side="right")
        above = self.size - right
        return above + (right - left + 1) / 2.0


WorldLike = Union[CitationSet, PreparedWorld]


def prepare_world(world: WorldLike) -> PreparedWorld:
    if isinstance(world, PreparedWorld):
        return world
    ascending = np.sort(world.counts)
    ascending.setflags(write=False)
    return PreparedWorld(label=world.label, ascending=ascending)


def _check_subset(local: CitationSet, world: PreparedWorld) -> None:
    values, counts = np.unique(local.counts, return_counts=True)
    available = world.multiplicity(values)
    short = counts > available
    if np.any(short):
        v = int(values[short][0])
        raise NotSubsetError(
            f"{local.label}: {int(counts[short][0])} papers with {v} citations, "
            f"world {world.label} has {int(available[short][0])}"
        )


def check_grid(grid: Sequence[float]) -> np.ndarray:
    x = np.asarray(list(grid), dtype=float)
    if x.size == 0:
        raise BadGridError("percentile grid is empty")
    if np.any(~np.isfinite(x)) or np.any(x <= 0) or np.any(x > 100):
        raise BadGridError(f"percentiles must lie in (0, 100]: {list(grid)}")
    if np.any(np.diff(x) <= 0):
        raise BadGridError(f"percentile grid must be strictly increasing: {list(grid)}")
    return x


def global_ranks(local: CitationSet, world: WorldLike) -> List[Tuple[int, float]]:
    """(local rank, global midrank) per local paper, ordered by local rank."""

    prepared = prepare_world(world)
    _check_subset(local, prepared)
    descending = np.sort(local.counts)[::-1]
    midranks = prepared.midranks(descending)
    return [(i + 1, float(r)) for i, r in enumerate(midranks)]


def paper_percentiles(local: CitationSet, world: WorldLike) -> np.ndarray:
    """Global top-percentile of every local paper (midrank / world size * 100)."""

    prepared = prepare_world(world)
    _check_subset(local, prepared)
    return prepared.midranks(local.counts) / prepared.size * 100.0


def series_from_percentiles(
    percentiles: np.ndarray,
    grid: Sequence[float],
    local_label: str,
    world_label: str,
    world_size: Optional[int],
) -> PercentileSeries:
    x = check_grid(grid)
    pct = np.sort(np.asarray(percentiles, dtype=float))
    n_local = np.searchsorted(pct, x * (1.0 + _PCT_TOL), side="right").astype(float)
    return PercentileSeries(
        world_label=world_label,
        local_label=local_label,
        world_size=world_size,
        local_size=pct.size,
        x=x,
        n_local=n_local,
        paper_percentiles=pct,
    )


def percentile_series(
    local: CitationSet,
    world: WorldLike,
    grid: Sequence[float] = DEFAULT_GRID,
) -> PercentileSeries:
    """N(x): local papers whose global midrank percentile is at most x."""

    prepared = prepare_world(world)
    check_grid(grid)
    pct = paper_percentiles(local, prepared)
    series = series_from_percentiles(pct, grid, local.label, prepared.label, prepared.size)
    logger.debug(
        "%s in %s: %s",
        local.label, prepared.label,
        ", ".join(f"{x:g}:{int(n)}" for x, n in zip(series.x, series.n_local)),
    )
    return series


def series_from_shares(
    shares: Union[Mapping[float, float], Iterable[Tuple[float, float]]],
    local_size: Optional[float] = None,
    local_label: str = "local",
    world_label: str = "world",
) -> PercentileSeries:
    """Wrap externally reported percentile shares into a series.

    Without a local size the shares themselves serve as counts
    (local_size = 100) and the series is marked synthetic.
    """

    pairs = list(shares.items()) if isinstance(shares, Mapping) else list(shares)
    if not pairs:
        raise BadGridError(f"{local_label}: no percentile shares")
    pairs.sort(key=lambda p: float(p[0]))
    x = np.array([float(p[0]) for p in pairs])
    share = np.array([float(p[1]) for p in pairs])
    if np.any(share < 0) or np.any(share > 100):
        raise BadCountsError(f"{local_label}: shares must lie in [0, 100]")
    if np.any(np.diff(share) < 0):
        raise NonMonotoneError(f"{local_label}: shares must not decrease with the percentile")
    synthetic = local_size is None
    size = 100.0 if synthetic else float(local_size)
    return PercentileSeries(
        world_label=world_label,
        local_label=local_label,
        world_size=None,
        local_size=size,
        x=check_grid(x),
        n_local=share * size / 100.0,
        synthetic_counts=synthetic,
    )
