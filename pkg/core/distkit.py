"""Single-distribution analysis: histograms, log bins, rank-frequency, CSS, tail fit."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from config import TAIL_MIN_POINTS, TAIL_WINDOW
from core.errors import BadWindowError, DegenerateSetError, DoubleRankError, TooFewPointsError
from core.fitkit import chi2_pvalue
from core.types import CitationSet, CssResult, FitMethod, PowerLawFit

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RankFrequency:
    """Papers sorted by citations, most cited first, with ranks 1..size.

    Ranks may be fractional when the curve comes from a model rather than
    from counted papers.
    """

    citations: np.ndarray
    ranks: np.ndarray
    size: int

    def __post_init__(self) -> None:
        c = np.asarray(self.citations, dtype=float)
        r = np.asarray(self.ranks, dtype=float)
        if c.shape != r.shape or c.ndim != 1:
            raise DoubleRankError("citations and ranks must be equal-length sequences")
        if np.any(np.diff(c) > 0):
            raise DoubleRankError("citations must be sorted in descending order")
        if np.any(np.diff(r) <= 0):
            raise DoubleRankError("ranks must increase as citations decrease")
        object.__setattr__(self, "citations", c)
        object.__setattr__(self, "ranks", r)

    def steps(self) -> Tuple[np.ndarray, np.ndarray]:
        """Distinct citation values (descending) with the rank of the last paper at or above each."""

        # citations are descending, so the last occurrence of a value carries its largest rank
        reversed_c = self.citations[::-1]
        values, first_in_reversed = np.unique(reversed_c, return_index=True)
        last_idx = self.citations.size - 1 - first_in_reversed
        order = np.argsort(-values)
        return values[order], self.ranks[last_idx[order]]

    def cumulative_probability(self, c: float) -> float:
        """Share of papers with at least ``c`` citations."""

        mask = self.citations >= c
        if not np.any(mask):
            return 0.0
        return float(self.ranks[mask].max() / self.size)

    def cumulative_curve(self) -> Tuple[np.ndarray, np.ndarray]:
        values, ranks = self.steps()
        return values, ranks / self.size


def histogram(cset: CitationSet, max_citations: int) -> Tuple[List[Tuple[int, int]], int]:
    """Paper counts for citation values 0..max_citations and the count above."""

    if max_citations < 0:
        raise BadWindowError("max_citations must be >= 0")
    binned = np.bincount(cset.counts, minlength=max_citations + 1)
    omitted = int(binned[max_citations + 1:].sum())
    rows = [(value, int(n)) for value, n in enumerate(binned[: max_citations + 1])]
    return rows, omitted


def log_bins(cset: CitationSet) -> List[Tuple[int, int, int]]:
    """Powers-of-two bins 1-2, 3-4, 5-8, 9-16, ...; zero-citation papers lead in their own bin."""

    counts = cset.counts
    bins: List[Tuple[int, int, int]] = []
    zeros = int(np.count_nonzero(counts == 0))
    if zeros:
        bins.append((0, 0, zeros))
    top = int(counts.max())
    lo, hi = 1, 2
    while lo <= top:
        n = int(np.count_nonzero((counts >= lo) & (counts <= hi)))
        bins.append((lo, hi, n))
        lo, hi = hi + 1, hi * 2
    return bins


def rank_frequency(cset: CitationSet) -> RankFrequency:
    ordered = np.sort(cset.counts)[::-1]
    ranks = np.arange(1, ordered.size + 1)
    return RankFrequency(citations=ordered, ranks=ranks, size=cset.size)


def css_classify(cset: CitationSet, depth: int) -> CssResult:
    """Iterated-mean classes: m1 = mean of all, m(k+1) = mean of papers above m(k)."""

    if depth < 1:
        raise DegenerateSetError("CSS depth must be >= 1")
    counts = cset.counts.astype(float)
    if np.all(counts == counts[0]):
        raise DegenerateSetError(f"{cset.label}: all papers have the same citation count")

    thresholds: List[float] = []
    pool = counts
    for level in range(depth):
        if pool.size == 0:
            raise DegenerateSetError(f"{cset.label}: no papers above CSS threshold {level}")
        m = float(pool.mean())
        thresholds.append(m)
        pool = pool[pool > m]

    edges = np.concatenate(([-np.inf], thresholds, [np.inf]))
    shares = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = np.count_nonzero((counts > lo) & (counts <= hi))
        shares.append(n / counts.size * 100.0)
    shares[-1] = max(100.0 - sum(shares[:-1]), 0.0)
    return CssResult(thresholds=tuple(thresholds), class_shares=tuple(shares), k=depth)


def tail_power_fit(
    rf: RankFrequency,
    fit_lo: float = TAIL_WINDOW[0],
    fit_hi: float = TAIL_WINDOW[1],
) -> PowerLawFit:
    """Fit rank = a * c**(-exponent) over citation values in [fit_lo, fit_hi].

    Linear regression on the log-transformed step points; the stored
    ``alpha`` is the signed slope, ``tail_exponent`` the positive exponent.
    """

    if not fit_lo < fit_hi:
        raise BadWindowError(f"empty tail window [{fit_lo}, {fit_hi}]")
    values, ranks = rf.steps()
    mask = (values > 0) & (values >= fit_lo) & (values <= fit_hi)
    c, r = values[mask], ranks[mask]
    if c.size < TAIL_MIN_POINTS:
        raise TooFewPointsError(
            f"tail window [{fit_lo}, {fit_hi}] holds {c.size} points, need {TAIL_MIN_POINTS}"
        )
    slope, intercept = np.polyfit(np.log(c), np.log(r), 1)
    a = float(np.exp(intercept))
    fitted = a * c ** slope
    chi2 = float(np.sum((r - fitted) ** 2 / fitted))
    dof = int(c.size - 2)
    logger.debug("tail fit [%g, %g]: a=%.4g exponent=%.4f on %d points", fit_lo, fit_hi, a, -slope, c.size)
    return PowerLawFit(
        a=a,
        alpha=float(slope),
        method=FitMethod.LR,
        chi2=chi2,
        dof=dof,
        p_value=chi2_pvalue(chi2, dof),
        points_used=tuple((float(ci), float(ri)) for ci, ri in zip(c, r)),
    )
