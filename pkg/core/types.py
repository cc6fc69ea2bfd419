"""Domain types shared by the analysis modules.

Every type validates itself on construction, so a value that exists is a
value that satisfies its invariants. Array fields are stored read-only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from core.errors import (
    BadCountsError,
    BadGridError,
    BadPercentileError,
    DoubleRankError,
    EmptySetError,
    InvalidSpecError,
    NegativeCountError,
    NonMonotoneError,
)

_REL_TOL = 1e-9
_IDENTITY_TOL = 1e-12
INDICATOR_QUALITIES = ("ok", "alpha_nonpositive")


def check_percentile(x: float) -> None:
    if not (0 < x <= 100):
        raise BadPercentileError(f"percentile must lie in (0, 100], got {x}")


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class CitationSet:
    """Citations-per-paper of one group (world, country, institution)."""

    label: str
    counts: np.ndarray

    def __post_init__(self) -> None:
        if not self.label or not str(self.label).strip():
            raise InvalidSpecError("citation set label must be non-empty")
        counts = np.asarray(self.counts)
        if counts.ndim != 1:
            raise BadCountsError(f"{self.label}: counts must be one-dimensional")
        if counts.size == 0:
            raise EmptySetError(f"{self.label}: citation set has no papers")
        if counts.dtype.kind == "f":
            if not np.all(np.isfinite(counts)) or np.any(counts != np.round(counts)):
                raise BadCountsError(f"{self.label}: citation counts must be integers")
        elif counts.dtype.kind not in "iu":
            raise BadCountsError(f"{self.label}: citation counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise NegativeCountError(f"{self.label}: citation counts must be >= 0")
        object.__setattr__(self, "counts", _frozen(counts))

    @property
    def size(self) -> int:
        return int(self.counts.size)

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"CitationSet(label={self.label!r}, size={self.size})"


def validate_citation_set(raw: Sequence[int], label: str) -> CitationSet:
    """Check raw per-paper counts and wrap them into a CitationSet."""

    values = list(raw)
    if not values:
        raise EmptySetError(f"{label}: citation set has no papers")
    for value in values:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer, float, np.floating)):
            raise BadCountsError(f"{label}: {value!r} is not a citation count")
        if value < 0:
            raise NegativeCountError(f"{label}: negative citation count {value}")
    return CitationSet(label=label, counts=np.asarray(values))


@dataclass(frozen=True)
class LognormalSpec:
    """Recipe for a synthetic citation set."""

    mu: float
    sigma: float
    n_papers: int
    seed: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise InvalidSpecError("mu must be finite")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidSpecError(f"sigma must be > 0, got {self.sigma}")
        if int(self.n_papers) != self.n_papers or self.n_papers < 1:
            raise InvalidSpecError(f"n_papers must be a positive integer, got {self.n_papers}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidSpecError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "n_papers", int(self.n_papers))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True, eq=False)
class PercentileSeries:
    """Counts of local papers inside world top-x percentiles.

    ``n_local`` may be fractional when the series was derived from shares.
    ``paper_percentiles`` holds the global percentile of every local paper
    when the series was built from citation sets; ``world_size`` is None
    for share data.
    """

    world_label: str
    local_label: str
    world_size: Optional[int]
    local_size: float
    x: np.ndarray
    n_local: np.ndarray
    synthetic_counts: bool = False
    paper_percentiles: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        n = np.asarray(self.n_local, dtype=float)
        if x.ndim != 1 or x.shape != n.shape:
            raise BadGridError("percentiles and counts must be equal-length sequences")
        if x.size == 0:
            raise BadGridError("percentile series has no points")
        if (self.world_size is not None and self.world_size < 1) or not self.local_size > 0:
            raise BadCountsError("world and local sizes must be positive")
        if np.any(x <= 0) or np.any(x > 100):
            raise BadGridError("percentiles must lie in (0, 100]")
        if np.any(np.diff(x) <= 0):
            raise BadGridError("percentiles must be strictly increasing")
        slack = _REL_TOL * self.local_size
        if np.any(n < 0) or np.any(n > self.local_size + slack):
            raise BadCountsError("local counts must lie in [0, local_size]")
        if np.any(np.diff(n) < 0):
            raise NonMonotoneError(f"{self.local_label}: counts must be non-decreasing in x")
        if x[-1] == 100 and abs(n[-1] - self.local_size) > slack:
            raise NonMonotoneError(f"{self.local_label}: count at x=100 must equal the local size")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "n_local", _frozen(n))
        if self.paper_percentiles is not None:
            pct = np.sort(np.asarray(self.paper_percentiles, dtype=float))
            object.__setattr__(self, "paper_percentiles", _frozen(pct))

    @property
    def shares(self) -> np.ndarray:
        return self.n_local / self.local_size * 100.0

    @property
    def points(self) -> list[Tuple[float, float, float]]:
        return [
            (float(x), float(n), float(s))
            for x, n, s in zip(self.x, self.n_local, self.shares)
        ]

    def __len__(self) -> int:
        return int(self.x.size)


class FitMethod(str, enum.Enum):
    LR = "LR"
    LM = "LM"
    ML = "ML"
    CLOSED_FORM = "CLOSED_FORM"

    @classmethod
    def parse(cls, name: str) -> "FitMethod":
        try:
            return cls(name.strip().upper())
        except ValueError as exc:
            raise InvalidSpecError(f"unknown fit method '{name}'") from exc


@dataclass(frozen=True)
class PowerLawFit:
    """Fitted N(x) = a * x**alpha.

    ``excluded`` keeps (x, observed, fitted) for points left out of the fit.
    """

    a: float
    alpha: float
    method: FitMethod
    chi2: Optional[float]
    dof: Optional[int]
    p_value: Optional[float]
    points_used: Tuple[Tuple[float, float], ...] = ()
    excluded: Tuple[Tuple[float, float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DoubleRankError(f"prefactor must be > 0, got {self.a}")
        if not math.isfinite(self.alpha):
            raise DoubleRankError("exponent must be finite")
        if self.method is FitMethod.CLOSED_FORM:
            if self.chi2 is not None or self.dof is not None or self.p_value is not None:
                raise DoubleRankError("closed-form fits carry no goodness-of-fit")
            return
        if self.dof is None or self.dof < 1:
            raise DoubleRankError(f"degrees of freedom must be >= 1, got {self.dof}")
        if self.chi2 is None or self.chi2 < 0:
            raise DoubleRankError(f"chi-square must be >= 0, got {self.chi2}")
        if self.p_value is None or not 0.0 <= self.p_value <= 1.0:
            raise DoubleRankError(f"p-value must lie in [0, 1], got {self.p_value}")

    def predict(self, x):
        return self.a * np.power(x, self.alpha)

    @property
    def tail_exponent(self) -> float:
        # rank = a * c**(-exponent)
        return -self.alpha


@dataclass(frozen=True)
class IndicatorSet:
    """Breakthrough indicators of one group, tied to a fit and a percentile."""

    e_p: float
    alpha: float
    p_top_1: float
    p_top_10: float
    p_top_001: float
    prob: float
    freq: float
    n_total: float
    percentile: float
    method: FitMethod
    quality: str = "ok"
    p_top_001_per_divisor: Optional[float] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha):
            raise DoubleRankError("exponent must be finite")
        if not self.n_total >= 1:
            raise BadCountsError(f"n_total must be >= 1, got {self.n_total}")
        check_percentile(self.percentile)
        counts = (self.p_top_1, self.p_top_10, self.p_top_001, self.prob, self.freq)
        if any(not (math.isfinite(v) and v >= 0) for v in counts):
            raise BadCountsError("indicator counts and probabilities must be finite and >= 0")
        if self.quality not in INDICATOR_QUALITIES:
            raise DoubleRankError(f"unknown quality flag '{self.quality}'")
        if (self.quality == "ok") != (self.alpha > 0):
            raise DoubleRankError(f"quality '{self.quality}' does not match exponent {self.alpha}")
        if self.quality == "ok" and not 0 < self.e_p < 1:
            raise DoubleRankError(f"quality 'ok' needs e_p in (0, 1), got {self.e_p}")
        n, e_p = self.n_total, self.e_p
        expected = (
            ("e_p", e_p, 10.0 ** (-self.alpha)),
            ("p_top_1", self.p_top_1, n * e_p ** 2),
            ("p_top_10", self.p_top_10, n * e_p),
            ("p_top_001", self.p_top_001, n * e_p ** 4),
            ("prob", self.prob, (self.percentile / 100.0) ** self.alpha),
            ("freq", self.freq, n * self.prob),
        )
        for name, value, target in expected:
            if not math.isclose(value, target, rel_tol=_IDENTITY_TOL):
                raise DoubleRankError(f"{name} = {value} breaks its identity (expected {target})")
        if self.p_top_001_per_divisor is not None and not self.p_top_001_per_divisor >= 0:
            raise BadCountsError("P_top0.01% per divisor must be >= 0")

    def prob_at(self, x: float) -> float:
        check_percentile(x)
        if x == 100:
            return 1.0
        return (x / 100.0) ** self.alpha

    def freq_at(self, x: float) -> float:
        return self.n_total * self.prob_at(x)


@dataclass(frozen=True)
class CssResult:
    """Characteristic scores and scales of one citation set."""

    thresholds: Tuple[float, ...]
    class_shares: Tuple[float, ...]
    k: int

    def __post_init__(self) -> None:
        if len(self.thresholds) != self.k or len(self.class_shares) != self.k + 1:
            raise DoubleRankError("CSS needs k thresholds and k+1 classes")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise DoubleRankError("CSS thresholds must be strictly increasing")
        if any(s < 0 for s in self.class_shares) or abs(sum(self.class_shares) - 100.0) > 1e-9:
            raise DoubleRankError("CSS class shares must be >= 0 and sum to 100")
