"""Breakthrough indicators: P(x), N(x), e_p and P_top0.01%."""

from __future__ import annotations

import logging
import math
from typing import Optional, Tuple

from config import DEFAULT_PERCENTILE
from core.errors import BadCountsError, DegenerateFitError
from core.types import FitMethod, IndicatorSet, PowerLawFit, check_percentile

logger = logging.getLogger(__name__)


def prob_at(fit: PowerLawFit, x: float) -> float:
    """Cumulative probability that a paper lies in the world top-x percentile."""

    check_percentile(x)
    if not fit.alpha > 0:
        raise DegenerateFitError(f"probability needs a positive exponent, got {fit.alpha}")
    if x == 100:
        return 1.0
    return (x / 100.0) ** fit.alpha


def freq_at(fit: PowerLawFit, x: float, n_total: float) -> float:
    """Expected number of the group's papers in the world top-x percentile."""

    if not n_total >= 1:
        raise BadCountsError(f"n_total must be >= 1, got {n_total}")
    return n_total * prob_at(fit, x)


def ep_from_alpha(alpha: float) -> float:
    return 10.0 ** (-alpha)


def ep_from_ptops(p_top1: float, p_top10: float) -> Tuple[float, float, float]:
    """(e_p, A, alpha) from the top-1% and top-10% counts."""

    if not (p_top1 > 0 and p_top10 > 0):
        raise BadCountsError("P_top1% and P_top10% must be positive")
    if p_top10 < p_top1:
        raise BadCountsError(f"P_top10% ({p_top10}) is below P_top1% ({p_top1})")
    alpha = math.log10(p_top10 / p_top1)
    return ep_from_alpha(alpha), float(p_top1), alpha


def closed_form_fit(p_top1: float, p_top10: float) -> PowerLawFit:
    """Two-point power law through (1, P_top1%) and (10, P_top10%)."""

    _, a, alpha = ep_from_ptops(p_top1, p_top10)
    return PowerLawFit(
        a=a,
        alpha=alpha,
        method=FitMethod.CLOSED_FORM,
        chi2=None,
        dof=None,
        p_value=None,
        points_used=((1.0, float(p_top1)), (10.0, float(p_top10))),
    )


def p_top_001(n_total: float, e_p: float) -> float:
    if not n_total >= 1:
        raise BadCountsError(f"n_total must be >= 1, got {n_total}")
    if not 0 < e_p <= 1:
        raise BadCountsError(f"e_p must lie in (0, 1], got {e_p}")
    return n_total * e_p ** 4


def ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        raise BadCountsError("ratio denominator is zero")
    return numerator / denominator


def indicator_set(
    fit: PowerLawFit,
    n_total: float,
    percentile: float = DEFAULT_PERCENTILE,
    divisor: Optional[float] = None,
) -> IndicatorSet:
    """All indicators of one group from its fitted exponent and size.

    Non-positive exponents give e_p >= 1; they are reported with a quality
    flag instead of being clamped.
    """

    check_percentile(percentile)
    if not n_total >= 1:
        raise BadCountsError(f"n_total must be >= 1, got {n_total}")
    alpha = fit.alpha
    e_p = ep_from_alpha(alpha)
    quality = "ok"
    if alpha > 0:
        prob = prob_at(fit, percentile)
    else:
        quality = "alpha_nonpositive"
        prob = (percentile / 100.0) ** alpha
        logger.warning("exponent %.4f <= 0 gives e_p = %.4f outside (0, 1)", alpha, e_p)
    top001 = n_total * e_p ** 4
    per_divisor = None
    if divisor is not None:
        if divisor <= 0:
            raise BadCountsError(f"divisor must be > 0, got {divisor}")
        per_divisor = top001 / divisor
    return IndicatorSet(
        e_p=e_p,
        alpha=alpha,
        p_top_1=n_total * e_p ** 2,
        p_top_10=n_total * e_p,
        p_top_001=top001,
        prob=prob,
        freq=n_total * prob,
        n_total=float(n_total),
        percentile=float(percentile),
        method=fit.method,
        quality=quality,
        p_top_001_per_divisor=per_divisor,
    )
