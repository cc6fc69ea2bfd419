"""Power-law fits of percentile series: LR, LM and ML, with chi-square scoring."""

from __future__ import annotations

import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaincc

from config import (
    COMPARE_SCENARIOS,
    DEFAULT_EXCLUDE,
    DEFAULT_MIN_COUNT,
    LM_LAMBDA0,
    LM_LAMBDA_FACTOR,
    LM_MAX_ITER,
    LM_TOL,
)
from core.errors import (
    BadCountsError,
    DegenerateFitError,
    NoConvergenceError,
    NonPositiveDofError,
    TooFewPointsError,
    ZeroCountError,
)
from core.types import FitMethod, PercentileSeries, PowerLawFit

logger = logging.getLogger(__name__)


def chi2_pvalue(chi2: float, dof: int) -> float:
    """Upper tail of the chi-square distribution, Q(dof/2, chi2/2)."""

    if dof < 1:
        raise NonPositiveDofError(f"degrees of freedom must be >= 1, got {dof}")
    if chi2 <= 0:
        return 1.0
    return float(min(max(gammaincc(dof / 2.0, chi2 / 2.0), 0.0), 1.0))


def _excluded_mask(x: np.ndarray, exclude: Iterable[float]) -> np.ndarray:
    mask = np.zeros(x.shape, dtype=bool)
    for value in exclude:
        mask |= np.isclose(x, float(value), rtol=1e-12, atol=1e-12)
    return mask


def _fit_points(series: PercentileSeries, exclude: Iterable[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    dropped = _excluded_mask(series.x, exclude)
    x, n = series.x[~dropped], series.n_local[~dropped]
    if x.size < 3:
        raise TooFewPointsError(
            f"{series.local_label}: {x.size} points left after exclusion, need 3"
        )
    if np.any(n <= 0):
        zero_at = ", ".join(f"{v:g}" for v in x[n <= 0])
        raise ZeroCountError(f"{series.local_label}: no local papers at percentile {zero_at}")
    return x, n, dropped


def _variance(obs: np.ndarray, fitted: np.ndarray, local_size: float, variance: str) -> np.ndarray:
    if variance == "pearson":
        return fitted
    if variance == "binomial":
        return np.maximum(obs * (1.0 - obs / local_size), 1.0)
    raise ValueError(f"unknown variance model '{variance}'")


def _goodness(
    obs: np.ndarray, fitted: np.ndarray, local_size: float, variance: str = "pearson"
) -> Tuple[float, int, float]:
    dof = int(obs.size - 2)
    if dof < 1:
        raise NonPositiveDofError(f"{obs.size} points leave no degrees of freedom")
    chi2 = float(np.sum((obs - fitted) ** 2 / _variance(obs, fitted, local_size, variance)))
    return chi2, dof, chi2_pvalue(chi2, dof)


def _finish(
    series: PercentileSeries,
    x: np.ndarray,
    n: np.ndarray,
    dropped: np.ndarray,
    a: float,
    alpha: float,
    method: FitMethod,
) -> PowerLawFit:
    fitted = a * np.power(x, alpha)
    chi2, dof, p = _goodness(n, fitted, series.local_size)
    excluded = tuple(
        (float(xe), float(ne), float(a * xe ** alpha))
        for xe, ne in zip(series.x[dropped], series.n_local[dropped])
    )
    logger.debug(
        "%s %s: A=%.6g alpha=%.6f chi2=%.4g dof=%d p=%.4g",
        series.local_label, method.value, a, alpha, chi2, dof, p,
    )
    return PowerLawFit(
        a=float(a),
        alpha=float(alpha),
        method=method,
        chi2=chi2,
        dof=dof,
        p_value=p,
        points_used=tuple((float(xi), float(ni)) for xi, ni in zip(x, n)),
        excluded=excluded,
    )


def fit_lr(series: PercentileSeries, exclude: Iterable[float] = DEFAULT_EXCLUDE) -> PowerLawFit:
    """Least squares of ln N on ln x."""

    x, n, dropped = _fit_points(series, exclude)
    slope, intercept = np.polyfit(np.log(x), np.log(n), 1)
    return _finish(series, x, n, dropped, float(np.exp(intercept)), float(slope), FitMethod.LR)


def _levenberg_marquardt(x: np.ndarray, n: np.ndarray, start: Tuple[float, float]) -> Tuple[np.ndarray, int]:
    params = np.array(start, dtype=float)
    lam = LM_LAMBDA0
    log_x = np.log(x)

    def sse(p: np.ndarray) -> float:
        return float(np.sum((n - p[0] * x ** p[1]) ** 2))

    current = sse(params)
    for iteration in range(1, LM_MAX_ITER + 1):
        model = params[0] * x ** params[1]
        jac = np.column_stack((x ** params[1], model * log_x))
        residual = n - model
        jtj = jac.T @ jac
        damped = jtj + lam * np.diag(np.diag(jtj))
        step, *_ = np.linalg.lstsq(damped, jac.T @ residual, rcond=None)
        relative = np.linalg.norm(step) / max(np.linalg.norm(params), np.finfo(float).tiny)
        trial = params + step
        trial_sse = sse(trial) if trial[0] > 0 else np.inf
        if trial_sse < current:
            params, current = trial, trial_sse
            lam /= LM_LAMBDA_FACTOR
        else:
            lam *= LM_LAMBDA_FACTOR
        if relative < LM_TOL:
            return params, iteration
    raise NoConvergenceError(f"Levenberg-Marquardt did not converge in {LM_MAX_ITER} iterations")


def fit_lm(series: PercentileSeries, exclude: Iterable[float] = DEFAULT_EXCLUDE) -> PowerLawFit:
    """Nonlinear least squares of N in linear space, started from the LR fit."""

    x, n, dropped = _fit_points(series, exclude)
    slope, intercept = np.polyfit(np.log(x), np.log(n), 1)
    params, iterations = _levenberg_marquardt(x, n, (float(np.exp(intercept)), float(slope)))
    logger.debug("%s LM converged after %d iterations", series.local_label, iterations)
    return _finish(series, x, n, dropped, float(params[0]), float(params[1]), FitMethod.LM)


def grouped_loglik(alpha: float, u: np.ndarray, counts: np.ndarray) -> float:
    """Multinomial log-likelihood of bin counts under P(X <= u) = u**alpha on (0, 1]."""

    cdf = np.power(u, alpha)
    probs = np.diff(np.concatenate(([0.0], cdf)))
    with np.errstate(divide="ignore"):
        terms = np.where(counts > 0, counts * np.log(probs), 0.0)
    return float(np.sum(terms))


def _grouped_score(alpha: float, u: np.ndarray, counts: np.ndarray) -> float:
    cdf = np.power(u, alpha)
    dcdf = cdf * np.log(u)
    probs = np.diff(np.concatenate(([0.0], cdf)))
    dprobs = np.diff(np.concatenate(([0.0], dcdf)))
    live = counts > 0
    return float(np.sum(counts[live] * dprobs[live] / probs[live]))


def _grouped_mle(u: np.ndarray, counts: np.ndarray, label: str) -> float:
    if counts[:-1].sum() == 0 or counts[1:].sum() == 0:
        raise DegenerateFitError(f"{label}: all papers fall in one percentile bin")
    lo, hi = 1e-6, 1.0
    if _grouped_score(lo, u, counts) <= 0:
        raise DegenerateFitError(f"{label}: likelihood maximum at alpha -> 0")
    while _grouped_score(hi, u, counts) > 0:
        hi *= 2.0
        if hi > 1e4:
            raise DegenerateFitError(f"{label}: likelihood maximum at alpha -> infinity")
    return float(brentq(_grouped_score, lo, hi, args=(u, counts), xtol=1e-15, rtol=1e-15, maxiter=500))


def ml_alpha_per_paper(percentiles: np.ndarray, x_max: float) -> Tuple[float, int]:
    """Closed-form MLE of alpha for P(X <= x) = (x / x_max)**alpha from per-paper percentiles."""

    pct = np.asarray(percentiles, dtype=float)
    inside = pct[pct <= x_max * (1.0 + 1e-12)]
    if inside.size == 0:
        raise TooFewPointsError(f"no papers at or below percentile {x_max:g}")
    total_log = float(np.sum(np.log(x_max / inside)))
    if total_log <= 0:
        raise DegenerateFitError(f"every paper sits at percentile {x_max:g}; alpha diverges")
    return inside.size / total_log, int(inside.size)


def fit_ml(series: PercentileSeries, exclude: Iterable[float] = DEFAULT_EXCLUDE) -> PowerLawFit:
    """Maximum likelihood under the power-function law on (0, x_max].

    Uses per-paper percentiles when the series carries them, otherwise the
    multinomial likelihood of the grid bin counts.
    """

    x, n, dropped = _fit_points(series, exclude)
    x_max = float(x[-1])
    if series.paper_percentiles is not None:
        alpha, n_total = ml_alpha_per_paper(series.paper_percentiles, x_max)
    else:
        counts = np.diff(np.concatenate(([0.0], n)))
        alpha = _grouped_mle(x / x_max, counts, series.local_label)
        n_total = float(n[-1])
    a = n_total * x_max ** (-alpha)
    return _finish(series, x, n, dropped, float(a), float(alpha), FitMethod.ML)


FITTERS: Dict[FitMethod, Callable[..., PowerLawFit]] = {
    FitMethod.LR: fit_lr,
    FitMethod.LM: fit_lm,
    FitMethod.ML: fit_ml,
}


def fit_series(
    series: PercentileSeries, method: FitMethod, exclude: Iterable[float] = DEFAULT_EXCLUDE
) -> PowerLawFit:
    return FITTERS[method](series, exclude)


def score_fit(
    series: PercentileSeries,
    fit: PowerLawFit,
    variance: str = "pearson",
    include_excluded: bool = False,
) -> Tuple[float, int, float]:
    """Chi-square, degrees of freedom and p-value of ``fit`` on its points.

    ``include_excluded`` adds the points the fit left out.
    """

    points = [(x, n) for x, n in fit.points_used]
    if include_excluded:
        points += [(x, n) for x, n, _ in fit.excluded]
    if not points:
        raise NonPositiveDofError("fit carries no points to score")
    x = np.array([p[0] for p in points])
    obs = np.array([p[1] for p in points])
    return _goodness(obs, fit.predict(x), series.local_size, variance)


def clean_series(series: PercentileSeries, min_count: int = DEFAULT_MIN_COUNT) -> PercentileSeries:
    """Drop points with fewer than ``min_count`` local papers; the largest-x point always stays."""

    if min_count < 0:
        raise BadCountsError("min_count must be >= 0")
    keep = series.n_local >= min_count
    keep[-1] = True
    if np.all(keep):
        return series
    logger.debug(
        "%s: dropping low-count percentiles %s",
        series.local_label, ", ".join(f"{v:g}" for v in series.x[~keep]),
    )
    return PercentileSeries(
        world_label=series.world_label,
        local_label=series.local_label,
        world_size=series.world_size,
        local_size=series.local_size,
        x=series.x[keep],
        n_local=series.n_local[keep],
        synthetic_counts=series.synthetic_counts,
        paper_percentiles=series.paper_percentiles,
    )


def deviations(series: PercentileSeries, fit: PowerLawFit) -> List[Tuple[float, float, float, float]]:
    """(x, empirical, calculated, difference) in percent shares for every series point."""

    scale = 100.0 / series.local_size
    rows = []
    for x, n in zip(series.x, series.n_local):
        empirical = float(n * scale)
        calculated = float(fit.predict(x) * scale)
        rows.append((float(x), empirical, calculated, empirical - calculated))
    return rows


def scenario_label(exclude: Sequence[float]) -> str:
    if not exclude:
        return "all"
    return "excl " + ",".join(f"{v:g}" for v in exclude)


def compare_methods(
    series: PercentileSeries,
    methods: Sequence[FitMethod],
    scenarios: Sequence[Sequence[float]] = COMPARE_SCENARIOS,
    percentile: float = 0.01,
) -> List[dict]:
    """Fit every method under every exclusion scenario.

    ``p_change`` is the relative change of the extrapolated count at
    ``percentile`` against the scenario that excludes only x=100.
    """

    rows = []
    for exclude in scenarios:
        for method in methods:
            fit = fit_series(series, method, exclude)
            rows.append(
                {
                    "scenario": scenario_label(exclude),
                    "method": method.value,
                    "fit": fit,
                    "p_extrapolated": float(fit.predict(percentile)),
                }
            )
    reference: Dict[str, float] = {
        row["method"]: row["p_extrapolated"] for row in rows if row["scenario"] == scenario_label(DEFAULT_EXCLUDE)
    }
    for row in rows:
        ref: Optional[float] = reference.get(row["method"])
        row["p_change"] = row["p_extrapolated"] / ref - 1.0 if ref else None
    return rows
