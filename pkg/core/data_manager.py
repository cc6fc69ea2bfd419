"""Citation and share file access, plus results (de)serialization."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from config import WORLD_LABEL
from core.errors import EmptySetError, ParseError
from core.types import CitationSet, IndicatorSet, PercentileSeries, PowerLawFit
from core.doublerank import series_from_shares
from core.synthgen import compose_world

logger = logging.getLogger(__name__)

CITATION_COLUMNS = ("group", "citations")
SHARE_COLUMNS = ("group", "percentile", "share")
# counts are stored as int64
_COUNT_LIMIT = 2.0 ** 63


def _read_table(path: Path, columns: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"{path}: file not found")
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8"
        )
    except pd.errors.EmptyDataError as exc:
        raise ParseError(f"{path}: file is empty", line=1) from exc
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    header = [str(c).strip() for c in frame.columns]
    if tuple(header) != tuple(columns):
        raise ParseError(
            f"{path}: expected header '{','.join(columns)}', got '{','.join(header)}'", line=1
        )
    frame.columns = header
    return frame


def _numeric(frame: pd.DataFrame, column: str, path: Path) -> pd.Series:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = values.isna() | ~np.isfinite(values)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(
            f"{path}: '{frame[column].iloc[row]}' is not a number", line=row + 2, column=column
        )
    return values


def _labels(frame: pd.DataFrame, path: Path) -> pd.Series:
    labels = frame["group"].str.strip()
    empty = labels == ""
    if empty.any():
        row = int(np.flatnonzero(empty.to_numpy())[0])
        raise ParseError(f"{path}: empty group label", line=row + 2, column="group")
    return labels


def load_citations(path: Path) -> List[CitationSet]:
    """One CitationSet per group of a ``group,citations`` file, in order of first appearance."""

    frame = _read_table(path, CITATION_COLUMNS)
    if frame.empty:
        raise EmptySetError(f"{path}: no papers")
    labels = _labels(frame, path)
    counts = _numeric(frame, "citations", path)
    invalid = (counts < 0) | (counts != np.floor(counts)) | (counts >= _COUNT_LIMIT)
    if invalid.any():
        row = int(np.flatnonzero(invalid.to_numpy())[0])
        raise ParseError(
            f"{path}: citation count must be an integer in [0, 2**63), got '{frame['citations'].iloc[row]}'",
            line=row + 2,
            column="citations",
        )
    sets = [
        CitationSet(label=str(label), counts=group.to_numpy(dtype=np.int64))
        for label, group in counts.groupby(labels, sort=False)
    ]
    logger.info("loaded %s: %s", path, ", ".join(f"{s.label}={s.size}" for s in sets))
    return sets


def merge_sets(batches: Iterable[Sequence[CitationSet]]) -> List[CitationSet]:
    """Concatenate same-label groups read from several files."""

    merged: Dict[str, List[np.ndarray]] = {}
    for batch in batches:
        for cset in batch:
            merged.setdefault(cset.label, []).append(cset.counts)
    return [CitationSet(label=label, counts=np.concatenate(parts)) for label, parts in merged.items()]


def split_world(sets: Sequence[CitationSet]) -> Tuple[List[CitationSet], CitationSet, bool]:
    """(locals, world, explicit) where an explicit WORLD group wins over the union."""

    locals_ = [s for s in sets if s.label != WORLD_LABEL]
    explicit = [s for s in sets if s.label == WORLD_LABEL]
    if explicit:
        return locals_, explicit[0], True
    return locals_, compose_world(locals_), False


def load_shares(path: Path) -> List[Tuple[str, PercentileSeries]]:
    """One share series per group of a ``group,percentile,share`` file."""

    frame = _read_table(path, SHARE_COLUMNS)
    if frame.empty:
        raise EmptySetError(f"{path}: no share rows")
    labels = _labels(frame, path)
    percentiles = _numeric(frame, "percentile", path)
    shares = _numeric(frame, "share", path)
    duplicated = pd.DataFrame({"g": labels, "x": percentiles}).duplicated()
    if duplicated.any():
        row = int(np.flatnonzero(duplicated.to_numpy())[0])
        raise ParseError(
            f"{path}: duplicate percentile {percentiles.iloc[row]:g} for group '{labels.iloc[row]}'",
            line=row + 2,
            column="percentile",
        )
    result = []
    for label, rows in pd.DataFrame({"g": labels, "x": percentiles, "s": shares}).groupby("g", sort=False):
        pairs = list(zip(rows["x"].tolist(), rows["s"].tolist()))
        result.append((str(label), series_from_shares(pairs, local_label=str(label))))
    logger.info("loaded %s: %d share series", path, len(result))
    return result


def write_citations(path: Path, sets: Sequence[CitationSet]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.concat(
        [pd.DataFrame({"group": s.label, "citations": s.counts}) for s in sets], ignore_index=True
    )
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def fit_to_dict(fit: PowerLawFit) -> Dict[str, Any]:
    return {
        "method": fit.method.value,
        "a": fit.a,
        "alpha": fit.alpha,
        "chi2": fit.chi2,
        "dof": fit.dof,
        "p_value": fit.p_value,
        "points_used": [list(p) for p in fit.points_used],
        "excluded": [{"x": x, "observed": n, "fitted": f} for x, n, f in fit.excluded],
    }


def indicators_to_dict(ind: IndicatorSet) -> Dict[str, Any]:
    return {
        "method": ind.method.value,
        "alpha": ind.alpha,
        "e_p": ind.e_p,
        "p_top_1": ind.p_top_1,
        "p_top_10": ind.p_top_10,
        "p_top_001": ind.p_top_001,
        "percentile": ind.percentile,
        "prob": ind.prob,
        "freq": ind.freq,
        "n_total": ind.n_total,
        "quality": ind.quality,
        "p_top_001_per_divisor": ind.p_top_001_per_divisor,
    }


def series_to_dict(series: PercentileSeries) -> Dict[str, Any]:
    return {
        "world": series.world_label,
        "world_size": None if series.world_size is None else int(series.world_size),
        "local_size": float(series.local_size),
        "synthetic_counts": series.synthetic_counts,
        "points": [{"x": x, "n_local": n, "share": s} for x, n, s in series.points],
    }


def write_results(path: Path, payload: Dict[str, Any]) -> Path:
    """Deterministic JSON: sorted keys, full float precision, no timestamps."""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def load_results(path: Path) -> Dict[str, Any]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ParseError(f"{path}: file not found") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(payload, dict) or "groups" not in payload:
        raise ParseError(f"{path}: not a results file")
    return payload
