"""Plot-data files (two whitespace-delimited columns) and optional PNG renderings."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# view -> (x column, y column, log-log axes)
VIEWS: Dict[str, Tuple[str, str, bool]] = {
    "histogram": ("citations", "papers", False),
    "logbins": ("bin_upper", "papers", False),
    "rankfreq": ("citations", "rank", True),
    "cumulative": ("citations", "probability", True),
    "doublerank": ("local_rank", "global_rank", True),
    "series": ("percentile", "local_papers", True),
}

_COLORS = ("#00a6c8", "#d6338a", "#4d9e3a", "#e08a1e")


def _safe(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)


def write_view(out_dir: Path, label: str, view: str, x: Sequence[float], y: Sequence[float], suffix: str = "") -> Path:
    """One ``<label>_<view>[suffix].dat`` file with a commented header naming the columns."""

    if view not in VIEWS:
        raise ValueError(f"unknown plot view '{view}'")
    x_name, y_name, _ = VIEWS[view]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{_safe(label)}_{view}{suffix}.dat"
    data = np.column_stack((np.asarray(x, dtype=float), np.asarray(y, dtype=float)))
    np.savetxt(path, data, fmt="%.17g", header=f"{x_name} {y_name}")
    logger.debug("wrote %s (%d rows)", path, data.shape[0])
    return path


def read_view(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, ndmin=2)
    return data[:, 0], data[:, 1]


def render_png(path: Path, view: str) -> Path:
    """Render a .dat view next to it as a PNG; log axes for the rank views."""

    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    path = Path(path)
    x_name, y_name, loglog = VIEWS[view]
    x, y = read_view(path)

    fig, ax = plt.subplots(figsize=(5, 4))
    if loglog:
        keep = (x > 0) & (y > 0)
        ax.loglog(x[keep], y[keep], "o", color="k", markersize=2)
    else:
        ax.bar(x, y, color=_COLORS[0])
    ax.set_xlabel(x_name)
    ax.set_ylabel(y_name)
    ax.set_title(path.stem)
    fig.tight_layout()
    target = path.with_suffix(".png")
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def render_method_comparison(out_dir: Path, rows: List[Dict[str, object]]) -> Path:
    """Grouped bars of e_p per group and fit method."""

    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    groups = sorted({str(r["group"]) for r in rows})
    methods = sorted({str(r["method"]) for r in rows})
    width = 0.8 / max(len(methods), 1)
    positions = np.arange(len(groups))

    fig, ax = plt.subplots(figsize=(6, 4))
    for i, method in enumerate(methods):
        values = [
            next((float(r["e_p"]) for r in rows if r["group"] == g and r["method"] == method), np.nan)
            for g in groups
        ]
        ax.bar(positions + i * width, values, width, label=method, color=_COLORS[i % len(_COLORS)])
    ax.axhline(0.1, color="grey", linestyle="--", linewidth=1)
    ax.set_xticks(positions + width * (len(methods) - 1) / 2)
    ax.set_xticklabels(groups)
    ax.set_ylabel("e_p")
    ax.legend()
    fig.tight_layout()
    target = Path(out_dir) / "method_comparison.png"
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target
