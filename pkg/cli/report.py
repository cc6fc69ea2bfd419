"""Aligned-column text tables rendered from a results payload."""

from __future__ import annotations

from typing import Any, Dict, List

import pandas as pd

from config import TABLE_DIGITS


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{TABLE_DIGITS}g}"
    return str(value)


def _render(title: str, rows: List[Dict[str, Any]]) -> str:
    if not rows:
        return ""
    frame = pd.DataFrame(rows, dtype=object).apply(lambda column: column.map(_fmt))
    return f"{title}\n{frame.to_string(index=False)}\n"


def method_comparison_table(payload: Dict[str, Any]) -> str:
    rows = []
    for label, group in payload["groups"].items():
        for row in group.get("compare", []):
            rows.append(
                {
                    "group": label,
                    "scenario": row["scenario"],
                    "method": row["method"],
                    "A": row["a"],
                    "alpha": row["alpha"],
                    "p": row["p_value"],
                    "P0.01": row["p_extrapolated"],
                    "change": row["p_change"],
                }
            )
    return _render("Fit stability across exclusion scenarios", rows)


def fit_table(payload: Dict[str, Any]) -> str:
    rows = []
    for label, group in payload["groups"].items():
        for method, fit in group.get("fits", {}).items():
            rows.append(
                {
                    "group": label,
                    "method": method,
                    "A": fit["a"],
                    "alpha": fit["alpha"],
                    "chi2": fit["chi2"],
                    "dof": fit["dof"],
                    "p": fit["p_value"],
                }
            )
    return _render("Power-law fits", rows)


def deviation_table(payload: Dict[str, Any]) -> str:
    blocks = []
    for label, group in payload["groups"].items():
        for method, rows in group.get("deviations", {}).items():
            table = [
                {"percentile": x, "empirical": emp, "calculated": calc, "difference": diff}
                for x, emp, calc, diff in rows
            ]
            blocks.append(_render(f"Empirical vs calculated shares: {label} ({method})", table))
    return "\n".join(b for b in blocks if b)


def indicator_table(payload: Dict[str, Any]) -> str:
    rows = []
    for label, group in payload["groups"].items():
        for method, ind in group.get("indicators", {}).items():
            rows.append(
                {
                    "group": label,
                    "method": method,
                    "x": ind["percentile"],
                    "e_p": ind["e_p"],
                    "P_top1%": ind["p_top_1"],
                    "P_top10%": ind["p_top_10"],
                    "P_top0.01%": ind["p_top_001"],
                    "P(x)": ind["prob"],
                    "N(x)": ind["freq"],
                    "per divisor": ind["p_top_001_per_divisor"],
                    "quality": ind["quality"],
                }
            )
    return _render("Breakthrough indicators", rows)


def distribution_table(payload: Dict[str, Any]) -> str:
    rows = []
    for label, group in payload["groups"].items():
        analysis = group.get("analysis")
        if not analysis:
            continue
        css = analysis.get("css") or {}
        tail = analysis.get("tail_fit") or {}
        rows.append(
            {
                "group": label,
                "papers": analysis["size"],
                "mean": analysis["mean"],
                "CSS shares": " / ".join(f"{s:.1f}" for s in css.get("shares", [])) or "-",
                "tail exponent": tail.get("tail_exponent"),
            }
        )
    return _render("Citation distributions", rows)


def render_tables(payload: Dict[str, Any]) -> str:
    """Every table the payload has data for, separated by blank lines."""

    parts = [
        distribution_table(payload),
        method_comparison_table(payload),
        fit_table(payload),
        deviation_table(payload),
        indicator_table(payload),
    ]
    return "\n".join(p for p in parts if p)
