"""Subcommands, the run pipeline and per-run logging."""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import config
from cli import plot_export
from cli.report import render_tables
from cli.run_config import (
    MODES,
    RunConfig,
    build_config,
    parse_background,
    parse_floats,
    parse_ints,
    parse_methods,
    parse_pair,
    parse_spec,
    read_config_file,
)
from core.data_manager import (
    fit_to_dict,
    indicators_to_dict,
    load_citations,
    load_results,
    load_shares,
    merge_sets,
    series_to_dict,
    split_world,
    write_citations,
    write_results,
)
from core.distkit import css_classify, histogram, log_bins, rank_frequency, tail_power_fit
from core.doublerank import global_ranks, percentile_series, prepare_world
from core.errors import ConfigError, DegenerateSetError, DoubleRankError, TooFewPointsError
from core.fitkit import clean_series, compare_methods, deviations, fit_series
from core.indicators import closed_form_fit, indicator_set
from core.synthgen import compose_world, sample_lognormal, spawn_seeds
from core.types import CitationSet, LognormalSpec, PercentileSeries, PowerLawFit

logger = logging.getLogger(__name__)

STAGES: Dict[str, Tuple[str, ...]] = {
    "synth": ("synth",),
    "analyze": ("load", "analyze"),
    "doublerank": ("load", "doublerank"),
    "fit": ("load", "fit"),
    "indicators": ("load", "fit", "indicators"),
    "report": ("load", "analyze", "doublerank", "fit", "indicators"),
}


@contextmanager
def run_logging(out_dir: Path, verbose: bool = False) -> Iterator[Path]:
    """Attach a stderr handler and a ``run.log`` file handler for one run."""

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / config.LOG_FILE

    file_handler = logging.FileHandler(log_path, mode="w", encoding="utf-8")
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
    stream_handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))

    root = logging.getLogger()
    previous_level = root.level
    root.setLevel(logging.DEBUG)
    root.addHandler(file_handler)
    root.addHandler(stream_handler)
    try:
        yield log_path
    finally:
        root.removeHandler(file_handler)
        root.removeHandler(stream_handler)
        file_handler.close()
        root.setLevel(previous_level)


def config_to_dict(cfg: RunConfig) -> Dict[str, Any]:
    """JSON-ready view of the run settings; output location and verbosity are left out."""

    def plain(value: Any) -> Any:
        if isinstance(value, Path):
            return value.as_posix()
        if isinstance(value, (tuple, list)):
            return [plain(v) for v in value]
        if hasattr(value, "value"):
            return value.value
        return value

    return {f.name: plain(getattr(cfg, f.name)) for f in fields(cfg) if f.name not in ("out", "verbose")}


class Pipeline:
    """Stage runner collecting one results entry per group."""

    def __init__(self, cfg: RunConfig) -> None:
        self.config = cfg
        self.plot_dir = Path(cfg.out) / config.PLOT_DIR
        self.groups: Dict[str, Dict[str, Any]] = {}
        self.plot_files: List[Tuple[Path, str]] = []
        self.locals: List[CitationSet] = []
        self.world: Optional[CitationSet] = None
        self.input_has_locals = False
        self.share_series: List[Tuple[str, PercentileSeries]] = []
        self.series: Dict[str, PercentileSeries] = {}
        self.fits: Dict[str, Tuple[PercentileSeries, Dict[str, PowerLawFit]]] = {}

    def group(self, label: str) -> Dict[str, Any]:
        return self.groups.setdefault(label, {})

    def _plot(self, label: str, view: str, x: Sequence[float], y: Sequence[float], suffix: str = "") -> None:
        path = plot_export.write_view(self.plot_dir, label, view, x, y, suffix)
        self.plot_files.append((path, view))

    def _wanted(self, label: str) -> bool:
        return not self.config.groups or label in self.config.groups

    def _local_sets(self) -> List[CitationSet]:
        # without local groups in the input the world is compared against itself
        if self.locals:
            return self.locals
        if self.world is None:
            return []
        if not self.input_has_locals or config.WORLD_LABEL in self.config.groups:
            return [self.world]
        return []

    def stage_synth(self) -> None:
        cfg = self.config
        seeds = spawn_seeds(cfg.seed, len(cfg.specs) + 1)
        sets = [
            sample_lognormal(LognormalSpec(mu, sigma, n, child), label=label)
            for (label, mu, sigma, n), child in zip(cfg.specs, seeds)
        ]
        extra = None
        if cfg.background is not None:
            mu, sigma, n = cfg.background
            extra = LognormalSpec(mu, sigma, n, seeds[-1])
        world = compose_world(sets, extra=extra)
        for cset in sets + [world]:
            name = "world.csv" if cset.label == config.WORLD_LABEL else f"{cset.label}.csv"
            write_citations(Path(cfg.out) / name, [cset])
            self.group(cset.label).update(
                {"file": name, "size": cset.size, "mean": float(cset.counts.mean())}
            )
            logger.info("wrote %s: %d papers", name, cset.size)

    def stage_load(self) -> None:
        cfg = self.config
        if cfg.inputs:
            sets = merge_sets(load_citations(path) for path in cfg.inputs)
            locals_, self.world, explicit = split_world(sets)
            self.input_has_locals = bool(locals_)
            self.locals = [s for s in locals_ if self._wanted(s.label)]
            logger.info(
                "world %s: %d papers (%s)",
                self.world.label, self.world.size, "explicit" if explicit else "union of groups",
            )
        for path in cfg.shares:
            self.share_series += [(label, s) for label, s in load_shares(path) if self._wanted(label)]
        if cfg.groups:
            found = {s.label for s in self.locals} | {label for label, _ in self.share_series}
            if self.world is not None:
                found.add(self.world.label)
            missing = [g for g in cfg.groups if g not in found]
            if missing:
                raise ConfigError(f"requested groups not found in the input: {', '.join(missing)}")

    def stage_analyze(self) -> None:
        if self.world is None:
            logger.info("analyze: no citation input, skipped")
            return
        cfg = self.config
        targets = self.locals + ([self.world] if self.world not in self.locals else [])
        for cset in targets:
            analysis: Dict[str, Any] = {"size": cset.size, "mean": float(cset.counts.mean())}
            histograms = {}
            for limit in cfg.histogram_limits:
                rows, omitted = histogram(cset, limit)
                histograms[str(limit)] = {"omitted": omitted, "omitted_share": omitted / cset.size * 100.0}
                self._plot(cset.label, "histogram", [c for c, _ in rows], [n for _, n in rows], f"_{limit}")
            analysis["histograms"] = histograms

            bins = log_bins(cset)
            analysis["log_bins"] = [list(b) for b in bins]
            self._plot(cset.label, "logbins", [hi for _, hi, _ in bins], [n for _, _, n in bins])

            rf = rank_frequency(cset)
            self._plot(cset.label, "rankfreq", rf.citations, rf.ranks)
            values, probs = rf.cumulative_curve()
            self._plot(cset.label, "cumulative", values, probs)
            top = values[probs <= 0.01]
            analysis["top1_threshold"] = int(top.min()) if top.size else None

            try:
                css = css_classify(cset, cfg.css_depth)
                analysis["css"] = {"thresholds": list(css.thresholds), "shares": list(css.class_shares)}
            except DegenerateSetError as exc:
                logger.warning("CSS skipped for %s: %s", cset.label, exc)
                analysis["css"] = None

            if cset is self.world:
                try:
                    tail = tail_power_fit(rf, *cfg.tail_window)
                    analysis["tail_fit"] = dict(fit_to_dict(tail), tail_exponent=tail.tail_exponent)
                except TooFewPointsError as exc:
                    logger.warning("tail fit skipped for %s: %s", cset.label, exc)
                    analysis["tail_fit"] = None
            self.group(cset.label)["analysis"] = analysis

    def _citation_series(self) -> Dict[str, PercentileSeries]:
        if self.series or self.world is None:
            return self.series
        prepared = prepare_world(self.world)
        for local in self._local_sets():
            self.series[local.label] = percentile_series(local, prepared, self.config.grid)
        return self.series

    def stage_doublerank(self) -> None:
        if self.world is None:
            logger.info("doublerank: no citation input, skipped")
            return
        prepared = prepare_world(self.world)
        for local in self._local_sets():
            ranks = global_ranks(local, prepared)
            series = percentile_series(local, prepared, self.config.grid)
            self.series[local.label] = series
            self.group(local.label)["doublerank"] = {
                "top_global_rank": ranks[0][1],
                "series": series_to_dict(series),
            }
            self._plot(local.label, "doublerank", [r for r, _ in ranks], [g for _, g in ranks])
            self._plot(local.label, "series", series.x, series.n_local)
            logger.info("%s: top paper at global rank %g of %d", local.label, ranks[0][1], prepared.size)

    def stage_fit(self) -> None:
        cfg = self.config
        sources = list(self._citation_series().items()) + self.share_series
        for label, series in sources:
            if series.synthetic_counts:
                logger.info("%s: share series without a paper count, min-count filter skipped", label)
                used = series
            else:
                used = clean_series(series, cfg.min_count)
            fits = {m.value: fit_series(used, m, cfg.exclude) for m in cfg.methods}
            self.fits[label] = (series, fits)
            group = self.group(label)
            group["fits"] = {m: fit_to_dict(f) for m, f in fits.items()}
            group["deviations"] = {m: [list(row) for row in deviations(series, f)] for m, f in fits.items()}
            if "doublerank" not in group:
                group["series"] = series_to_dict(series)
            if cfg.compare:
                group["compare"] = [
                    {
                        "scenario": row["scenario"],
                        "method": row["method"],
                        "a": row["fit"].a,
                        "alpha": row["fit"].alpha,
                        "chi2": row["fit"].chi2,
                        "p_value": row["fit"].p_value,
                        "p_extrapolated": row["p_extrapolated"],
                        "p_change": row["p_change"],
                    }
                    for row in compare_methods(used, cfg.methods, config.COMPARE_SCENARIOS, cfg.percentile)
                ]
            for method, fit in fits.items():
                logger.info(
                    "%s %s: A=%.4g alpha=%.4f p=%.3g", label, method, fit.a, fit.alpha, fit.p_value
                )

    def stage_indicators(self) -> None:
        cfg = self.config
        for label, (series, fits) in self.fits.items():
            n_total = cfg.n_total if cfg.n_total is not None else series.local_size
            self.group(label)["indicators"] = {
                m: indicators_to_dict(indicator_set(f, n_total, cfg.percentile, cfg.divisor))
                for m, f in fits.items()
            }
        if cfg.ptops is not None:
            fit = closed_form_fit(*cfg.ptops)
            ind = indicator_set(fit, cfg.n_total, cfg.percentile, cfg.divisor)
            self.group("ptops")["fits"] = {fit.method.value: fit_to_dict(fit)}
            self.group("ptops")["indicators"] = {fit.method.value: indicators_to_dict(ind)}

    def payload(self) -> Dict[str, Any]:
        return {"mode": self.config.mode, "config": config_to_dict(self.config), "groups": self.groups}

    def render_plots(self) -> None:
        for path, view in self.plot_files:
            plot_export.render_png(path, view)
        rows = [
            {"group": label, "method": method, "e_p": ind["e_p"]}
            for label, group in self.groups.items()
            for method, ind in group.get("indicators", {}).items()
        ]
        if rows:
            plot_export.render_method_comparison(self.plot_dir, rows)


def _emit_tables(payload: Dict[str, Any], out_dir: Path) -> None:
    tables = render_tables(payload)
    if not tables:
        return
    (Path(out_dir) / config.TABLES_FILE).write_text(tables, encoding="utf-8")
    sys.stdout.write(tables)


def run(cfg: RunConfig) -> int:
    """Execute the configured pipeline; 0 on success, 1 when a stage fails."""

    with run_logging(cfg.out, cfg.verbose):
        logger.info("%s run, output in %s", cfg.mode, cfg.out)
        if cfg.mode == "report" and cfg.results is not None:
            try:
                payload = load_results(cfg.results)
            except DoubleRankError as exc:
                logger.error("report failed: %s", exc)
                return 1
            _emit_tables(payload, cfg.out)
            return 0

        pipeline = Pipeline(cfg)
        for stage in STAGES[cfg.mode]:
            try:
                getattr(pipeline, f"stage_{stage}")()
            except DoubleRankError as exc:
                logger.error("%s failed: %s", stage, exc)
                return 1

        payload = pipeline.payload()
        results = write_results(Path(cfg.out) / config.RESULTS_FILE, payload)
        logger.info("results written to %s", results)
        # rendered from the saved file, as report --results does
        _emit_tables(load_results(results), cfg.out)
        if cfg.png:
            pipeline.render_plots()
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="key = value settings file; flags override it")
    shared.add_argument("--input", dest="inputs", action="append", type=Path, help="group,citations CSV (repeatable)")
    shared.add_argument("--shares", action="append", type=Path, help="group,percentile,share CSV (repeatable)")
    shared.add_argument("--results", type=Path, help="existing results file to render (report only)")
    shared.add_argument("--groups", type=lambda t: tuple(g.strip() for g in t.split(",") if g.strip()))
    shared.add_argument("--grid", type=parse_floats, help="percentile grid, e.g. 1,2,4,7,12,20,35,60,100")
    shared.add_argument("--exclude", type=parse_floats, help="percentiles left out of fits ('none' keeps all)")
    shared.add_argument("--min-count", type=int)
    shared.add_argument("--methods", type=parse_methods, help="comma list of lr, lm, ml")
    shared.add_argument("--percentile", type=float, help="reporting percentile for P(x) and N(x)")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--out", type=Path, help="run output directory")
    shared.add_argument("--spec", dest="specs", action="append", type=parse_spec, help="label:mu:sigma:n")
    background = shared.add_mutually_exclusive_group()
    background.add_argument("--background", type=parse_background, help="mu:sigma:n added to the world only")
    background.add_argument("--no-background", action="store_true")
    shared.add_argument("--css-depth", type=int)
    shared.add_argument("--tail-window", type=parse_pair, help="lo,hi citation window of the tail fit")
    shared.add_argument("--histogram-limits", type=parse_ints)
    shared.add_argument("--compare", action="store_true", default=None, help="fit every exclusion scenario")
    shared.add_argument("--ptops", type=parse_pair, help="P_top1%%,P_top10%% for closed-form indicators")
    shared.add_argument("--n-total", type=float)
    shared.add_argument("--divisor", type=float, help="scalar divisor for P_top0.01%%")
    shared.add_argument("--png", action="store_true", default=None, help="also render plots with matplotlib")
    shared.add_argument("--verbose", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="doublerank", description="Percentile-based double-rank analysis.")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sub.add_parser(mode, parents=[shared])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = vars(args).copy()
    mode = values.pop("mode")
    file_values = read_config_file(values.pop("config")) if values.get("config") else {}
    values.pop("config", None)
    if values.pop("no_background", False):
        file_values["background"] = None
    for key in ("inputs", "shares", "specs"):
        if values.get(key) is not None:
            values[key] = tuple(values[key])
    return build_config(mode, file_values, values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
    except DoubleRankError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    return run(cfg)
