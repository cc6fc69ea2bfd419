"""Run configuration: defaults, then a key-value file, then command-line flags."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import config
from core.doublerank import check_grid
from core.errors import ConfigError, DoubleRankError
from core.types import FitMethod, LognormalSpec

MODES = ("synth", "analyze", "doublerank", "fit", "indicators", "report")

SynthRecipe = Tuple[str, float, float, int]


@dataclass(frozen=True)
class RunConfig:
    mode: str
    inputs: Tuple[Path, ...] = ()
    shares: Tuple[Path, ...] = ()
    results: Optional[Path] = None
    groups: Tuple[str, ...] = ()
    grid: Tuple[float, ...] = config.DEFAULT_GRID
    exclude: Tuple[float, ...] = config.DEFAULT_EXCLUDE
    min_count: int = config.DEFAULT_MIN_COUNT
    methods: Tuple[FitMethod, ...] = tuple(FitMethod.parse(m) for m in config.DEFAULT_METHODS)
    percentile: float = config.DEFAULT_PERCENTILE
    seed: int = config.DEFAULT_SEED
    out: Path = Path("runs")
    specs: Tuple[SynthRecipe, ...] = config.SYNTH_LOCALS
    background: Optional[Tuple[float, float, int]] = config.SYNTH_BACKGROUND
    css_depth: int = config.CSS_DEPTH
    tail_window: Tuple[float, float] = config.TAIL_WINDOW
    histogram_limits: Tuple[int, ...] = config.HISTOGRAM_LIMITS
    compare: bool = False
    ptops: Optional[Tuple[float, float]] = None
    n_total: Optional[float] = None
    divisor: Optional[float] = None
    png: bool = False
    verbose: bool = False

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode '{self.mode}'")
        for path in self.inputs + self.shares + ((self.results,) if self.results else ()):
            if not Path(path).is_file():
                raise ConfigError(f"input file not found: {path}")
        check_grid(self.grid)
        if self.min_count < 0:
            raise ConfigError("min-count must be >= 0")
        if not 0 < self.percentile <= 100:
            raise ConfigError(f"percentile must lie in (0, 100], got {self.percentile}")
        if not self.methods:
            raise ConfigError("at least one fit method is required")
        if self.tail_window[0] >= self.tail_window[1]:
            raise ConfigError(f"empty tail window {self.tail_window}")
        if self.ptops is not None and self.n_total is None:
            raise ConfigError("--ptops needs --n-total")
        for _, mu, sigma, n in self.specs:
            LognormalSpec(mu, sigma, n, self.seed)
        if self.mode == "report" and not (self.inputs or self.shares or self.results):
            raise ConfigError("report needs --input, --shares or --results")
        if self.mode in ("analyze", "doublerank") and not self.inputs:
            raise ConfigError(f"{self.mode} needs at least one --input citation file")
        if self.mode in ("fit", "indicators") and not (self.inputs or self.shares or self.ptops):
            raise ConfigError(f"{self.mode} needs --input or --shares")
        return self


def parse_floats(text: str) -> Tuple[float, ...]:
    text = text.strip()
    if not text or text.lower() == "none":
        return ()
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got '{text}'") from exc


def parse_ints(text: str) -> Tuple[int, ...]:
    values = parse_floats(text)
    if any(v != int(v) for v in values):
        raise ConfigError(f"expected comma-separated integers, got '{text}'")
    return tuple(int(v) for v in values)


def parse_methods(text: str) -> Tuple[FitMethod, ...]:
    return tuple(FitMethod.parse(part) for part in text.split(",") if part.strip())


def parse_spec(text: str) -> SynthRecipe:
    """``label:mu:sigma:n`` recipe."""

    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"synthetic spec must be label:mu:sigma:n, got '{text}'")
    label, mu, sigma, n = parts
    try:
        return label.strip(), float(mu), float(sigma), int(n)
    except ValueError as exc:
        raise ConfigError(f"bad synthetic spec '{text}'") from exc


def parse_background(text: str) -> Optional[Tuple[float, float, int]]:
    if text.strip().lower() == "none":
        return None
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"background must be mu:sigma:n or none, got '{text}'")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad background spec '{text}'") from exc


def _paths(text: str) -> Tuple[Path, ...]:
    return tuple(Path(p.strip()) for p in text.split(",") if p.strip())


def _flag(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got '{text}'")


def parse_pair(text: str) -> Tuple[float, float]:
    values = parse_floats(text)
    if len(values) != 2:
        raise ConfigError(f"expected two comma-separated numbers, got '{text}'")
    return values[0], values[1]


# key -> converter for text values coming from the key-value file
CONVERTERS: Dict[str, Any] = {
    "inputs": _paths,
    "shares": _paths,
    "results": lambda t: Path(t.strip()),
    "groups": lambda t: tuple(g.strip() for g in t.split(",") if g.strip()),
    "grid": parse_floats,
    "exclude": parse_floats,
    "min_count": int,
    "methods": parse_methods,
    "percentile": float,
    "seed": int,
    "out": lambda t: Path(t.strip()),
    "specs": lambda t: tuple(parse_spec(s) for s in t.split(",") if s.strip()),
    "background": parse_background,
    "css_depth": int,
    "tail_window": parse_pair,
    "histogram_limits": parse_ints,
    "compare": _flag,
    "ptops": parse_pair,
    "n_total": float,
    "divisor": float,
    "png": _flag,
    "verbose": _flag,
}


def read_config_file(path: Path) -> Dict[str, Any]:
    """Parse ``key = value`` lines; keys may use dashes or underscores."""

    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",))
    try:
        parser.read_string("[run]\n" + path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    values: Dict[str, Any] = {}
    for raw_key, text in parser["run"].items():
        key = raw_key.replace("-", "_")
        if key not in CONVERTERS:
            raise ConfigError(f"{path}: unknown key '{raw_key}'")
        try:
            values[key] = CONVERTERS[key](text)
        except (ValueError, DoubleRankError) as exc:
            raise ConfigError(f"{path}: bad value for '{raw_key}': {exc}") from exc
    return values


def build_config(mode: str, file_values: Dict[str, Any], flag_values: Dict[str, Any]) -> RunConfig:
    """Layer defaults, file values and flags (flags win), then validate."""

    known = {f.name for f in fields(RunConfig)}
    merged = {k: v for k, v in file_values.items() if k in known}
    merged.update({k: v for k, v in flag_values.items() if k in known and v is not None})
    merged.pop("mode", None)
    return replace(RunConfig(mode=mode), **merged).validate()
