"""Declarative run configuration: YAML schema, validation, and hashing.

A single config file declares the input series, their per-series pipeline
steps (lag, orthogonalization, transform), the scale grid, smoothing,
significance parameters, and output options. CLI flags can override the
significance seed/count/level, the grid maximum period, and the output
directory. The resolved configuration (after overrides) is hashed and the
hash is embedded in every artifact the run writes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

TRANSFORMS = ("log-diff", "diff", "none")


class ConfigError(ValueError):
    """Raised on an invalid or inconsistent configuration."""


@dataclass(frozen=True)
class SeriesConfig:
    label: str
    path: str | None = None
    ratio_of: tuple[str, str] | None = None
    date_column: str = "date"
    value_column: str = "value"
    delimiter: str = ","
    lag: int = 0
    orthogonalize_against: str | None = None
    add_back_mean: bool = False
    transform: str = "none"


@dataclass(frozen=True)
class GridConfig:
    s0: float | None = None  # None -> 2 * dt
    dj: float = 1.0 / 12.0
    max_period: float = 32.0
    full_range: bool = False


@dataclass(frozen=True)
class SmoothingConfig:
    time_bandwidth: float = 1.0
    scale_window: float = 0.6
    identity: bool = False


@dataclass(frozen=True)
class SignificanceConfig:
    n_surrogates: int = 300
    level: float = 0.05
    seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    plot: bool = False
    arrow_stride_time: int = 4
    arrow_stride_scale: int = 4
    arrow_threshold: float = 0.7
    flip_period_axis: bool = False


@dataclass(frozen=True)
class PairConfig:
    x: str = ""
    y: str = ""


@dataclass(frozen=True)
class TripleConfig:
    y: str = ""
    x: str = ""
    condition: str = ""


@dataclass(frozen=True)
class AnalysisConfig:
    series: tuple[SeriesConfig, ...] = ()
    wtc: PairConfig | None = None
    pwc: TripleConfig | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    smoothing: SmoothingConfig = field(default_factory=SmoothingConfig)
    significance: SignificanceConfig = field(default_factory=SignificanceConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    simulate: dict | None = None


_TOP_KEYS = {"series", "wtc", "pwc", "grid", "smoothing", "significance", "output", "simulate"}


def _build(cls, raw: dict, where: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(raw).__name__}")
    known = {f for f in cls.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}; expected {sorted(known)}")
    try:
        return cls(**raw)
    except TypeError as e:
        raise ConfigError(f"{where}: {e}") from None


def load_config(path: str | Path) -> dict:
    """Parse the YAML file into a raw dict (no validation)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return raw


def resolve(raw: dict, overrides: dict | None = None) -> AnalysisConfig:
    """Validate the raw config, apply CLI overrides, and freeze it."""
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}; expected {sorted(_TOP_KEYS)}")

    series = []
    for i, entry in enumerate(raw.get("series", []) or []):
        if isinstance(entry, dict) and isinstance(entry.get("ratio_of"), list):
            entry = dict(entry, ratio_of=tuple(entry["ratio_of"]))
        series.append(_build(SeriesConfig, entry, f"series[{i}]"))
    cfg = AnalysisConfig(
        series=tuple(series),
        wtc=_build(PairConfig, raw["wtc"], "wtc") if raw.get("wtc") else None,
        pwc=_build(TripleConfig, raw["pwc"], "pwc") if raw.get("pwc") else None,
        grid=_build(GridConfig, raw.get("grid", {}) or {}, "grid"),
        smoothing=_build(SmoothingConfig, raw.get("smoothing", {}) or {}, "smoothing"),
        significance=_build(SignificanceConfig, raw.get("significance", {}) or {}, "significance"),
        output=_build(OutputConfig, raw.get("output", {}) or {}, "output"),
        simulate=raw.get("simulate"),
    )

    if overrides:
        sig = cfg.significance
        out = cfg.output
        grid = cfg.grid
        if overrides.get("seed") is not None:
            sig = SignificanceConfig(sig.n_surrogates, sig.level, int(overrides["seed"]), sig.workers)
        if overrides.get("surrogates") is not None:
            sig = SignificanceConfig(int(overrides["surrogates"]), sig.level, sig.seed, sig.workers)
        if overrides.get("level") is not None:
            sig = SignificanceConfig(sig.n_surrogates, float(overrides["level"]), sig.seed, sig.workers)
        if overrides.get("workers") is not None:
            sig = SignificanceConfig(sig.n_surrogates, sig.level, sig.seed, int(overrides["workers"]))
        if overrides.get("max_period") is not None:
            grid = GridConfig(grid.s0, grid.dj, float(overrides["max_period"]), grid.full_range)
        if overrides.get("out") is not None:
            out = OutputConfig(
                str(overrides["out"]), out.plot, out.arrow_stride_time,
                out.arrow_stride_scale, out.arrow_threshold, out.flip_period_axis,
            )
        if overrides.get("plot") is not None:
            out = OutputConfig(
                out.directory, bool(overrides["plot"]), out.arrow_stride_time,
                out.arrow_stride_scale, out.arrow_threshold, out.flip_period_axis,
            )
        cfg = AnalysisConfig(cfg.series, cfg.wtc, cfg.pwc, grid, cfg.smoothing, sig, out, cfg.simulate)

    _validate(cfg)
    return cfg


def _validate(cfg: AnalysisConfig) -> None:
    labels = [s.label for s in cfg.series]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate series labels: {labels}")
    declared = set(labels)
    for s in cfg.series:
        where = f"series {s.label!r}"
        if (s.path is None) == (s.ratio_of is None):
            raise ConfigError(f"{where}: exactly one of 'path' or 'ratio_of' is required")
        if s.ratio_of is not None:
            if len(s.ratio_of) != 2:
                raise ConfigError(f"{where}: ratio_of needs exactly two labels")
            for ref in s.ratio_of:
                if ref not in declared:
                    raise ConfigError(f"{where}: ratio_of references undeclared series {ref!r}")
                target = next(t for t in cfg.series if t.label == ref)
                if target.ratio_of is not None:
                    raise ConfigError(f"{where}: ratio_of cannot reference another ratio series")
        if s.transform not in TRANSFORMS:
            raise ConfigError(f"{where}: transform must be one of {TRANSFORMS}, got {s.transform!r}")
        if s.lag < 0:
            raise ConfigError(f"{where}: lag must be nonnegative")
        if s.orthogonalize_against is not None and s.orthogonalize_against not in declared:
            raise ConfigError(
                f"{where}: orthogonalize_against references undeclared series "
                f"{s.orthogonalize_against!r}"
            )
    if cfg.wtc is not None:
        for role, lab in (("x", cfg.wtc.x), ("y", cfg.wtc.y)):
            if lab not in declared:
                raise ConfigError(f"wtc.{role}: undeclared series {lab!r}")
        if cfg.wtc.x == cfg.wtc.y:
            # Allowed (self-coherence is well defined) but must stay distinct
            # in the panel, so the same label twice is rejected here.
            raise ConfigError("wtc: x and y must be different labels "
                              "(declare the same file under two labels for self-coherence)")
    if cfg.pwc is not None:
        roles = (("y", cfg.pwc.y), ("x", cfg.pwc.x), ("condition", cfg.pwc.condition))
        for role, lab in roles:
            if lab not in declared:
                raise ConfigError(f"pwc.{role}: undeclared series {lab!r}")
        if len({lab for _, lab in roles}) != 3:
            raise ConfigError("pwc: y, x, and condition must be three different labels")
    g = cfg.grid
    if g.dj <= 0 or (g.s0 is not None and g.s0 <= 0) or g.max_period <= 0:
        raise ConfigError("grid: s0, dj, and max_period must be positive")
    sig = cfg.significance
    if sig.n_surrogates < 100:
        raise ConfigError("significance: n_surrogates must be at least 100")
    if not 0.0 < sig.level < 1.0:
        raise ConfigError("significance: level must lie in (0, 1)")
    if sig.workers < 1:
        raise ConfigError("significance: workers must be >= 1")


def config_hash(cfg: AnalysisConfig) -> str:
    """SHA-256 over the canonical JSON form of the resolved configuration."""
    canonical = json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
