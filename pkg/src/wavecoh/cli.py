"""Command-line surface: preprocess, wtc, pwc, simulate, render.

Exit codes: 0 success, 2 configuration error, 3 data validation error,
4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import OutputLockedError, write_run
from .coherence import DegenerateFieldError, SmoothingSpec, phase_arrows, pwc, wtc
from .config import AnalysisConfig, ConfigError, config_hash, load_config, resolve
from .cwt import ScaleGrid, cwt
from .preprocess import (
    AlignedPanel,
    DataError,
    TimeSeries,
    align,
    diff,
    fatality_ratio,
    lag,
    load_csv,
    log_diff,
    orthogonalize,
)
from .render import render_run
from .significance import Ar1Model, fit_ar1, mc_significance
from .synthetic import Component, SignalSpec, common_driver_triple, coupled_pair, generate


def prepare_series(cfg: AnalysisConfig, base_dir: Path) -> dict[str, TimeSeries]:
    """Run every declared series through its pipeline steps.

    Stage order: load, lag, ratio construction, orthogonalization on levels,
    then the configured transform. Ratio series are built from their inputs
    after those inputs' lag step; orthogonalization regressors are used in
    levels (after their own lag step), and residuals replace the series, with
    the series mean added back only when ``add_back_mean`` is set.
    """
    staged: dict[str, TimeSeries] = {}
    for s in cfg.series:
        if s.path is None:
            continue
        path = Path(s.path)
        if not path.is_absolute():
            path = base_dir / path
        ts = load_csv(path, s.date_column, s.value_column, delimiter=s.delimiter, name=s.label)
        staged[s.label] = lag(ts, s.lag) if s.lag else ts
    for s in cfg.series:
        if s.ratio_of is None:
            continue
        num, den = (staged[lab] for lab in s.ratio_of)
        panel = align([num, den])
        ts = fatality_ratio(panel.series(num.name), panel.series(den.name), name=s.label)
        staged[s.label] = lag(ts, s.lag) if s.lag else ts
    for s in cfg.series:
        if s.orthogonalize_against is None:
            continue
        panel = align([staged[s.label], staged[s.orthogonalize_against]])
        fit = orthogonalize(panel.series(s.label), panel.series(s.orthogonalize_against))
        values = fit.residuals
        if s.add_back_mean:
            values = values + panel.columns[s.label].mean()
        staged[s.label] = TimeSeries(s.label, panel.dates, values)
    for s in cfg.series:
        if s.transform == "log-diff":
            staged[s.label] = log_diff(staged[s.label])
        elif s.transform == "diff":
            staged[s.label] = diff(staged[s.label])
    return staged


def prepare_panel(cfg: AnalysisConfig, base_dir: Path, labels: list[str]) -> AlignedPanel:
    staged = prepare_series(cfg, base_dir)
    return align([staged[lab] for lab in labels])


def _build_grid(cfg: AnalysisConfig, n: int, dt: float = 1.0) -> ScaleGrid:
    if cfg.grid.full_range:
        return ScaleGrid.full_range(n, dt=dt, s0=cfg.grid.s0, dj=cfg.grid.dj)
    return ScaleGrid.from_range(dt=dt, s0=cfg.grid.s0, dj=cfg.grid.dj, max_period=cfg.grid.max_period)


def _smoothing(cfg: AnalysisConfig) -> SmoothingSpec:
    sm = cfg.smoothing
    return SmoothingSpec(
        time_bandwidth=sm.time_bandwidth, scale_window=sm.scale_window, identity=sm.identity
    )


def _run_coherence(cfg: AnalysisConfig, base_dir: Path, kind: str) -> Path:
    if kind == "WTC":
        if cfg.wtc is None:
            raise ConfigError("config has no 'wtc' section")
        labels = [cfg.wtc.x, cfg.wtc.y]
        roles = {"x": cfg.wtc.x, "y": cfg.wtc.y}
    else:
        if cfg.pwc is None:
            raise ConfigError("config has no 'pwc' section")
        labels = [cfg.pwc.y, cfg.pwc.x, cfg.pwc.condition]
        roles = {"y": cfg.pwc.y, "x": cfg.pwc.x, "condition": cfg.pwc.condition}

    panel = prepare_panel(cfg, base_dir, labels)
    dt = 1.0
    grid = _build_grid(cfg, panel.n, dt)
    spec = _smoothing(cfg)
    fields = [cwt(panel.columns[lab], grid, dt, series_name=lab) for lab in labels]
    if kind == "WTC":
        field = wtc(fields[0], fields[1], spec)
    else:
        field = pwc(fields[0], fields[1], fields[2], spec)

    in_coi = field.in_coi()
    degen_frac = float(field.degenerate[in_coi].mean()) if in_coi.any() else 0.0
    if kind == "PWC" and degen_frac > 0.20:
        print(
            f"warning: {degen_frac:.0%} of in-COI cells are degenerate; the "
            "conditioning series may be nearly collinear with an input",
            file=sys.stderr,
        )

    sig_cfg = cfg.significance
    models = [fit_ar1(panel.columns[lab]) for lab in labels]
    sig = mc_significance(
        field,
        models,
        n_surrogates=sig_cfg.n_surrogates,
        level=sig_cfg.level,
        seed=sig_cfg.seed,
        workers=sig_cfg.workers,
    )
    out = cfg.output
    arrows = phase_arrows(
        field,
        stride_time=out.arrow_stride_time,
        stride_scale=out.arrow_stride_scale,
        threshold=out.arrow_threshold,
    )

    dates = [str(d) for d in panel.dates]
    meta = {
        "kind": kind,
        "series": roles,
        "dates": dates,
        "observation_mapping": {
            str(i + 1): dates[i] for i in (0, 59, 119) if i < len(dates)
        },
        "dt": dt,
        "row_order": "period_descending",
        "grid": {
            "s0": grid.s0,
            "dj": grid.dj,
            "num_scales": grid.num_scales,
            "scales_descending": grid.scales[::-1].tolist(),
            "periods_descending": grid.periods[::-1].tolist(),
        },
        "wavelet": {"kind": grid.wavelet.kind, "omega0": grid.wavelet.omega0},
        "smoothing": {
            "time_bandwidth": spec.time_bandwidth,
            "scale_window": spec.scale_window,
            "identity": spec.identity,
        },
        "significance": {
            "n_surrogates": sig.n_surrogates,
            "level": sig.level,
            "seed": sig.seed,
        },
        "arrows": {
            "stride_time": out.arrow_stride_time,
            "stride_scale": out.arrow_stride_scale,
            "threshold": out.arrow_threshold,
        },
        "degenerate_in_coi_fraction": degen_frac,
        "phase_convention": "positive phase: the x series leads",
        "config_hash": config_hash(cfg),
        "version": __version__,
    }
    if kind == "PWC":
        meta["pwc_phase"] = (
            "argument of the partial cross-spectrum numerator; an extension, "
            "not part of the standard pair-phase convention"
        )

    outdir = write_run(
        Path(out.directory), meta, field.r2, field.phase, sig.threshold, sig.mask,
        field.coi, arrows,
    )
    print(f"{kind} artifacts written to {outdir} ({panel.n} observations, "
          f"{grid.num_scales} scales)")
    if out.plot:
        png = render_run(outdir, flip_period_axis=out.flip_period_axis)
        print(f"figure written to {png}")
    return outdir


def _write_series_csv(path: Path, s: TimeSeries) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write("date,value\n")
        for d, v in zip(s.dates, s.values):
            fh.write(f"{d},{float(v)!r}\n")


def cmd_preprocess(args) -> int:
    cfg = resolve(load_config(args.config), _overrides(args))
    base = Path(args.config).resolve().parent
    staged = prepare_series(cfg, base)
    panel = align(list(staged.values())) if len(staged) > 1 else None
    outdir = Path(cfg.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    for label, s in staged.items():
        if panel is not None:
            s = panel.series(label)
        _write_series_csv(outdir / f"{label}.csv", s)
    n = panel.n if panel is not None else len(next(iter(staged.values())))
    print(f"wrote {len(staged)} aligned series ({n} observations) to {outdir}")
    return 0


def cmd_wtc(args) -> int:
    cfg = resolve(load_config(args.config), _overrides(args))
    _run_coherence(cfg, Path(args.config).resolve().parent, "WTC")
    return 0


def cmd_pwc(args) -> int:
    cfg = resolve(load_config(args.config), _overrides(args))
    _run_coherence(cfg, Path(args.config).resolve().parent, "PWC")
    return 0


def cmd_simulate(args) -> int:
    cfg = resolve(load_config(args.config), _overrides(args))
    sim = cfg.simulate
    if not sim:
        raise ConfigError("config has no 'simulate' section")
    try:
        n = int(sim["n"])
        labels = list(sim.get("labels", ["X", "Y"]))
        kind = sim.get("kind", "pair")
        start = date.fromisoformat(str(sim.get("start_date", "2020-01-01")))
        comps = tuple(
            Component(
                period=float(c["period"]),
                amplitude=float(c.get("amplitude", 1.0)),
                phase=float(c.get("phase", 0.0)),
                window=tuple(c["window"]) if c.get("window") else None,
            )
            for c in sim.get("components", [])
        )
        noise = None
        if sim.get("noise"):
            nz = sim["noise"]
            noise = Ar1Model(
                alpha=float(nz.get("alpha", 0.0)),
                sigma2=float(nz.get("sigma2", 1.0)),
                mean=float(nz.get("mean", 0.0)),
            )
        spec = SignalSpec(n=n, components=comps, noise=noise,
                          taper=int(sim.get("taper", 5)))
        seed = int(sim.get("seed", 0))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"simulate: {e}") from None

    rng = np.random.default_rng(seed)
    if kind == "pair":
        if len(labels) != 2:
            raise ConfigError("simulate: 'pair' needs exactly 2 labels")
        series = coupled_pair(spec, float(sim.get("lag_days", 0.0)), rng)
    elif kind == "triple":
        if len(labels) != 3:
            raise ConfigError("simulate: 'triple' needs exactly 3 labels")
        series = common_driver_triple(spec, rng)
    elif kind == "single":
        if len(labels) != 1:
            raise ConfigError("simulate: 'single' needs exactly 1 label")
        series = (generate(spec, rng),)
    else:
        raise ConfigError(f"simulate: unknown kind {kind!r}")

    dates = np.array([start + timedelta(days=i) for i in range(n)], dtype="datetime64[D]")
    outdir = Path(cfg.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    for label, values in zip(labels, series):
        _write_series_csv(outdir / f"{label}.csv", TimeSeries(label, dates, values))
    print(f"wrote {len(labels)} synthetic series of length {n} to {outdir}")
    return 0


def cmd_render(args) -> int:
    out = render_run(
        args.run_dir,
        out_path=args.out,
        flip_period_axis=args.flip_period_axis,
        cmap=args.cmap,
    )
    print(f"figure written to {out}")
    return 0


def _overrides(args) -> dict:
    return {
        "seed": getattr(args, "seed", None),
        "surrogates": getattr(args, "surrogates", None),
        "level": getattr(args, "level", None),
        "max_period": getattr(args, "max_period", None),
        "out": getattr(args, "out", None),
        "workers": getattr(args, "workers", None),
        "plot": getattr(args, "plot", None),
    }


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="YAML configuration file")
    p.add_argument("--seed", type=int, help="override the Monte Carlo master seed")
    p.add_argument("--surrogates", type=int, help="override the surrogate count")
    p.add_argument("--level", type=float, help="override the significance level")
    p.add_argument("--max-period", type=float, dest="max_period",
                   help="override the largest period (days) on the scale grid")
    p.add_argument("--out", help="override the output directory")
    p.add_argument("--workers", type=int, help="override the surrogate worker count")
    p.add_argument("--plot", action="store_true", default=None,
                   help="also render plot.png into the output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavecoh",
        description="Wavelet coherence and partial wavelet coherence diagnostics "
        "with AR(1) Monte Carlo significance testing.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="run the data-preparation pipeline and write aligned CSVs")
    _add_run_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("wtc", help="wavelet coherence between the configured pair")
    _add_run_flags(p)
    p.set_defaults(func=cmd_wtc)

    p = sub.add_parser("pwc", help="partial wavelet coherence conditioning out a third series")
    _add_run_flags(p)
    p.set_defaults(func=cmd_pwc)

    p = sub.add_parser("simulate", help="generate synthetic ground-truth series as CSVs")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("render", help="render a run directory's artifacts to a PNG")
    p.add_argument("run_dir", help="directory holding meta.json and the CSV matrices")
    p.add_argument("--out", help="output image path (default: <run_dir>/plot.png)")
    p.add_argument("--flip-period-axis", action="store_true",
                   help="put short periods at the bottom instead of the top")
    p.add_argument("--cmap", default="viridis", help="matplotlib colormap name")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OutputLockedError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (DataError, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except DegenerateFieldError as e:
        print(f"degeneracy error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
