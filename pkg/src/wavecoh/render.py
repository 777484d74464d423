"""Heatmap rendering of coherence runs.

Figures follow the usual wavelet-coherence conventions: squared coherence on
a blue-to-yellow map over [0, 1], the unreliable region outside the cone of
influence faded and hatched, black contours around pointwise-significant
cells, phase arrows on a subsampled grid, calendar dates along the time axis
and a log2 period axis. By default short periods sit at the top (2 days at
the top, 32 at the bottom); ``flip_period_axis`` reverses that.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .artifacts import read_arrows, read_run
from .significance import contour

PERIOD_TICKS = (2, 4, 8, 16, 32, 64, 128, 256)


def plot_run(
    meta: dict,
    mats: dict[str, np.ndarray],
    arrows: list[tuple[int, int, float]] | None = None,
    flip_period_axis: bool = False,
    cmap: str = "viridis",
):
    """Build the coherence figure from artifact matrices (file row order).

    Returns (fig, ax) so callers can save, embed, or inspect pixel
    coordinates through ``ax.transData``.
    """
    r2 = mats["r2"]
    mask = mats["mask"].astype(bool)
    coi = mats["coi"]
    periods = np.asarray(meta["grid"]["periods_descending"], dtype=float)
    nj, n = r2.shape
    dj = float(meta["grid"]["dj"])
    l0 = np.log2(periods[0])  # first (largest-period) row
    y_edges = l0 - (np.arange(nj + 1) - 0.5) * dj
    x_edges = np.arange(n + 1) - 0.5

    fig, ax = plt.subplots(figsize=(9.0, 4.5))
    cmap_obj = plt.get_cmap(cmap).copy()
    cmap_obj.set_bad((0.82, 0.82, 0.82))
    mesh = ax.pcolormesh(
        x_edges, y_edges, np.ma.masked_invalid(r2), cmap=cmap_obj, vmin=0.0, vmax=1.0
    )
    fig.colorbar(mesh, ax=ax, label="squared coherence")

    # Fade and hatch the unreliable region: periods larger than the cone.
    t = np.arange(n, dtype=float)
    y_coi = np.log2(np.clip(coi, periods[-1] / 2.0, None))
    y_outside = max(y_edges[0], y_edges[-1])
    ax.fill_between(
        t, y_coi, y_outside, facecolor="white", alpha=0.45, hatch="xx",
        edgecolor="gray", linewidth=0.0,
    )
    ax.plot(t, y_coi, color="gray", lw=0.8)

    for loop in contour(mask):
        xs = [v[0] for v in loop]
        ys = [l0 - v[1] * dj for v in loop]
        ax.plot(xs, ys, color="black", lw=1.2)

    if arrows:
        at = np.array([a[0] for a in arrows], dtype=float)
        aj = np.array([a[1] for a in arrows], dtype=float)
        ang = np.array([a[2] for a in arrows], dtype=float)
        ax.quiver(
            at, l0 - aj * dj, np.cos(ang), np.sin(ang),
            angles="uv", pivot="mid", scale=40, width=0.0025, color="black",
        )

    lo, hi = sorted((y_edges[0], y_edges[-1]))
    ax.set_ylim((hi, lo) if not flip_period_axis else (lo, hi))
    ticks = [p for p in PERIOD_TICKS if lo <= np.log2(p) <= hi]
    ax.set_yticks([np.log2(p) for p in ticks])
    ax.set_yticklabels([str(p) for p in ticks])
    ax.set_ylabel("period (days)")

    dates = meta.get("dates") or []
    tick_idx = np.unique(np.linspace(0, n - 1, min(6, n)).astype(int))
    ax.set_xticks(tick_idx)
    if dates:
        ax.set_xticklabels([dates[i] for i in tick_idx], rotation=30, ha="right")
    ax.set_xlabel("date")
    ax.set_xlim(x_edges[0], x_edges[-1])

    names = meta.get("series", {})
    if meta.get("kind") == "PWC":
        title = (
            f"Partial wavelet coherence: {names.get('x', '?')} vs {names.get('y', '?')}"
            f" | {names.get('condition', '?')}"
        )
    else:
        title = f"Wavelet coherence: {names.get('x', '?')} vs {names.get('y', '?')}"
    ax.set_title(title)
    fig.tight_layout()
    return fig, ax


def render_run(
    run_dir: str | Path,
    out_path: str | Path | None = None,
    flip_period_axis: bool = False,
    cmap: str = "viridis",
    dpi: int = 150,
) -> Path:
    """Render a run directory's artifacts to a PNG next to the CSVs."""
    run_dir = Path(run_dir)
    meta, mats = read_run(run_dir)
    arrows = read_arrows(run_dir) if (run_dir / "arrows.csv").exists() else None
    fig, _ = plot_run(meta, mats, arrows, flip_period_axis=flip_period_axis, cmap=cmap)
    out_path = Path(out_path) if out_path else run_dir / "plot.png"
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)
    return out_path
