"""On-disk artifact layout for coherence runs.

One run directory holds a JSON metadata file plus plain CSV matrices:

    meta.json       grid, dates, seed, kind, config hash, run parameters
    r2.csv          squared coherence, rows = scales by descending period
    phase.csv       phase differences (radians), same layout
    threshold.csv   pointwise null quantile, same layout
    mask.csv        0/1 significance mask, same layout
    coi.csv         one row of N cone-of-influence periods (days)
    arrows.csv      subsampled phase arrows (indices refer to csv rows)
    plot.png        optional rendered heatmap

Matrices are written with 17 significant digits so a write/read round trip
reproduces every float64 bit-exactly. A lock file serializes writers on the
directory.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from filelock import FileLock, Timeout

from .coherence import classify_phase

MATRIX_FILES = ("r2", "phase", "threshold", "mask")
LOCK_TIMEOUT = 10.0


class OutputLockedError(RuntimeError):
    """Another process is writing to the same output directory."""


def _write_matrix(path: Path, mat: np.ndarray, fmt: str = "%.17g") -> None:
    np.savetxt(path, np.atleast_2d(mat), delimiter=",", fmt=fmt)


def _read_matrix(path: Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_run(
    outdir: str | Path,
    meta: dict,
    r2: np.ndarray,
    phase: np.ndarray,
    threshold: np.ndarray,
    mask: np.ndarray,
    coi: np.ndarray,
    arrows: list[tuple[int, int, float]] | None = None,
) -> Path:
    """Write one run's artifacts. Matrices arrive in internal order (rows =
    ascending period) and are stored flipped to descending-period rows."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lock = FileLock(outdir / ".lock")
    try:
        lock.acquire(timeout=LOCK_TIMEOUT)
    except Timeout:
        raise OutputLockedError(f"output directory {outdir} is locked by another run") from None
    try:
        with (outdir / "meta.json").open("w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _write_matrix(outdir / "r2.csv", r2[::-1])
        _write_matrix(outdir / "phase.csv", phase[::-1])
        _write_matrix(outdir / "threshold.csv", threshold[::-1])
        _write_matrix(outdir / "mask.csv", mask[::-1].astype(int), fmt="%d")
        _write_matrix(outdir / "coi.csv", coi)
        nrows = r2.shape[0]
        with (outdir / "arrows.csv").open("w", encoding="utf-8") as fh:
            fh.write("time_index,scale_index,angle_radians,class\n")
            for t, j, angle in arrows or []:
                fh.write(f"{t},{nrows - 1 - j},{angle!r},{classify_phase(angle)}\n")
    finally:
        lock.release()
    return outdir


def read_run(outdir: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a run directory back; matrices keep the stored row order
    (descending period), as recorded in meta['row_order']."""
    outdir = Path(outdir)
    meta_path = outdir / "meta.json"
    if not meta_path.exists():
        raise FileNotFoundError(f"no meta.json in {outdir}")
    with meta_path.open(encoding="utf-8") as fh:
        meta = json.load(fh)
    mats = {name: _read_matrix(outdir / f"{name}.csv") for name in MATRIX_FILES}
    mats["coi"] = _read_matrix(outdir / "coi.csv")[0]
    return meta, mats


def read_arrows(outdir: str | Path) -> list[tuple[int, int, float]]:
    """Arrow triples (time_index, file_row_index, angle) from arrows.csv."""
    path = Path(outdir) / "arrows.csv"
    arrows = []
    with path.open(encoding="utf-8") as fh:
        next(fh)  # header
        for line in fh:
            t, j, angle, _ = line.rstrip("\n").split(",", 3)
            arrows.append((int(t), int(j), float(angle)))
    return arrows
