import numpy as np
import pytest
from filelock import FileLock

from wavecoh import ScaleGrid, cwt, fit_ar1, mc_significance, phase_arrows, wtc
from wavecoh.artifacts import OutputLockedError, read_arrows, read_run, write_run


@pytest.fixture
def run_artifacts(rng):
    g = ScaleGrid.from_range(dj=1.0 / 6.0, max_period=16.0)
    x, y = rng.normal(size=80), rng.normal(size=80)
    field = wtc(cwt(x, g), cwt(y, g))
    sig = mc_significance(field, [fit_ar1(x), fit_ar1(y)], n_surrogates=100, seed=7)
    arrows = phase_arrows(field, 4, 2, 0.5)
    meta = {
        "kind": "WTC",
        "row_order": "period_descending",
        "grid": {
            "s0": g.s0,
            "dj": g.dj,
            "num_scales": g.num_scales,
            "periods_descending": g.periods[::-1].tolist(),
        },
        "dates": [f"2020-01-{d:02d}" for d in range(1, 29)],
        "series": {"x": "a", "y": "b"},
    }
    return meta, field, sig, arrows


def test_roundtrip_bit_exact(tmp_path, run_artifacts):
    meta, field, sig, arrows = run_artifacts
    write_run(tmp_path / "run", meta, field.r2, field.phase, sig.threshold,
              sig.mask, field.coi, arrows)
    meta2, mats = read_run(tmp_path / "run")
    assert meta2["kind"] == "WTC"
    # Stored rows are flipped to descending period; flipping back must
    # reproduce the originals bit for bit, NaN cells included.
    assert np.array_equal(mats["r2"][::-1], field.r2, equal_nan=True)
    assert np.array_equal(mats["phase"][::-1], field.phase, equal_nan=True)
    assert np.array_equal(mats["threshold"][::-1], sig.threshold, equal_nan=True)
    assert np.array_equal(mats["mask"][::-1].astype(bool), sig.mask)
    assert np.array_equal(mats["coi"], field.coi)


def test_row_order_is_descending_period(tmp_path, run_artifacts):
    meta, field, sig, arrows = run_artifacts
    write_run(tmp_path / "run", meta, field.r2, field.phase, sig.threshold,
              sig.mask, field.coi, arrows)
    _, mats = read_run(tmp_path / "run")
    # Internal row 0 is the smallest period, so it must land in the last row.
    assert np.array_equal(mats["r2"][-1], field.r2[0], equal_nan=True)


def test_arrows_readback_row_indices(tmp_path, run_artifacts):
    meta, field, sig, arrows = run_artifacts
    write_run(tmp_path / "run", meta, field.r2, field.phase, sig.threshold,
              sig.mask, field.coi, arrows)
    got = read_arrows(tmp_path / "run")
    assert len(got) == len(arrows)
    nrows = field.r2.shape[0]
    for (t, j, ang), (t2, jf, ang2) in zip(arrows, got):
        assert t2 == t
        assert jf == nrows - 1 - j  # file rows are flipped
        assert ang2 == ang


def test_locked_directory_rejected(tmp_path, run_artifacts, monkeypatch):
    meta, field, sig, arrows = run_artifacts
    outdir = tmp_path / "run"
    outdir.mkdir()
    monkeypatch.setattr("wavecoh.artifacts.LOCK_TIMEOUT", 0.1)
    lock = FileLock(outdir / ".lock")
    lock.acquire()
    try:
        with pytest.raises(OutputLockedError):
            write_run(outdir, meta, field.r2, field.phase, sig.threshold,
                      sig.mask, field.coi, arrows)
    finally:
        lock.release()


def test_missing_meta_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_run(tmp_path)
