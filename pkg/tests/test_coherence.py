import numpy as np
import pytest

from wavecoh import (
    Ar1Model,
    DegenerateFieldError,
    MORLET6,
    ScaleGrid,
    SmoothingSpec,
    classify_phase,
    complex_coherence,
    cross_wavelet,
    cwt,
    phase_arrows,
    pwc,
    smooth,
    wtc,
)
from wavecoh.coherence import _partial_coherence
from wavecoh.synthetic import Component, SignalSpec, coupled_pair


def naive_smooth(mat, grid, spec, dt=1.0):
    """Double-loop reference smoother: full-support Gaussian per scale row
    with in-domain renormalization, then an odd boxcar across scales."""
    nj, n = mat.shape
    tmp = np.zeros_like(mat)
    pos = np.arange(n)
    for j, s in enumerate(grid.scales):
        sigma = spec.time_bandwidth * s / dt
        for tau in range(n):
            w = np.exp(-0.5 * ((pos - tau) / sigma) ** 2)
            tmp[j, tau] = np.sum(mat[j] * w) / np.sum(w)
    bins = spec.scale_bins(grid.dj)
    half = bins // 2
    out = np.zeros_like(mat)
    for j in range(nj):
        lo, hi = max(0, j - half), min(nj, j + half + 1)
        out[j] = tmp[lo:hi].mean(axis=0)
    return out


def small_grid(num=8, dj=0.25):
    scales = 2.0 * 2.0 ** (dj * np.arange(num))
    return ScaleGrid(s0=2.0, dj=dj, scales=scales, periods=scales * MORLET6.fourier_factor)


class TestSmooth:
    def test_constant_field_unchanged(self, rng):
        g = small_grid()
        c = 3.25
        out = smooth(np.full((g.num_scales, 64), c), g, SmoothingSpec())
        assert np.max(np.abs(out - c)) <= 1e-12

    def test_impulse_matches_naive_oracle(self):
        g = small_grid()
        mat = np.zeros((8, 64))
        mat[4, 32] = 1.0
        spec = SmoothingSpec()
        fast = smooth(mat, g, spec)
        slow = naive_smooth(mat, g, spec)
        assert np.max(np.abs(fast - slow)) <= 1e-10 * np.max(np.abs(slow))

    def test_impulse_spread_grows_with_scale(self):
        g = small_grid()
        mat = np.zeros((8, 64))
        mat[:, 32] = 1.0
        fast = smooth(mat, g, SmoothingSpec())
        t = np.arange(64.0)

        def time_var(p):
            p = p / p.sum()
            return np.sum(p * (t - np.sum(p * t)) ** 2)

        spreads = [time_var(fast[j]) for j in range(8)]
        assert all(a < b for a, b in zip(spreads, spreads[1:]))

    def test_random_complex_matches_naive_oracle(self, rng):
        g = small_grid()
        mat = rng.normal(size=(8, 64)) + 1j * rng.normal(size=(8, 64))
        spec = SmoothingSpec()
        fast = smooth(mat, g, spec)
        slow = naive_smooth(mat.real, g, spec) + 1j * naive_smooth(mat.imag, g, spec)
        assert np.max(np.abs(fast - slow)) <= 1e-10 * np.max(np.abs(slow))

    def test_commutes_with_scalar(self, rng):
        g = small_grid()
        mat = rng.normal(size=(8, 64))
        spec = SmoothingSpec()
        lhs = smooth(4.5 * mat, g, spec)
        rhs = 4.5 * smooth(mat, g, spec)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))

    def test_identity_spec_is_noop(self, rng):
        g = small_grid()
        mat = rng.normal(size=(8, 64))
        assert np.array_equal(smooth(mat, g, SmoothingSpec(identity=True)), mat)

    def test_scale_bins_rounds_to_odd(self):
        assert SmoothingSpec().scale_bins(1.0 / 12.0) == 7
        assert SmoothingSpec().scale_bins(0.25) == 3
        assert SmoothingSpec().scale_bins(1.0) == 1
        assert SmoothingSpec(identity=True).scale_bins(1.0 / 12.0) == 1


class TestCrossWavelet:
    def test_self_is_power(self, grid, rng):
        w = cwt(rng.normal(size=64), grid)
        xw = cross_wavelet(w, w)
        # Imaginary part is pure rounding residue of the complex multiply.
        assert np.max(np.abs(xw.imag)) <= 1e-15 * np.max(xw.real)
        assert np.all(xw.real >= 0.0)
        assert np.max(np.abs(xw.real - np.abs(w.coeffs) ** 2)) <= 1e-12 * np.max(xw.real)

    def test_swap_conjugates(self, grid, rng):
        wx = cwt(rng.normal(size=64), grid)
        wy = cwt(rng.normal(size=64), grid)
        a = cross_wavelet(wx, wy)
        b = np.conj(cross_wavelet(wy, wx))
        assert np.max(np.abs(a - b)) <= 1e-15 * np.max(np.abs(a))

    def test_hand_value(self):
        assert (1 + 1j) * np.conj(2 - 1j) == 1 + 3j

    def test_mismatched_grids_rejected(self, grid, rng):
        wx = cwt(rng.normal(size=64), grid)
        wy = cwt(rng.normal(size=65), grid)
        with pytest.raises(ValueError, match="mismatch"):
            cross_wavelet(wx, wy)


class TestWtc:
    def test_self_coherence_is_one(self, grid, rng):
        for n in (126, 512):
            w = cwt(rng.normal(size=n), grid)
            field = wtc(w, w)
            ok = field.in_coi() & ~field.degenerate
            assert np.nanmax(np.abs(field.r2[ok] - 1.0)) <= 1e-9
            assert np.nanmax(np.abs(field.phase[ok])) <= 1e-9

    def test_identity_smoothing_forces_unity(self, grid, rng):
        spec = SmoothingSpec(identity=True)
        for _ in range(3):
            wx = cwt(rng.normal(size=126), grid)
            wy = cwt(rng.normal(size=126), grid)
            field = wtc(wx, wy, spec)
            ok = ~field.degenerate
            assert np.nanmax(np.abs(field.r2[ok] - 1.0)) <= 1e-9

    def test_white_noise_pair_low_coherence(self, grid, rng):
        from wavecoh import fit_ar1, mc_significance

        x, y = rng.normal(size=512), rng.normal(size=512)
        field = wtc(cwt(x, grid), cwt(y, grid))
        inside = field.in_coi()
        observed_mean = np.nanmean(field.r2[inside])
        assert observed_mean < 0.55
        # Distribution check against the surrogate-ensemble machinery: the
        # flagged fraction under the null stays near the nominal level.
        sig = mc_significance(field, [fit_ar1(x), fit_ar1(y)], n_surrogates=100, seed=3)
        rate = sig.mask[inside].mean()
        assert rate < 0.15
        # No broad high-coherence band at long scales.
        long_rows = field.grid.periods >= 16.0
        frac_high = np.nanmean(field.r2[long_rows][inside[long_rows]] > 0.9)
        assert frac_high < 0.2

    def test_symmetry(self, grid, rng):
        wx = cwt(rng.normal(size=126), grid)
        wy = cwt(rng.normal(size=126), grid)
        a = wtc(wx, wy)
        b = wtc(wy, wx)
        ok = ~a.degenerate & ~b.degenerate
        assert np.nanmax(np.abs(a.r2[ok] - b.r2[ok])) <= 1e-12
        assert np.nanmax(np.abs(a.phase[ok] + b.phase[ok])) <= 1e-12

    def test_range_on_random_pairs(self, grid, rng):
        for _ in range(10):
            f = wtc(cwt(rng.normal(size=126), grid), cwt(rng.normal(size=126), grid))
            vals = f.r2[np.isfinite(f.r2)]
            assert np.all(vals >= 0.0) and np.all(vals <= 1.0)

    def test_zero_series_fully_degenerate(self, grid):
        w0 = cwt(np.zeros(64), grid)
        f = wtc(w0, w0)
        assert f.degenerate.all()
        assert np.isnan(f.r2).all()


class TestComplexCoherence:
    def test_self_is_unity(self, grid, rng):
        w = cwt(rng.normal(size=126), grid)
        cc = complex_coherence(w, w)
        ok = ~cc.degenerate
        assert np.nanmax(np.abs(cc.values[ok] - 1.0)) <= 1e-9

    def test_modulus_squared_matches_wtc(self, grid, rng):
        wx = cwt(rng.normal(size=126), grid)
        wy = cwt(rng.normal(size=126), grid)
        cc = complex_coherence(wx, wy)
        field = wtc(wx, wy)
        ok = ~cc.degenerate & ~field.degenerate
        assert np.nanmax(np.abs(np.abs(cc.values[ok]) ** 2 - field.r2[ok])) <= 1e-12

    def test_swap_conjugates(self, grid, rng):
        wx = cwt(rng.normal(size=126), grid)
        wy = cwt(rng.normal(size=126), grid)
        a = complex_coherence(wx, wy)
        b = complex_coherence(wy, wx)
        ok = ~a.degenerate & ~b.degenerate
        assert np.nanmax(np.abs(a.values[ok] - np.conj(b.values[ok]))) <= 1e-12

    def test_modulus_bounded(self, grid, rng):
        wx = cwt(rng.normal(size=126), grid)
        wy = cwt(rng.normal(size=126), grid)
        cc = complex_coherence(wx, wy)
        assert np.nanmax(np.abs(cc.values)) <= 1.0 + 1e-9


class TestPwc:
    def test_conditioning_on_driver_degenerates(self, grid, rng):
        x = rng.normal(size=126)
        y = rng.normal(size=126)
        wx, wy = cwt(x, grid), cwt(y, grid)
        with pytest.raises(DegenerateFieldError):
            pwc(wy, wx, cwt(x, grid))

    def test_independent_conditioner_tracks_wtc(self, grid, rng):
        # Conditioning on noise unrelated to either series moves the field
        # only a little; bounds frozen from the comparison-run oracle.
        diffs = []
        for _ in range(50):
            y, x, z = (rng.normal(size=126) for _ in range(3))
            wy, wx, wz = cwt(y, grid), cwt(x, grid), cwt(z, grid)
            fw = wtc(wx, wy)
            fp = pwc(wy, wx, wz)
            m = fp.in_coi() & np.isfinite(fp.r2) & np.isfinite(fw.r2)
            diffs.append(np.mean(np.abs(fp.r2[m] - fw.r2[m])))
        diffs = np.array(diffs)
        assert diffs.mean() < 0.25
        assert diffs.max() < 0.40

    def test_common_driver_removed(self, grid, rng):
        spec = SignalSpec(
            n=256,
            components=(Component(period=16.0),),
            noise=Ar1Model(alpha=0.3, sigma2=0.1 * (1 - 0.3**2)),
        )
        from wavecoh.synthetic import common_driver_triple

        y, x, z = common_driver_triple(spec, rng)
        wy, wx, wz = cwt(y, grid), cwt(x, grid), cwt(z, grid)
        fw = wtc(wx, wy)
        fp = pwc(wy, wx, wz)
        band = (fw.grid.periods >= 14.0) & (fw.grid.periods <= 18.0)
        cells = band[:, None] & fw.in_coi() & np.isfinite(fp.r2)
        assert np.mean(fp.r2[cells]) <= 0.5 * np.mean(fw.r2[cells])

    def test_zeroed_conditioning_reduces_to_plain_coherence(self, grid, rng):
        wx = cwt(rng.normal(size=126), grid)
        wy = cwt(rng.normal(size=126), grid)
        ryx = complex_coherence(wy, wx).values
        zeros = np.zeros_like(ryx)
        rp2, phase, degen = _partial_coherence(ryx, zeros, zeros)
        ok = ~degen
        assert np.array_equal(rp2[ok], (np.abs(ryx) ** 2)[ok])

    def test_range_on_random_triples(self, grid, rng):
        for _ in range(10):
            wy, wx, wz = (cwt(rng.normal(size=126), grid) for _ in range(3))
            f = pwc(wy, wx, wz)
            vals = f.r2[np.isfinite(f.r2)]
            assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


class TestPhaseArrows:
    def test_classes(self):
        assert classify_phase(0.0) == "in-phase"
        assert classify_phase(np.pi) == "out-of-phase"
        assert classify_phase(-np.pi) == "out-of-phase"
        assert classify_phase(np.pi / 4) == "in-phase, X leads"
        assert classify_phase(-np.pi / 4) == "in-phase, X lags"
        assert classify_phase(np.pi / 2) == "X leads (quarter cycle)"
        assert classify_phase(-np.pi / 2) == "X lags (quarter cycle)"
        assert classify_phase(3 * np.pi / 4) == "out-of-phase, X lags"
        assert classify_phase(-3 * np.pi / 4) == "out-of-phase, X leads"

    def test_lagged_cycle_phase_quarter_pi(self, grid, rng):
        # A 2-day delay on a 16-day cycle is an eighth of a turn.
        spec = SignalSpec(
            n=256,
            components=(Component(period=16.0),),
            noise=Ar1Model(alpha=0.5, sigma2=0.05 * (1 - 0.25)),
        )
        x, y = coupled_pair(spec, lag_days=2.0, rng=rng)
        field = wtc(cwt(x, grid), cwt(y, grid))
        band = (field.grid.periods >= 14.0) & (field.grid.periods <= 18.0)
        cells = band[:, None] & field.in_coi() & (field.r2 > 0.8)
        phases = field.phase[cells]
        mean_phase = np.angle(np.mean(np.exp(1j * phases)))
        assert abs(mean_phase - np.pi / 4) <= np.pi / 16

    def test_subsampling_and_threshold(self, grid, rng):
        field = wtc(cwt(rng.normal(size=126), grid), cwt(rng.normal(size=126), grid))
        arrows = phase_arrows(field, stride_time=4, stride_scale=4, threshold=0.6)
        inside = field.in_coi()
        for t, j, angle in arrows:
            assert (t - 2) % 4 == 0 and (j - 2) % 4 == 0
            assert inside[j, t]
            assert field.r2[j, t] >= 0.6
            assert angle == field.phase[j, t]

    def test_angles_in_principal_range(self, grid, rng):
        field = wtc(cwt(rng.normal(size=126), grid), cwt(rng.normal(size=126), grid))
        ok = np.isfinite(field.phase)
        assert np.all(field.phase[ok] > -np.pi) and np.all(field.phase[ok] <= np.pi)
