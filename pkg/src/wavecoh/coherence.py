"""Cross-wavelet spectrum, smoothing, squared coherence, and partial coherence.

Squared wavelet coherence follows the Torrence & Webster (1999) estimator: the
cross-spectrum and both auto-spectra are weighted by 1/scale per row, smoothed
in time with a scale-proportional Gaussian and across scales with a short
boxcar, and combined as |S(W_xy)|^2 / (S(|W_x|^2) * S(|W_y|^2)). Without the
smoothing step the ratio is identically one, so the smoothing operator is load
bearing and is validated by a dedicated identity-smoothing guard in the tests.

Partial coherence conditions the pair on a third series using the complex
coherence form of Mihanovic et al. (2009).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy import ndimage

from .cwt import ScaleGrid, WaveletField

# Relative floor under which a smoothed auto-spectrum is considered to carry
# no usable signal (series locally constant over the effective window).
_DEGENERATE_REL = 1e-12
# Absolute floor for the partial-coherence denominator factors 1 - |R|^2.
_PWC_DEGENERATE = 1e-6
# Width of the clamping band around [0, 1] for floating-point spill.
_CLAMP_BAND = 1e-12


class DegenerateFieldError(ValueError):
    """Raised when a coherence field is degenerate at every cell."""


@dataclass(frozen=True)
class SmoothingSpec:
    """Smoothing operator configuration.

    time_bandwidth scales the Gaussian time kernel's standard deviation
    (sigma = time_bandwidth * scale); scale_window is the boxcar width in
    scale-index units of one octave (0.6 is the Morlet decorrelation length),
    realized as the nearest odd number of 1/dj-per-octave bins. ``identity``
    disables smoothing entirely, which is only useful as a diagnostic.
    """

    time_bandwidth: float = 1.0
    scale_window: float = 0.6
    identity: bool = False

    def __post_init__(self):
        if self.time_bandwidth <= 0 or self.scale_window < 0:
            raise ValueError("invalid smoothing parameters")

    def scale_bins(self, dj: float) -> int:
        if self.identity:
            return 1
        return max(1, 2 * int(round((self.scale_window / dj - 1.0) / 2.0)) + 1)


@dataclass
class CoherenceField:
    """Squared coherence and phase on a (scale, time) grid.

    r2 lies in [0, 1]; phase in (-pi, pi]. Cells flagged in ``degenerate``
    carry NaN in both matrices and are excluded from downstream statistics.
    """

    r2: np.ndarray
    phase: np.ndarray
    coi: np.ndarray
    grid: ScaleGrid
    kind: str  # "WTC" or "PWC"
    dt: float
    degenerate: np.ndarray
    smoothing: SmoothingSpec
    series_names: tuple = ()

    def in_coi(self) -> np.ndarray:
        """Boolean matrix, true where the cell's period is inside the cone."""
        return self.grid.periods[:, None] <= self.coi[None, :]


@dataclass
class ComplexCoherence:
    """Smoothed normalized cross-spectrum; |values| <= 1 cellwise."""

    values: np.ndarray
    degenerate: np.ndarray


def cross_wavelet(wx: WaveletField, wy: WaveletField) -> np.ndarray:
    """Cross-wavelet spectrum W_x * conj(W_y)."""
    _check_match(wx, wy)
    return wx.coeffs * np.conj(wy.coeffs)


def _check_match(*fields: WaveletField) -> None:
    ref = fields[0]
    for f in fields[1:]:
        if f.coeffs.shape != ref.coeffs.shape or f.dt != ref.dt:
            raise ValueError("wavelet fields have mismatched shapes or sampling")
        if not np.array_equal(f.grid.scales, ref.grid.scales):
            raise ValueError("wavelet fields computed on different scale grids")


@lru_cache(maxsize=16)
def _time_kernel_bank(n: int, dt: float, time_bandwidth: float, scales_bytes: bytes):
    """Precompute per-scale Gaussian kernel spectra and edge-renormalization
    masses for series length n. Kernels have full support (2n - 1 taps)."""
    scales = np.frombuffer(scales_bytes, dtype=float)
    u = np.arange(-(n - 1), n, dtype=float)
    sigma = time_bandwidth * scales / dt
    kerns = np.exp(-0.5 * (u[None, :] / sigma[:, None]) ** 2)
    nfft = sfft.next_fast_len(3 * n - 2, real=True)
    kf = sfft.rfft(kerns, nfft, axis=1)
    ones_f = sfft.rfft(np.ones((1, n)), nfft, axis=1)
    norms = sfft.irfft(ones_f * kf, nfft, axis=1)[:, n - 1 : 2 * n - 1]
    return kf, norms, nfft


def _smooth_stack(stack: np.ndarray, grid: ScaleGrid, spec: SmoothingSpec, dt: float) -> np.ndarray:
    """Smooth a (k, J, N) stack of real planes with shared kernels.

    Time pass: per-scale Gaussian with sigma = time_bandwidth * scale / dt
    samples, full support, edge-renormalized by the in-domain kernel mass
    (the convolution of an all-ones row through the same transform). Scale
    pass: odd boxcar, renormalized by the in-domain bin count.
    """
    if spec.identity:
        return stack.copy()
    k, nj, n = stack.shape
    kf, norms, nfft = _time_kernel_bank(n, dt, spec.time_bandwidth, grid.scales.tobytes())
    sf = sfft.rfft(stack, nfft, axis=2)
    out = sfft.irfft(sf * kf[None, :, :], nfft, axis=2)[:, :, n - 1 : 2 * n - 1] / norms[None, :, :]
    w = spec.scale_bins(grid.dj)
    if w > 1:
        counts = ndimage.uniform_filter1d(np.ones(nj), size=w, mode="constant", cval=0.0) * w
        sums = ndimage.uniform_filter1d(out, size=w, axis=1, mode="constant", cval=0.0) * w
        out = sums / counts[None, :, None]
    return out


def smooth(mat: np.ndarray, grid: ScaleGrid, spec: SmoothingSpec, dt: float = 1.0) -> np.ndarray:
    """Apply the smoothing operator to one (scales, time) matrix.

    Real and imaginary parts are smoothed identically; a constant matrix is
    returned unchanged up to rounding because every kernel is renormalized to
    unit in-domain mass.
    """
    mat = np.asarray(mat)
    if mat.shape != (grid.num_scales, mat.shape[1]):
        raise ValueError("matrix shape does not match the scale grid")
    if np.iscomplexobj(mat):
        sm = _smooth_stack(np.stack([mat.real, mat.imag]), grid, spec, dt)
        return sm[0] + 1j * sm[1]
    return _smooth_stack(mat[None, ...].astype(float), grid, spec, dt)[0]


def _clamp_unit(r2: np.ndarray) -> np.ndarray:
    """Clamp floating-point spill just outside [0, 1] back onto the range."""
    r2 = np.where((r2 < 0.0) & (r2 >= -_CLAMP_BAND), 0.0, r2)
    r2 = np.where((r2 > 1.0) & (r2 <= 1.0 + _CLAMP_BAND), 1.0, r2)
    return r2


def _principal_phase(phase: np.ndarray) -> np.ndarray:
    """Map angles onto (-pi, pi]."""
    return np.where(phase <= -np.pi, phase + 2.0 * np.pi, phase)


def _smoothed_spectra(fields: list[WaveletField], pairs: list[tuple[int, int]], spec: SmoothingSpec):
    """Smooth 1/s-weighted auto-spectra of all fields and cross-spectra of the
    requested (a, b) index pairs in a single pass with shared kernels.

    Returns (autos, crosses): autos[i] is S(s^-1 |W_i|^2), crosses[k] the
    complex S(s^-1 W_a conj(W_b)) for pairs[k].
    """
    _check_match(*fields)
    grid, dt = fields[0].grid, fields[0].dt
    inv_s = 1.0 / grid.scales[:, None]
    planes = []
    for a, b in pairs:
        cw = fields[a].coeffs * np.conj(fields[b].coeffs) * inv_s
        planes.append(cw.real)
        planes.append(cw.imag)
    for f in fields:
        # Same multiply path as the cross-spectra, so a self cross-spectrum
        # matches its auto-spectrum bitwise.
        planes.append((f.coeffs * np.conj(f.coeffs)).real * inv_s)
    sm = _smooth_stack(np.stack(planes), grid, spec, dt)
    crosses = [sm[2 * k] + 1j * sm[2 * k + 1] for k in range(len(pairs))]
    autos = [sm[2 * len(pairs) + i] for i in range(len(fields))]
    return autos, crosses


def _auto_degenerate(auto: np.ndarray) -> np.ndarray:
    top = np.max(auto) if auto.size else 0.0
    if not np.isfinite(top) or top <= 0.0:
        return np.ones(auto.shape, dtype=bool)
    return ~(auto > top * _DEGENERATE_REL)


def wtc(wx: WaveletField, wy: WaveletField, spec: SmoothingSpec = SmoothingSpec()) -> CoherenceField:
    """Squared wavelet coherence and phase difference of two series.

    Parameters
    ----------
    wx, wy : WaveletField
        Transforms on identical grids; ``wx`` is the series whose lead shows
        as positive phase.
    spec : SmoothingSpec
        Smoothing operator; the default matches the Gaussian-in-time,
        boxcar-in-scale convention.

    Returns
    -------
    CoherenceField
        r2 = |S(s^-1 W_xy)|^2 / (S(s^-1 |W_x|^2) S(s^-1 |W_y|^2)) with
        phase = arg S(s^-1 W_xy). Cells whose auto-spectra fall below the
        degeneracy floor are NaN.
    """
    autos, crosses = _smoothed_spectra([wx, wy], [(0, 1)], spec)
    sxx, syy = autos
    s_cross = crosses[0]
    degenerate = _auto_degenerate(sxx) | _auto_degenerate(syy)
    with np.errstate(invalid="ignore", divide="ignore"):
        r2 = np.abs(s_cross) ** 2 / (sxx * syy)
    r2 = _clamp_unit(r2)
    phase = _principal_phase(np.angle(s_cross))
    degenerate |= ~np.isfinite(r2)
    r2[degenerate] = np.nan
    phase[degenerate] = np.nan
    return CoherenceField(
        r2=r2,
        phase=phase,
        coi=wx.coi.copy(),
        grid=wx.grid,
        kind="WTC",
        dt=wx.dt,
        degenerate=degenerate,
        smoothing=spec,
        series_names=(wx.series_name, wy.series_name),
    )


def complex_coherence(
    wx: WaveletField, wy: WaveletField, spec: SmoothingSpec = SmoothingSpec()
) -> ComplexCoherence:
    """Smoothed normalized cross-spectrum R(X, Y); |R|^2 equals wtc's r2."""
    autos, crosses = _smoothed_spectra([wx, wy], [(0, 1)], spec)
    return _normalized_cross(crosses[0], autos[0], autos[1])


def _normalized_cross(s_cross: np.ndarray, sxx: np.ndarray, syy: np.ndarray) -> ComplexCoherence:
    degenerate = _auto_degenerate(sxx) | _auto_degenerate(syy)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = s_cross / np.sqrt(sxx * syy)
    degenerate |= ~np.isfinite(values)
    values[degenerate] = np.nan
    return ComplexCoherence(values=values, degenerate=degenerate)


def _partial_coherence(ryx: np.ndarray, ryz: np.ndarray, rxz: np.ndarray):
    """Cellwise partial coherence from complex coherences.

    Returns (rp2, phase, degenerate): rp2 is
    |R(Y,X) - R(Y,Z) conj(R(X,Z))|^2 / ((1-|R(Y,Z)|^2)(1-|R(X,Z)|^2)),
    phase the argument of the numerator, and degenerate marks cells where a
    denominator factor drops below the floor (conditioning series nearly
    identical to an input there).
    """
    num = ryx - ryz * np.conj(rxz)
    dy = 1.0 - np.abs(ryz) ** 2
    dx = 1.0 - np.abs(rxz) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        rp2 = np.abs(num) ** 2 / (dy * dx)
    degenerate = ~((dy >= _PWC_DEGENERATE) & (dx >= _PWC_DEGENERATE)) | ~np.isfinite(rp2)
    rp2 = _clamp_unit(rp2)
    phase = _principal_phase(np.angle(num))
    rp2 = np.where(degenerate, np.nan, rp2)
    phase = np.where(degenerate, np.nan, phase)
    return rp2, phase, degenerate


def pwc(
    wy: WaveletField,
    wx: WaveletField,
    wz: WaveletField,
    spec: SmoothingSpec = SmoothingSpec(),
) -> CoherenceField:
    """Partial wavelet coherence of Y and X conditioning out Z.

    Parameters
    ----------
    wy, wx, wz : WaveletField
        Outcome, driver, and conditioning series on identical grids.

    Returns
    -------
    CoherenceField
        kind "PWC"; r2 holds the squared partial coherence in [0, 1] and
        phase the argument of the partial cross-spectrum numerator. Cells
        where a conditioning factor 1 - |R|^2 falls below 1e-6 are NaN.

    Raises
    ------
    DegenerateFieldError
        If every cell is degenerate (Z essentially duplicates X or Y).
    """
    autos, crosses = _smoothed_spectra([wy, wx, wz], [(0, 1), (0, 2), (1, 2)], spec)
    ryx = _normalized_cross(crosses[0], autos[0], autos[1])
    ryz = _normalized_cross(crosses[1], autos[0], autos[2])
    rxz = _normalized_cross(crosses[2], autos[1], autos[2])
    rp2, phase, degenerate = _partial_coherence(ryx.values, ryz.values, rxz.values)
    degenerate = degenerate | ryx.degenerate | ryz.degenerate | rxz.degenerate
    rp2 = np.where(degenerate, np.nan, rp2)
    phase = np.where(degenerate, np.nan, phase)
    if degenerate.all():
        raise DegenerateFieldError(
            "partial coherence degenerate everywhere: conditioning series is "
            "indistinguishable from an input"
        )
    return CoherenceField(
        r2=rp2,
        phase=phase,
        coi=wy.coi.copy(),
        grid=wy.grid,
        kind="PWC",
        dt=wy.dt,
        degenerate=degenerate,
        smoothing=spec,
        series_names=(wy.series_name, wx.series_name, wz.series_name),
    )


PHASE_CLASSES = (
    "in-phase",
    "in-phase, X leads",
    "X leads (quarter cycle)",
    "out-of-phase, X lags",
    "out-of-phase",
    "out-of-phase, X leads",
    "X lags (quarter cycle)",
    "in-phase, X lags",
)


def classify_phase(angle: float) -> str:
    """Map a phase difference to one of eight lead/lag octant classes.

    Positive angles mean the first series leads; angles near pi mean the
    pair moves out of phase.
    """
    return PHASE_CLASSES[int(np.round(angle / (np.pi / 4.0))) % 8]


def phase_arrows(
    field: CoherenceField,
    stride_time: int = 4,
    stride_scale: int = 4,
    threshold: float = 0.5,
) -> list[tuple[int, int, float]]:
    """Subsampled arrow set for phase plotting.

    Keeps every (stride_scale, stride_time)-th cell that is inside the cone,
    non-degenerate, and has r2 >= threshold. Returns (time index, scale
    index, angle) triples in scan order.
    """
    if stride_time < 1 or stride_scale < 1:
        raise ValueError("strides must be >= 1")
    keep = field.in_coi() & np.isfinite(field.r2)
    arrows = []
    nj, n = field.r2.shape
    for j in range(stride_scale // 2, nj, stride_scale):
        for t in range(stride_time // 2, n, stride_time):
            if keep[j, t] and field.r2[j, t] >= threshold:
                arrows.append((t, j, float(field.phase[j, t])))
    return arrows
