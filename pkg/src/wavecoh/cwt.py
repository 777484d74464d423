"""Continuous wavelet transform of daily series on a dyadic scale grid.

The transform follows the standard normalized convention (Torrence & Compo,
1998): the demeaned series is convolved in the frequency domain with scaled
Morlet daughters normalized to unit energy, so a unit-amplitude sinusoid
produces scale-independent power at its matching scale. Edge reliability is
tracked through the cone of influence derived from the wavelet e-folding time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_OMEGA0 = 6.0
DEFAULT_DJ = 1.0 / 12.0
DEFAULT_MAX_PERIOD = 32.0


@dataclass(frozen=True)
class MotherWavelet:
    """Complex Morlet mother wavelet, a plane wave under a Gaussian envelope.

    Parameters
    ----------
    omega0 : float
        Dimensionless center frequency. Must be >= 5 for the analytic
        (zero-mean) approximation to hold; 6 is the conventional default.
    """

    kind: str = "morlet"
    omega0: float = DEFAULT_OMEGA0

    def __post_init__(self):
        if self.kind != "morlet":
            raise ValueError(f"unsupported mother wavelet: {self.kind!r}")
        if self.omega0 < 5.0:
            raise ValueError("Morlet omega0 must be >= 5 for admissibility")

    @property
    def fourier_factor(self) -> float:
        """Ratio of equivalent Fourier period to wavelet scale."""
        return 4.0 * np.pi / (self.omega0 + np.sqrt(2.0 + self.omega0**2))

    @property
    def efold_factor(self) -> float:
        """Ratio of e-folding time of the envelope autocorrelation to scale."""
        return np.sqrt(2.0)

    def spectrum(self, scale: float, omega: np.ndarray, dt: float) -> np.ndarray:
        """Frequency-domain daughter wavelet at one scale.

        Real-valued, supported on positive frequencies only, and normalized
        by sqrt(2*pi*scale/dt) so every daughter carries unit energy.
        """
        norm = np.sqrt(2.0 * np.pi * scale / dt) * np.pi**-0.25
        out = np.zeros_like(omega)
        pos = omega > 0
        out[pos] = norm * np.exp(-0.5 * (scale * omega[pos] - self.omega0) ** 2)
        return out


MORLET6 = MotherWavelet()


@dataclass(frozen=True)
class ScaleGrid:
    """Geometric grid of wavelet scales and their Fourier-period equivalents.

    Scales are s0 * 2**(j*dj); periods are scales times the wavelet's
    Fourier factor. Both are in days for daily data (dt = 1).
    """

    s0: float
    dj: float
    scales: np.ndarray
    periods: np.ndarray
    wavelet: MotherWavelet = field(default=MORLET6)

    @property
    def num_scales(self) -> int:
        return len(self.scales)

    @classmethod
    def from_range(
        cls,
        dt: float = 1.0,
        s0: float | None = None,
        dj: float = DEFAULT_DJ,
        max_period: float = DEFAULT_MAX_PERIOD,
        wavelet: MotherWavelet = MORLET6,
    ) -> "ScaleGrid":
        """Build the grid from s0 (default 2*dt) up to the first scale whose
        period reaches ``max_period``."""
        if s0 is None:
            s0 = 2.0 * dt
        if s0 <= 0 or dj <= 0:
            raise ValueError("s0 and dj must be positive")
        ff = wavelet.fourier_factor
        if max_period < s0 * ff:
            raise ValueError("max_period below the smallest scale's period")
        j_max = int(np.ceil(np.log2(max_period / (s0 * ff)) / dj))
        scales = s0 * 2.0 ** (dj * np.arange(j_max + 1))
        return cls(s0=s0, dj=dj, scales=scales, periods=scales * ff, wavelet=wavelet)

    @classmethod
    def full_range(
        cls,
        n: int,
        dt: float = 1.0,
        s0: float | None = None,
        dj: float = DEFAULT_DJ,
        wavelet: MotherWavelet = MORLET6,
    ) -> "ScaleGrid":
        """Grid extending to half the series span, for exploratory use."""
        return cls.from_range(dt=dt, s0=s0, dj=dj, max_period=n * dt / 2.0, wavelet=wavelet)


@dataclass
class WaveletField:
    """CWT coefficients of one series: complex matrix of shape (scales, time)."""

    coeffs: np.ndarray
    grid: ScaleGrid
    dt: float
    coi: np.ndarray
    series_name: str = ""

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]


def coi(n: int, dt: float = 1.0, wavelet: MotherWavelet = MORLET6) -> np.ndarray:
    """Cone of influence: maximum reliable Fourier period per time index.

    The e-folding time of the wavelet envelope is ``efold_factor * scale``;
    converting the distance to the nearest edge into period units gives
    ``fourier_factor * efold_factor * dt * min(t, n-1-t)``, zero at both ends
    and maximal at the center.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    idx = np.arange(n, dtype=float)
    return wavelet.fourier_factor * wavelet.efold_factor * dt * np.minimum(idx, n - 1 - idx)


def _next_pow2(n: int) -> int:
    return 1 << (int(n) - 1).bit_length()


@lru_cache(maxsize=16)
def _daughter_bank(m: int, dt: float, omega0: float, scales_bytes: bytes) -> np.ndarray:
    """All frequency-domain daughters for one padded length, shape (J, m)."""
    wavelet = MotherWavelet(omega0=omega0)
    scales = np.frombuffer(scales_bytes, dtype=float)
    omega = 2.0 * np.pi * np.fft.fftfreq(m, d=dt)
    return np.stack([wavelet.spectrum(s, omega, dt) for s in scales])


def cwt(
    x: np.ndarray,
    grid: ScaleGrid,
    dt: float = 1.0,
    series_name: str = "",
) -> WaveletField:
    """Continuous wavelet transform of a real series.

    The series is demeaned, zero-padded to the next power of two at or above
    twice its length (so the circular FFT convolution cannot wrap data into
    itself), and filtered with each frequency-domain daughter. Padding is
    stripped from the output.

    Parameters
    ----------
    x : ndarray, shape (n,)
        Real, finite observations; n >= 8.
    grid : ScaleGrid
        Scales to evaluate; the grid's wavelet is used.
    dt : float
        Sampling interval in days.

    Returns
    -------
    WaveletField
        Complex coefficients of shape (num_scales, n) with the cone of
        influence attached.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("input must be one-dimensional")
    n = x.size
    if n < 8:
        raise ValueError(f"series too short for the smallest scale (n={n} < 8)")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite values in input")

    m = _next_pow2(2 * n)
    fx = np.fft.fft(x - x.mean(), m)
    daughters = _daughter_bank(m, dt, grid.wavelet.omega0, grid.scales.tobytes())
    # One batched inverse transform; rows are independent, so a parallel
    # per-scale split would produce identical results.
    coeffs = np.fft.ifft(fx[None, :] * daughters, axis=1)[:, :n]
    return WaveletField(
        coeffs=coeffs,
        grid=grid,
        dt=dt,
        coi=coi(n, dt, grid.wavelet),
        series_name=series_name,
    )


def power(field: WaveletField) -> np.ndarray:
    """Elementwise squared modulus of the coefficients."""
    return np.abs(field.coeffs) ** 2
