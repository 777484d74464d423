"""Ground-truth signal generators for verifying detection, phase, and
conditioning behavior.

Signals are sums of windowed sinusoids plus AR(1) noise. Window edges carry a
short cosine taper (inside the window) so abrupt onsets do not splatter energy
across scales and corrupt localization checks; the taper never applies at the
series boundaries, so a full-window component is an exact sinusoid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .significance import Ar1Model, surrogate

DEFAULT_TAPER = 5


@dataclass(frozen=True)
class Component:
    """One sinusoidal component: amplitude * cos(2 pi t / period + phase),
    active on the half-open index window [start, end)."""

    period: float
    amplitude: float = 1.0
    phase: float = 0.0
    window: tuple[int, int] | None = None


@dataclass(frozen=True)
class SignalSpec:
    """Recipe for a synthetic series of length n at unit sampling."""

    n: int
    components: tuple[Component, ...] = ()
    noise: Ar1Model | None = None
    taper: int = DEFAULT_TAPER

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.taper < 0:
            raise ValueError("taper must be >= 0")
        for c in self.components:
            if c.period < 2.0:
                raise ValueError(f"period {c.period} below the Nyquist limit of 2 samples")
            if c.window is not None:
                lo, hi = c.window
                if not (0 <= lo < hi <= self.n):
                    raise ValueError(f"window {c.window} outside [0, {self.n})")


def _envelope(u: np.ndarray, window: tuple[int, int] | None, taper: int, n: int) -> np.ndarray:
    """Continuous window envelope at (possibly fractional) sample positions."""
    if window is None:
        window = (0, n)
    lo, hi = window
    env = ((u >= lo) & (u < hi)).astype(float)
    if taper > 0:
        if lo > 0:
            ramp = np.clip((u - lo) / taper, 0.0, 1.0)
            env *= 0.5 * (1.0 - np.cos(np.pi * ramp))
        if hi < n:
            ramp = np.clip((hi - u) / taper, 0.0, 1.0)
            env *= 0.5 * (1.0 - np.cos(np.pi * ramp))
    return env


def deterministic_part(spec: SignalSpec, shift: float = 0.0) -> np.ndarray:
    """Sum of windowed sinusoids evaluated at t - shift for t = 0..n-1."""
    u = np.arange(spec.n, dtype=float) - shift
    out = np.zeros(spec.n)
    for c in spec.components:
        out += (
            c.amplitude
            * np.cos(2.0 * np.pi * u / c.period + c.phase)
            * _envelope(u, c.window, spec.taper, spec.n)
        )
    return out


def _noise(spec: SignalSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.noise is None or spec.noise.sigma2 == 0.0:
        return np.zeros(spec.n)
    return surrogate(spec.noise, spec.n, rng)


def generate(spec: SignalSpec, rng: np.random.Generator) -> np.ndarray:
    """One realization: deterministic components plus AR(1) noise."""
    return deterministic_part(spec) + _noise(spec, rng)


def coupled_pair(
    spec: SignalSpec, lag_days: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """A pair (x, y) where y's deterministic part is x's delayed by lag_days.

    Noise draws are independent across the two series; positive lag makes x
    the leader.
    """
    x = deterministic_part(spec) + _noise(spec, rng)
    y = deterministic_part(spec, shift=lag_days) + _noise(spec, rng)
    return x, y


def common_driver_triple(
    spec: SignalSpec, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(y, x, z) where y and x share the deterministic driver plus independent
    noise, and z is the noiseless driver itself."""
    s = deterministic_part(spec)
    y = s + _noise(spec, rng)
    x = s + _noise(spec, rng)
    return y, x, s.copy()
