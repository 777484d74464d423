"""AR(1) red-noise Monte Carlo significance testing for coherence fields.

The null model is lag-1 autoregressive noise fitted to each input series.
Surrogate replicates run through the identical transform and coherence
pipeline as the observed data; the pointwise 95th percentile (for the default
5% level) of the null r2 distribution forms the significance threshold, and
the mask keeps cells that beat it inside the cone of influence.

Replicates are seeded by spawning one child seed per surrogate from the
master seed, so thresholds are bit-identical regardless of worker count or
execution order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.signal import lfilter

from .coherence import CoherenceField, SmoothingSpec, pwc, wtc
from .cwt import ScaleGrid, cwt

ALPHA_CLAMP = 0.99


@dataclass(frozen=True)
class Ar1Model:
    """Fitted AR(1) process: x_t = mean + alpha (x_{t-1} - mean) + eps_t.

    sigma2 is the innovation variance; models fitted from data always have
    sigma2 > 0, but zero is allowed so noiseless synthetic specs can reuse
    the type.
    """

    alpha: float
    sigma2: float
    mean: float = 0.0

    def __post_init__(self):
        if not abs(self.alpha) < 1.0:
            raise ValueError("|alpha| must be < 1 for stationarity")
        if self.sigma2 < 0.0:
            raise ValueError("innovation variance must be >= 0")


def fit_ar1(x: np.ndarray) -> Ar1Model:
    """Fit an AR(1) model by the biased (divisor-N) autocorrelation estimator.

    alpha is the sample lag-1 autocorrelation, sigma2 the implied innovation
    variance sample_var * (1 - alpha^2). Fitted |alpha| is clamped to 0.99
    with a warning so surrogates stay stationary.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 10:
        raise ValueError("need at least 10 observations to fit AR(1)")
    mean = x.mean()
    xd = x - mean
    c0 = float(xd @ xd) / n
    if c0 == 0.0:
        raise ValueError("cannot fit AR(1) to a constant series")
    alpha = (float(xd[:-1] @ xd[1:]) / n) / c0
    if abs(alpha) > ALPHA_CLAMP:
        warnings.warn(
            f"fitted AR(1) coefficient {alpha:.4f} clamped to +/-{ALPHA_CLAMP}",
            stacklevel=2,
        )
        alpha = float(np.clip(alpha, -ALPHA_CLAMP, ALPHA_CLAMP))
    return Ar1Model(alpha=alpha, sigma2=c0 * (1.0 - alpha**2), mean=mean)


def surrogate(model: Ar1Model, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one AR(1) surrogate of length n, discarding a 100-sample burn-in."""
    burn = 100
    eps = rng.normal(0.0, np.sqrt(model.sigma2), size=n + burn)
    y = lfilter([1.0], [1.0, -model.alpha], eps)
    return model.mean + y[burn:]


@dataclass
class SignificanceResult:
    """Pointwise null thresholds and the resulting significance mask."""

    threshold: np.ndarray
    mask: np.ndarray
    n_surrogates: int
    seed: int
    level: float


def _null_r2(
    models: tuple,
    grid: ScaleGrid,
    dt: float,
    spec: SmoothingSpec,
    n: int,
    kind: str,
    child_seed: np.random.SeedSequence,
) -> np.ndarray:
    rng = np.random.default_rng(child_seed)
    fields = [cwt(surrogate(m, n, rng), grid, dt) for m in models]
    if kind == "WTC":
        return wtc(fields[0], fields[1], spec).r2
    return pwc(fields[0], fields[1], fields[2], spec).r2


def mc_significance(
    observed: CoherenceField,
    models: list[Ar1Model],
    n_surrogates: int = 300,
    level: float = 0.05,
    seed: int = 0,
    workers: int = 1,
) -> SignificanceResult:
    """Monte Carlo pointwise significance of an observed coherence field.

    Parameters
    ----------
    observed : CoherenceField
        The field under test; its grid, smoothing, and kind define the null
        pipeline.
    models : list of Ar1Model
        One model per input series, in the order of the coherence call
        (x, y for WTC; y, x, z for PWC).
    n_surrogates : int
        Replicates; at least 100.
    level : float
        Pointwise test level; the threshold is the (1 - level) empirical
        quantile of the null r2 per cell.
    seed : int
        Master seed; child seeds are spawned per replicate.
    workers : int
        Process count for replicate evaluation. Results do not depend on it.

    Returns
    -------
    SignificanceResult
        threshold matrix, boolean mask (true only inside the cone of
        influence), and the run parameters.
    """
    if n_surrogates < 100:
        raise ValueError("n_surrogates must be at least 100")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    need = 2 if observed.kind == "WTC" else 3
    if len(models) != need:
        raise ValueError(f"{observed.kind} needs {need} AR(1) models, got {len(models)}")

    ctx = (tuple(models), observed.grid, observed.dt, observed.smoothing,
           observed.r2.shape[1], observed.kind)
    children = np.random.SeedSequence(seed).spawn(n_surrogates)
    if workers == 1:
        draws = [_null_r2(*ctx, ch) for ch in children]
    else:
        draws = Parallel(n_jobs=workers)(delayed(_null_r2)(*ctx, ch) for ch in children)

    stack = np.stack(draws)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN cells
        threshold = np.nanquantile(stack, 1.0 - level, axis=0)
    with np.errstate(invalid="ignore"):
        mask = observed.in_coi() & np.isfinite(observed.r2) & (observed.r2 > threshold)
    return SignificanceResult(
        threshold=threshold,
        mask=mask,
        n_surrogates=n_surrogates,
        seed=seed,
        level=level,
    )


# Unit direction codes for contour tracing: +x, +y, -x, -y.
_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def contour(mask: np.ndarray) -> list[list[tuple[float, float]]]:
    """Boundary polylines of 4-connected true regions of a boolean matrix.

    Each cell (j, t) occupies the unit square centered at (t, j) in
    (time, scale-index) coordinates. Returns closed polylines (first vertex
    repeated at the end), oriented with the region interior on the left;
    interior holes are traced as separate closed polylines. Regions touching
    only at a corner stay separate, matching 4-connectivity.
    """
    mask = np.asarray(mask, dtype=bool)
    nj, n = mask.shape
    # Vertices live on a half-step lattice; store as (2t, 2j) integer keys.
    edges: dict[tuple[int, int, int], tuple[int, int]] = {}

    def add(x0, y0, d):
        dx, dy = _DIRS[d]
        edges[(x0, y0, d)] = (x0 + 2 * dx, y0 + 2 * dy)

    for j in range(nj):
        for t in range(n):
            if not mask[j, t]:
                continue
            if j == 0 or not mask[j - 1, t]:
                add(2 * t - 1, 2 * j - 1, 0)  # bottom, interior above
            if t == n - 1 or not mask[j, t + 1]:
                add(2 * t + 1, 2 * j - 1, 1)  # right, interior left
            if j == nj - 1 or not mask[j + 1, t]:
                add(2 * t + 1, 2 * j + 1, 2)  # top
            if t == 0 or not mask[j, t - 1]:
                add(2 * t - 1, 2 * j + 1, 3)  # left

    loops = []
    for start_key in sorted(edges):
        if start_key not in edges:
            continue
        x, y, d = start_key
        verts = [(x / 2.0, y / 2.0)]
        while True:
            end = edges.pop((x, y, d))
            verts.append((end[0] / 2.0, end[1] / 2.0))
            if (end[0], end[1]) == (start_key[0], start_key[1]):
                break
            # Prefer the sharpest left turn so corner-touching regions
            # remain separate loops.
            x, y = end
            for turn in (1, 0, 3, 2):
                cand = (d + turn) % 4
                if (x, y, cand) in edges:
                    d = cand
                    break
            else:
                raise RuntimeError("open contour: boundary edge set inconsistent")
        loops.append(verts)
    return loops
