"""Wavelet coherence diagnostics for pairs and triples of daily time series."""

__version__ = "0.1.0"

from .coherence import (
    CoherenceField,
    ComplexCoherence,
    DegenerateFieldError,
    SmoothingSpec,
    classify_phase,
    complex_coherence,
    cross_wavelet,
    phase_arrows,
    pwc,
    smooth,
    wtc,
)
from .cwt import MORLET6, MotherWavelet, ScaleGrid, WaveletField, coi, cwt, power
from .preprocess import (
    AlignedPanel,
    DataError,
    OlsFit,
    TimeSeries,
    align,
    diff,
    fatality_ratio,
    lag,
    load_csv,
    log_diff,
    orthogonalize,
)
from .significance import (
    Ar1Model,
    SignificanceResult,
    contour,
    fit_ar1,
    mc_significance,
    surrogate,
)
from .synthetic import (
    Component,
    SignalSpec,
    common_driver_triple,
    coupled_pair,
    deterministic_part,
    generate,
)

__all__ = [
    "__version__",
    "AlignedPanel",
    "Ar1Model",
    "CoherenceField",
    "ComplexCoherence",
    "Component",
    "DataError",
    "DegenerateFieldError",
    "MORLET6",
    "MotherWavelet",
    "OlsFit",
    "ScaleGrid",
    "SignalSpec",
    "SignificanceResult",
    "SmoothingSpec",
    "TimeSeries",
    "WaveletField",
    "align",
    "classify_phase",
    "coi",
    "common_driver_triple",
    "complex_coherence",
    "contour",
    "coupled_pair",
    "cross_wavelet",
    "cwt",
    "deterministic_part",
    "diff",
    "fatality_ratio",
    "fit_ar1",
    "generate",
    "lag",
    "load_csv",
    "log_diff",
    "mc_significance",
    "orthogonalize",
    "phase_arrows",
    "power",
    "pwc",
    "smooth",
    "surrogate",
    "wtc",
]
