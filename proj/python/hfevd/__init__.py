"""Hermite (HFEVD) and orthogonal-polynomial (OFEVD) forecast error variance
decompositions, nonlinear impulse responses and TVAR estimation."""

from ._core import (
    HfevdError,
    Model,
    classical_family,
    decompose,
    eirf,
    girf,
    irf_path,
    model,
    model_from_fit,
    model_names,
    ofevd,
    run_config,
    sample_family,
    set_threads,
    simulate,
    threads,
    tvar_fit,
)

__all__ = [
    "HfevdError",
    "Model",
    "classical_family",
    "decompose",
    "eirf",
    "girf",
    "irf_path",
    "model",
    "model_from_fit",
    "model_names",
    "ofevd",
    "run_config",
    "sample_family",
    "set_threads",
    "simulate",
    "threads",
    "tvar_fit",
]
