"""Minimum GSB divergence estimation for discrete models."""

from ._gsb import (
    GsbError,
    InputError,
    SingularMatrixError,
    TuningTriplet,
    classify_boundedness,
    estimate,
    gsb_divergence,
    influence,
    named_divergence,
    run_mse_grid,
    sample_mixture,
    sandwich,
    select,
)

__all__ = [
    "GsbError",
    "InputError",
    "SingularMatrixError",
    "TuningTriplet",
    "classify_boundedness",
    "estimate",
    "gsb_divergence",
    "influence",
    "named_divergence",
    "run_mse_grid",
    "sample_mixture",
    "sandwich",
    "select",
]
