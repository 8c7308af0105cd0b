"""Explicit Young measures of piecewise monotone-or-constant functions."""

from .expr import differentiate, evaluate, parse, render
from .measure import (
    YoungMeasure,
    cdf,
    cdf_values,
    compute,
    density,
    density_at,
    integrate,
    pushforward_integral,
    verify_identity,
)
from .oracle import empirical_pushforward, kolmogorov_distance, tensor_integrals
from .oscillation import OscillationSpec, build_example, dilate, rescale, weight_sum
from .piecewise import (
    ConstantPiece,
    Interval,
    MonotonePiece,
    PiecewiseFunction,
    from_json,
    to_json,
    validate,
)

__all__ = [
    "ConstantPiece", "Interval", "MonotonePiece", "OscillationSpec", "PiecewiseFunction",
    "YoungMeasure", "build_example", "cdf", "cdf_values", "compute", "density", "density_at",
    "differentiate", "dilate", "empirical_pushforward", "evaluate", "from_json", "integrate",
    "kolmogorov_distance", "parse", "pushforward_integral", "render", "rescale", "tensor_integrals",
    "to_json", "validate", "verify_identity", "weight_sum",
]
