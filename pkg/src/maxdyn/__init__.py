"""Exact analysis of the recurrence x[n+4] = max(x[n+3], x[n+2], x[n+1], 0) - x[n]."""

from .scalar import Scalar, parse_scalar
from .core import tuple4, step_forward, step_backward, orbit, normalize_to_C4
from .cases import Case, classify, trace_routes
from .analysis import detect_period, predict_periodicity, predict_accumulation, nearby_periodic
from .invariants import v1, v2

__version__ = "0.1.0"

__all__ = [
    "Scalar",
    "parse_scalar",
    "tuple4",
    "step_forward",
    "step_backward",
    "orbit",
    "normalize_to_C4",
    "Case",
    "classify",
    "trace_routes",
    "detect_period",
    "predict_periodicity",
    "predict_accumulation",
    "nearby_periodic",
    "v1",
    "v2",
]
