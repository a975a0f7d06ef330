"""Barcode-to-tree synthesis (growth kernels, parameters, public API)."""

from .engine import (
    KERNEL,
    GrowingTip,
    GrowthRecord,
    available_kernels,
    bifurcation_probability,
    elongation_step,
    synthesize,
    synthesize_record,
    termination_probability,
)
from .params import AngleSampler, TNSParams

__all__ = [
    "KERNEL",
    "AngleSampler",
    "TNSParams",
    "GrowingTip",
    "GrowthRecord",
    "available_kernels",
    "bifurcation_probability",
    "termination_probability",
    "elongation_step",
    "synthesize",
    "synthesize_record",
]
